#include <gtest/gtest.h>

#include <random>
#include <string>

#include "ecgsec/error.hpp"
#include "ecgsec/transport.hpp"

using namespace ecgsec;

namespace {

EncryptedFrame random_frame(std::mt19937_64& rng, std::size_t max_len = 600) {
  EncryptedFrame f;
  f.seq = rng();
  f.timestamp_ms = rng();
  f.payload.resize(rng() % (max_len + 1));
  for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng());
  return f;
}

std::vector<EncryptedFrame> frames_of(const std::vector<DecodeEvent>& ev) {
  std::vector<EncryptedFrame> out;
  for (const auto& e : ev) {
    if (const auto* f = std::get_if<EncryptedFrame>(&e)) out.push_back(*f);
  }
  return out;
}

std::vector<DecodeError> errors_of(const std::vector<DecodeEvent>& ev) {
  std::vector<DecodeError> out;
  for (const auto& e : ev) {
    if (const auto* f = std::get_if<DecodeError>(&e)) out.push_back(*f);
  }
  return out;
}

}  // namespace

TEST(Crc32, CheckValue) {
  const std::string s = "123456789";
  EXPECT_EQ(crc32({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}), 0xCBF43926u);
}

TEST(Frame, LayoutSizes) {
  const std::vector<std::uint8_t> p(300, 0xAB);
  const auto bytes = encode_frame(p, 1, 600);
  EXPECT_EQ(bytes.size(), 327u);
  EXPECT_EQ(bytes[0], 'E');
  EXPECT_EQ(bytes[3], 'X');
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[12], 1);                     // seq low byte
  EXPECT_EQ(bytes[19] * 256 + bytes[20], 600);  // timestamp low bytes
  EXPECT_EQ(bytes[21] * 256 + bytes[22], 300);
  EXPECT_EQ(encode_frame({}, 0, 0).size(), 27u);
  EXPECT_THROW(encode_frame(std::vector<std::uint8_t>(65536), 0, 0), PayloadTooLarge);
}

TEST(Frame, EmptyPayloadDecodes) {
  const auto ev = decode_frames(encode_frame({}, 5, 6));
  ASSERT_EQ(ev.size(), 1u);
  const auto& f = std::get<EncryptedFrame>(ev[0]);
  EXPECT_EQ(f.seq, 5u);
  EXPECT_TRUE(f.payload.empty());
}

TEST(FrameProperty, Roundtrip) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 500; ++t) {
    const auto f = random_frame(rng);
    const auto ev = decode_frames(encode_frame(f));
    ASSERT_EQ(ev.size(), 1u);
    ASSERT_EQ(std::get<EncryptedFrame>(ev[0]), f);
  }
}

TEST(Decoder, ConcatenationArbitraryChunks) {
  std::mt19937_64 rng(32);
  std::vector<EncryptedFrame> sent;
  std::vector<std::uint8_t> wire;
  for (int k = 0; k < 40; ++k) {
    sent.push_back(random_frame(rng));
    const auto b = encode_frame(sent.back());
    wire.insert(wire.end(), b.begin(), b.end());
  }
  FrameDecoder dec;
  std::size_t pos = 0;
  std::vector<DecodeEvent> ev;
  while (pos < wire.size()) {
    const std::size_t n = std::min<std::size_t>(1 + rng() % 97, wire.size() - pos);
    dec.feed({wire.data() + pos, n});
    pos += n;
    for (auto& e : dec.drain()) ev.push_back(std::move(e));
  }
  dec.finish();
  for (auto& e : dec.drain()) ev.push_back(std::move(e));
  EXPECT_TRUE(errors_of(ev).empty());
  EXPECT_EQ(frames_of(ev), sent);
}

TEST(Decoder, FlippedPayloadByteThenRecovery) {
  std::mt19937_64 rng(33);
  std::vector<EncryptedFrame> sent;
  std::vector<std::uint8_t> wire;
  for (int k = 0; k < 3; ++k) {
    sent.push_back(random_frame(rng, 300));
    sent.back().payload.resize(300);
    const auto b = encode_frame(sent.back());
    wire.insert(wire.end(), b.begin(), b.end());
  }
  wire[327 + 40] ^= 0xFF;  // inside the second frame's payload
  const auto ev = decode_frames(wire);
  const auto errs = errors_of(ev);
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_EQ(errs[0].kind, DecodeErrorKind::CrcMismatch);
  EXPECT_EQ(errs[0].offset, 327u);
  const auto got = frames_of(ev);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0], sent[0]);
  EXPECT_EQ(got[1], sent[2]);
}

TEST(Decoder, GarbagePrefix) {
  std::vector<std::uint8_t> wire{1, 2, 3, 'E', 'C', 9, 9};
  const auto frame = encode_frame(std::vector<std::uint8_t>{7, 7}, 2, 3);
  wire.insert(wire.end(), frame.begin(), frame.end());
  const auto ev = decode_frames(wire);
  ASSERT_EQ(ev.size(), 2u);
  const auto& e = std::get<DecodeError>(ev[0]);
  EXPECT_EQ(e.kind, DecodeErrorKind::BadMagic);
  EXPECT_EQ(e.skipped, 7u);
  EXPECT_EQ(e.offset, 0u);
  EXPECT_EQ(std::get<EncryptedFrame>(ev[1]).seq, 2u);
}

TEST(Decoder, MagicCorruptionLosesOnlyThatFrame) {
  std::mt19937_64 rng(34);
  for (std::size_t byte = 0; byte < 4; ++byte) {
    for (int bit = 0; bit < 8; ++bit) {
      std::vector<EncryptedFrame> sent;
      std::vector<std::uint8_t> wire;
      for (int k = 0; k < 3; ++k) {
        sent.push_back(random_frame(rng, 50));
        const auto b = encode_frame(sent.back());
        wire.insert(wire.end(), b.begin(), b.end());
      }
      const std::size_t second = encode_frame(sent[0]).size();
      wire[second + byte] ^= static_cast<std::uint8_t>(1u << bit);
      const auto ev = decode_frames(wire);
      const auto errs = errors_of(ev);
      ASSERT_EQ(errs.size(), 1u);
      EXPECT_EQ(errs[0].kind, DecodeErrorKind::BadMagic);
      const auto got = frames_of(ev);
      ASSERT_EQ(got.size(), 2u);
      EXPECT_EQ(got[0], sent[0]);
      EXPECT_EQ(got[1], sent[2]);
    }
  }
}

TEST(Decoder, TruncatedTail) {
  const auto a = encode_frame(std::vector<std::uint8_t>(10, 1), 0, 0);
  auto wire = a;
  const auto b = encode_frame(std::vector<std::uint8_t>(10, 2), 1, 1);
  wire.insert(wire.end(), b.begin(), b.begin() + 15);
  const auto ev = decode_frames(wire);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(std::get<EncryptedFrame>(ev[0]).seq, 0u);
  const auto& e = std::get<DecodeError>(ev[1]);
  EXPECT_EQ(e.kind, DecodeErrorKind::Truncated);
  EXPECT_EQ(e.offset, a.size());
}

TEST(Decoder, UnsupportedVersion) {
  auto bytes = encode_frame(std::vector<std::uint8_t>{1, 2}, 0, 0);
  bytes[4] = 2;
  // Recompute the trailer so only the version is wrong.
  const auto crc = crc32({bytes.data(), bytes.size() - 4});
  for (int i = 0; i < 4; ++i) bytes[bytes.size() - 4 + i] = static_cast<std::uint8_t>(crc >> (24 - 8 * i));
  const auto errs = errors_of(decode_frames(bytes));
  ASSERT_FALSE(errs.empty());
  EXPECT_EQ(errs[0].kind, DecodeErrorKind::UnsupportedVersion);
}

TEST(DecoderProperty, SingleBitFlipsAlwaysDetected) {
  std::mt19937_64 rng(35);
  for (int t = 0; t < 300; ++t) {
    const auto f = random_frame(rng, 400);
    auto bytes = encode_frame(f);
    const std::size_t pos = 4 + rng() % (bytes.size() - 4);
    bytes[pos] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
    const auto ev = decode_frames(bytes);
    EXPECT_TRUE(frames_of(ev).empty());
    ASSERT_FALSE(errors_of(ev).empty());
  }
}

TEST(DecoderProperty, NeverEmitsUnvalidatedFrames) {
  std::mt19937_64 rng(36);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::uint8_t> wire;
    for (int k = 0; k < 5; ++k) {
      const auto b = encode_frame(random_frame(rng, 64));
      wire.insert(wire.end(), b.begin(), b.end());
    }
    for (int k = 0; k < 6; ++k) wire[rng() % wire.size()] = static_cast<std::uint8_t>(rng());
    for (const auto& f : frames_of(decode_frames(wire))) {
      const auto re = encode_frame(f);
      // The emitted frame must occur verbatim in the wire bytes.
      EXPECT_NE(std::search(wire.begin(), wire.end(), re.begin(), re.end()), wire.end());
    }
  }
}

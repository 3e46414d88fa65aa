#include "ecgsec/transport.hpp"

#include <algorithm>
#include <string>

#include <zlib.h>

#include "ecgsec/error.hpp"

namespace ecgsec {

namespace {

void put_be(std::uint8_t* p, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * (bytes - 1 - i)));
}

std::uint64_t get_be(const std::uint8_t* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v = (v << 8) | p[i];
  return v;
}

constexpr std::size_t kSeqOffset = 5;
constexpr std::size_t kTimestampOffset = 13;
constexpr std::size_t kLengthOffset = 21;

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> data) noexcept {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, data.data(), static_cast<uInt>(data.size()));
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_frame(std::span<const std::uint8_t> payload,
                                       std::uint64_t seq, std::uint64_t timestamp_ms) {
  if (payload.size() > kMaxPayload) {
    throw PayloadTooLarge("frame payload of " + std::to_string(payload.size()) +
                          " bytes exceeds 65535");
  }
  std::vector<std::uint8_t> out(kFrameOverhead + payload.size());
  std::uint8_t* p = out.data();
  std::copy(kFrameMagic.begin(), kFrameMagic.end(), p);
  p[4] = kFrameVersion;
  put_be(p + kSeqOffset, seq, 8);
  put_be(p + kTimestampOffset, timestamp_ms, 8);
  put_be(p + kLengthOffset, payload.size(), 2);
  std::copy(payload.begin(), payload.end(), p + kFrameHeaderSize);
  const std::size_t body = kFrameHeaderSize + payload.size();
  put_be(p + body, crc32({p, body}), 4);
  return out;
}

std::vector<std::uint8_t> encode_frame(const EncryptedFrame& frame) {
  return encode_frame(frame.payload, frame.seq, frame.timestamp_ms);
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
  scan(false);
}

void FrameDecoder::finish() {
  scan(true);
  flush_skip();
}

DecodeEvent FrameDecoder::pop_event() {
  DecodeEvent e = std::move(events_.front());
  events_.pop_front();
  return e;
}

std::vector<DecodeEvent> FrameDecoder::drain() {
  std::vector<DecodeEvent> out(std::make_move_iterator(events_.begin()),
                               std::make_move_iterator(events_.end()));
  events_.clear();
  return out;
}

void FrameDecoder::flush_skip() {
  if (pending_skip_ == 0) return;
  if (!resyncing_) {
    events_.push_back(DecodeError{DecodeErrorKind::BadMagic, skip_start_, pending_skip_, 0});
  }
  pending_skip_ = 0;
}

void FrameDecoder::discard(std::size_t n) {
  head_ += n;
  if (head_ >= 65536 && head_ * 2 >= buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(head_));
    base_offset_ += head_;
    head_ = 0;
  }
}

void FrameDecoder::scan(bool at_end) {
  auto skip = [&](std::size_t n) {
    if (n == 0) return;
    if (pending_skip_ == 0) skip_start_ = base_offset_ + head_;
    pending_skip_ += n;
    discard(n);
  };

  while (head_ < buffer_.size()) {
    const auto begin = buffer_.begin() + static_cast<std::ptrdiff_t>(head_);
    const auto it = std::search(begin, buffer_.end(), kFrameMagic.begin(), kFrameMagic.end());
    if (it == buffer_.end()) {
      // Keep a possible partial magic at the tail unless the stream is over.
      const std::size_t avail = buffer_.size() - head_;
      const std::size_t keep = at_end ? 0 : std::min<std::size_t>(avail, kFrameMagic.size() - 1);
      skip(avail - keep);
      return;
    }
    skip(static_cast<std::size_t>(it - begin));

    const std::size_t avail = buffer_.size() - head_;
    const std::uint8_t* p = buffer_.data() + head_;
    const std::uint64_t offset = base_offset_ + head_;
    std::size_t frame_len = 0;
    if (avail >= kFrameHeaderSize) {
      frame_len = kFrameOverhead + static_cast<std::size_t>(get_be(p + kLengthOffset, 2));
    }
    if (avail < kFrameHeaderSize || avail < frame_len) {
      if (!at_end) return;
      flush_skip();
      // Only a candidate with no further magic behind it is a partial trailing
      // frame. Otherwise its length field is damaged and it fails integrity.
      const bool trailing =
          std::search(buffer_.begin() + static_cast<std::ptrdiff_t>(head_ + 1), buffer_.end(), kFrameMagic.begin(), kFrameMagic.end()) ==
          buffer_.end();
      const std::uint64_t claimed = avail >= kFrameHeaderSize ? get_be(p + kSeqOffset, 8) : 0;
      if (trailing) {
        events_.push_back(DecodeError{DecodeErrorKind::Truncated, offset, avail, claimed});
      } else {
        events_.push_back(DecodeError{DecodeErrorKind::CrcMismatch, offset, 0, claimed});
      }
      resyncing_ = true;
      discard(1);
      continue;
    }

    const std::size_t body = frame_len - kFrameTrailerSize;
    const auto stored = static_cast<std::uint32_t>(get_be(p + body, 4));
    const std::uint64_t seq = get_be(p + kSeqOffset, 8);
    if (crc32({p, body}) != stored) {
      flush_skip();
      events_.push_back(DecodeError{DecodeErrorKind::CrcMismatch, offset, 0, seq});
      resyncing_ = true;
      discard(1);
      continue;
    }
    if (p[4] != kFrameVersion) {
      flush_skip();
      events_.push_back(DecodeError{DecodeErrorKind::UnsupportedVersion, offset, frame_len, seq});
      resyncing_ = false;
      discard(frame_len);
      continue;
    }

    flush_skip();
    EncryptedFrame frame;
    frame.seq = seq;
    frame.timestamp_ms = get_be(p + kTimestampOffset, 8);
    frame.payload.assign(p + kFrameHeaderSize, p + body);
    events_.push_back(std::move(frame));
    resyncing_ = false;
    discard(frame_len);
  }
}

std::vector<DecodeEvent> decode_frames(std::span<const std::uint8_t> bytes) {
  FrameDecoder decoder;
  decoder.feed(bytes);
  decoder.finish();
  return decoder.drain();
}

}  // namespace ecgsec

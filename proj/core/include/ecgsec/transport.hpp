#pragma once

// Framed wire format for encrypted segments.
//
//   offset  size  field
//   0       4     magic "ECGX"
//   4       1     version (1)
//   5       8     seq, big-endian
//   13      8     timestamp_ms, big-endian
//   21      2     payload_len, big-endian
//   23      n     payload (ciphertext)
//   23+n    4     CRC32 (IEEE, reflected) of bytes [0, 23+n), big-endian
//
// A .ecgx file is a plain concatenation of frames.

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <variant>
#include <vector>

namespace ecgsec {

inline constexpr std::array<std::uint8_t, 4> kFrameMagic{'E', 'C', 'G', 'X'};
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 23;
inline constexpr std::size_t kFrameTrailerSize = 4;
inline constexpr std::size_t kFrameOverhead = kFrameHeaderSize + kFrameTrailerSize;
inline constexpr std::size_t kMaxPayload = 65535;

std::uint32_t crc32(std::span<const std::uint8_t> data) noexcept;

struct EncryptedFrame {
  std::uint64_t seq = 0;
  std::uint64_t timestamp_ms = 0;
  std::vector<std::uint8_t> payload;

  bool operator==(const EncryptedFrame&) const = default;
};

/// Throws PayloadTooLarge above 65535 bytes.
std::vector<std::uint8_t> encode_frame(std::span<const std::uint8_t> payload,
                                       std::uint64_t seq, std::uint64_t timestamp_ms);
std::vector<std::uint8_t> encode_frame(const EncryptedFrame& frame);

enum class DecodeErrorKind { BadMagic, CrcMismatch, Truncated, UnsupportedVersion };

struct DecodeError {
  DecodeErrorKind kind;
  std::uint64_t offset = 0;   // stream offset where the problem starts
  std::uint64_t skipped = 0;  // bytes discarded (BadMagic, Truncated)
  /// seq field as read from the damaged header (unreliable for CrcMismatch).
  std::uint64_t claimed_seq = 0;
};

using DecodeEvent = std::variant<EncryptedFrame, DecodeError>;

/// Incremental scanner. Bytes are fed in arbitrary chunks; events come out in
/// stream order. Frames are only emitted when their CRC validates. After a
/// CRC failure scanning restarts one byte past the failed magic, and the
/// bytes skipped to reach the next magic are attributed to that failure.
/// In front of a valid frame, non-magic bytes produce one BadMagic event
/// carrying the skip count.
class FrameDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);

  /// End of stream: an incomplete candidate becomes Truncated when nothing
  /// frame-like follows it (CrcMismatch otherwise), then
  /// the rest of the buffer is rescanned for complete frames.
  void finish();

  bool has_event() const noexcept { return !events_.empty(); }
  DecodeEvent pop_event();
  std::vector<DecodeEvent> drain();

 private:
  void scan(bool at_end);
  void flush_skip();
  void discard(std::size_t n);

  std::vector<std::uint8_t> buffer_;
  std::size_t head_ = 0;          // first unconsumed byte in buffer_
  std::uint64_t base_offset_ = 0; // stream offset of buffer_[0]
  std::uint64_t pending_skip_ = 0;
  std::uint64_t skip_start_ = 0;
  bool resyncing_ = false;
  std::deque<DecodeEvent> events_;
};

/// Whole-buffer convenience wrapper.
std::vector<DecodeEvent> decode_frames(std::span<const std::uint8_t> bytes);

}  // namespace ecgsec

#pragma once

// Real-time chain: segment -> encrypt -> frame | decode -> decrypt -> filter
// -> detect -> normalize -> extract beats -> classify.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ecgsec/beat_processing.hpp"
#include "ecgsec/chaotic_cipher.hpp"
#include "ecgsec/inference.hpp"
#include "ecgsec/signal_ingest.hpp"
#include "ecgsec/transport.hpp"

namespace ecgsec {

/// Sender side: one apply_stream per segment (keystream reset per segment).
class SegmentEncryptor {
 public:
  SegmentEncryptor(const ChaoticKey& key, const CipherConfig& config);

  EncryptedFrame encrypt(const Segment& segment) const;

 private:
  ChaoticKey key_;
  CipherConfig config_;
};

struct BeatResult {
  std::size_t r_index = 0;  // absolute sample index in the stream
  ClassProbs probs;
};

struct SegmentResult {
  std::uint64_t seq = 0;
  std::uint64_t timestamp_ms = 0;
  std::vector<std::size_t> detected;  // every R peak found in the segment
  std::vector<BeatResult> beats;      // peaks whose 180-window fit
  bool degenerate = false;
  double latency_ms = 0.0;            // decrypt + filter/normalize + classify
  std::array<CenteredSample, kSegmentLength> decrypted{};
};

/// Receiver side. Keeps the previous decrypted segment as filter context and
/// the detector state across segments; segments must arrive in order.
class SegmentProcessor {
 public:
  SegmentProcessor(const ChaoticKey& key, const CipherConfig& config,
                   const ModelWeights& weights, double fs_hz);

  /// Throws LengthMismatch unless the payload holds exactly 300 bytes.
  SegmentResult process(const EncryptedFrame& frame);

  /// Same chain on an already-decrypted segment (no cipher step).
  SegmentResult process_plain(std::uint64_t seq, std::uint64_t timestamp_ms,
                              std::span<const CenteredSample> samples);

 private:
  ChaoticKey key_;
  CipherConfig config_;
  ModelWeights weights_;
  double fs_hz_;
  RPeakDetector detector_;
  std::optional<std::array<CenteredSample, kSegmentLength>> previous_;
};

struct PipelineStats {
  std::uint64_t segments_processed = 0;
  std::uint64_t beats_classified = 0;
  std::uint64_t degenerate_segments = 0;
  std::uint64_t frame_errors = 0;
  std::vector<double> latencies_ms;
  std::array<std::uint64_t, kNumClasses> class_histogram{};

  void record(const SegmentResult& result);
  double mean_latency_ms() const noexcept;
  double max_latency_ms() const noexcept;
};

}  // namespace ecgsec

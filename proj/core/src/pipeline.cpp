#include "ecgsec/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <string>

#include "ecgsec/error.hpp"

namespace ecgsec {

SegmentEncryptor::SegmentEncryptor(const ChaoticKey& key, const CipherConfig& config)
    : key_(key), config_(config) {
  config_.validate();
}

EncryptedFrame SegmentEncryptor::encrypt(const Segment& segment) const {
  const auto wire = segment.wire_bytes();
  EncryptedFrame frame;
  frame.seq = segment.seq;
  frame.timestamp_ms = segment.timestamp_ms;
  frame.payload = apply_stream(wire, key_, config_);
  return frame;
}

SegmentProcessor::SegmentProcessor(const ChaoticKey& key, const CipherConfig& config,
                                   const ModelWeights& weights, double fs_hz)
    : key_(key), config_(config), weights_(weights), fs_hz_(fs_hz), detector_(fs_hz) {
  config_.validate();
  weights_.validate();
  if (weights_.shape.input_len != kBeatLength) {
    throw ShapeMismatch("architecture", "pipeline classifier needs input_len 180");
  }
}

SegmentResult SegmentProcessor::process(const EncryptedFrame& frame) {
  if (frame.payload.size() != kSegmentLength) {
    throw LengthMismatch("frame " + std::to_string(frame.seq) + " carries " +
                         std::to_string(frame.payload.size()) + " bytes, expected 300");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto plain = apply_stream(frame.payload, key_, config_);
  std::array<CenteredSample, kSegmentLength> samples{};
  std::transform(plain.begin(), plain.end(), samples.begin(), from_wire_byte);
  SegmentResult result = process_plain(frame.seq, frame.timestamp_ms, samples);
  result.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SegmentResult SegmentProcessor::process_plain(std::uint64_t seq, std::uint64_t timestamp_ms,
                                              std::span<const CenteredSample> samples) {
  if (samples.size() != kSegmentLength) {
    throw LengthMismatch("segment must hold exactly 300 samples");
  }
  const auto start = std::chrono::steady_clock::now();
  SegmentResult result;
  result.seq = seq;
  result.timestamp_ms = timestamp_ms;
  std::copy(samples.begin(), samples.end(), result.decrypted.begin());

  std::vector<double> values(samples.begin(), samples.end());
  std::vector<double> context;
  if (previous_) context.assign(previous_->begin(), previous_->end());
  const auto filtered = filter_with_context(values, context, fs_hz_);
  previous_ = result.decrypted;

  const std::size_t base = static_cast<std::size_t>(seq) * kSegmentLength;
  result.detected = detector_.process(filtered, base);

  try {
    const auto norm = normalize(filtered, seq);
    for (std::size_t r : result.detected) {
      const std::size_t local = r - base;
      try {
        const Beat beat = extract_beat(norm.values, local, seq);
        result.beats.push_back({r, forward(beat, weights_)});
      } catch (const OutOfBounds&) {
        // window crosses the segment boundary; skipped
      }
    }
  } catch (const DegenerateSegment&) {
    result.degenerate = true;
  }
  result.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void PipelineStats::record(const SegmentResult& result) {
  ++segments_processed;
  if (result.degenerate) ++degenerate_segments;
  beats_classified += result.beats.size();
  for (const auto& b : result.beats) ++class_histogram[static_cast<std::size_t>(b.probs.label)];
  latencies_ms.push_back(result.latency_ms);
}

double PipelineStats::mean_latency_ms() const noexcept {
  if (latencies_ms.empty()) return 0.0;
  return std::accumulate(latencies_ms.begin(), latencies_ms.end(), 0.0) /
         static_cast<double>(latencies_ms.size());
}

double PipelineStats::max_latency_ms() const noexcept {
  if (latencies_ms.empty()) return 0.0;
  return *std::max_element(latencies_ms.begin(), latencies_ms.end());
}

}  // namespace ecgsec

#pragma once

// Sample acquisition: synthetic ECG generation, file replay standing in for
// the serial preamplifier, midscale centering and 300-sample segmentation.

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace ecgsec {

using RawSample = std::uint8_t;      // ADC count, 0..255
using CenteredSample = std::int8_t;  // raw - 128, -128..127

inline constexpr std::size_t kSegmentLength = 300;
inline constexpr double kDefaultSampleRateHz = 500.0;

constexpr CenteredSample center(RawSample raw) noexcept {
  return static_cast<CenteredSample>(static_cast<int>(raw) - 128);
}

constexpr RawSample uncenter(CenteredSample s) noexcept {
  return static_cast<RawSample>(static_cast<int>(s) + 128);
}

/// Two's-complement byte of a centered sample; this is what gets encrypted.
constexpr std::uint8_t to_wire_byte(CenteredSample s) noexcept {
  return static_cast<std::uint8_t>(s);
}

constexpr CenteredSample from_wire_byte(std::uint8_t b) noexcept {
  return static_cast<CenteredSample>(b);
}

struct Segment {
  std::uint64_t seq = 0;
  std::uint64_t timestamp_ms = 0;
  std::array<CenteredSample, kSegmentLength> samples{};

  std::array<std::uint8_t, kSegmentLength> wire_bytes() const noexcept;
  bool operator==(const Segment&) const = default;
};

/// round(seq * 300 * 1000 / fs).
std::uint64_t segment_timestamp_ms(std::uint64_t seq, double fs_hz);

/// Groups raw samples into centered segments. A trailing partial group is
/// held and never emitted.
class Segmenter {
 public:
  explicit Segmenter(double fs_hz = kDefaultSampleRateHz);

  std::optional<Segment> push(RawSample raw);
  std::size_t pending() const noexcept { return fill_; }
  std::uint64_t emitted() const noexcept { return next_seq_; }

 private:
  double fs_hz_;
  std::uint64_t next_seq_ = 0;
  std::size_t fill_ = 0;
  std::array<CenteredSample, kSegmentLength> buffer_{};
};

std::vector<Segment> segmentize(std::span<const RawSample> stream,
                                double fs_hz = kDefaultSampleRateHz);

// --- synthetic ECG ----------------------------------------------------------

/// One Gaussian bump of a beat, positioned relative to the R peak.
struct WaveComponent {
  double offset_s;
  double width_s;    // standard deviation
  double amplitude;  // relative to the R wave (1.0)
};

using BeatMorphology = std::vector<WaveComponent>;

/// P, Q, R, S, T of a normal sinus beat.
const BeatMorphology& normal_morphology();

/// Adds one beat centred at r_index (samples, may be fractional) into signal,
/// scaled by gain. Only samples within 5 widths of each component are touched.
void add_beat(std::span<double> signal, double r_index, double fs_hz,
              const BeatMorphology& morphology, double gain);

struct SynthConfig {
  double fs_hz = kDefaultSampleRateHz;
  double heart_rate_bpm = 72.0;
  double noise_std = 2.0;  // counts
  std::uint64_t seed = 1;
  double duration_s = 10.0;

  void validate() const;
};

struct SynthResult {
  std::vector<RawSample> samples;
  std::vector<std::size_t> rpeaks;  // exact R sample indices used
};

/// s(t) = V_ECG(t) + N(t): baseline 96 counts, R peaks at +96 (clean signal
/// spans about [64, 192]), seeded Gaussian noise, rounded and clamped.
/// Beats are placed every 60/bpm seconds, the first at half an RR interval.
SynthResult synth_ecg(const SynthConfig& config);

inline constexpr double kSynthBaseline = 96.0;
inline constexpr double kSynthGain = 96.0;

// --- sources ----------------------------------------------------------------

/// Pull-based sample stream; one consumer.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  /// Next sample, or nullopt at end of stream. Throws IoError on read failure.
  virtual std::optional<RawSample> next() = 0;
};

class MemorySource final : public SampleSource {
 public:
  explicit MemorySource(std::vector<RawSample> samples);
  std::optional<RawSample> next() override;

 private:
  std::vector<RawSample> samples_;
  std::size_t pos_ = 0;
};

/// Reads a headerless one-byte-per-sample file. When paced, sample i is not
/// delivered before start + i / fs of wall-clock time.
class FileReplaySource final : public SampleSource {
 public:
  FileReplaySource(const std::filesystem::path& path, double fs_hz, bool paced);
  std::optional<RawSample> next() override;

 private:
  bool refill();

  std::filesystem::path path_;
  std::ifstream in_;
  double fs_hz_;
  bool paced_;
  std::vector<char> buffer_;
  std::size_t pos_ = 0;
  std::size_t len_ = 0;
  std::uint64_t delivered_ = 0;
  std::chrono::steady_clock::time_point start_{};
};

/// Throws FileNotFound if the file does not exist.
std::unique_ptr<SampleSource> replay(const std::filesystem::path& path,
                                     double fs_hz, bool paced);

// --- file formats -----------------------------------------------------------

void write_signal_file(const std::filesystem::path& path,
                       std::span<const RawSample> samples);
std::vector<RawSample> read_signal_file(const std::filesystem::path& path);

/// One decimal index per line, newline-terminated.
void write_rpeaks_file(const std::filesystem::path& path,
                       std::span<const std::size_t> rpeaks);
std::vector<std::size_t> read_rpeaks_file(const std::filesystem::path& path);

}  // namespace ecgsec

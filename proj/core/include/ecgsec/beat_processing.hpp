#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

namespace ecgsec {

inline constexpr std::size_t kBeatLength = 180;
inline constexpr std::size_t kBeatLead = 90;  // samples before the R peak

/// Baseline pole cutoff of the DC blocker stage.
inline constexpr double kBaselineCutoffHz = 0.5;

/// 5-point centred moving average (shrunken windows at the edges) followed by
/// a first-difference DC blocker y[n] = z[n] - z[n-1] + a*y[n-1] with
/// a = exp(-2*pi*0.5/fs) and z[-1] = z[0]. Length preserving.
std::vector<double> bandpass_filter(std::span<const double> values,
                                    double fs_hz);

/// Filters [context, current] as one sequence and returns the part aligned
/// with current, so the baseline stage has settled by the time current starts.
std::vector<double> filter_with_context(std::span<const double> current,
                                        std::span<const double> context, double fs_hz);

struct NormalizedSegment {
  std::vector<double> values;
  std::uint64_t source_seq = 0;
};

/// z-score with population standard deviation. Throws DomainError for fewer
/// than two values and DegenerateSegment when std < 1e-12.
NormalizedSegment normalize(std::span<const double> values,
                            std::uint64_t source_seq = 0);

/// Adaptive-threshold R-peak detector with a 200 ms refractory period.
///
/// A candidate is an interior local maximum (x[i] > x[i-1], x[i] >= x[i+1])
/// above the threshold. The threshold starts at 0.6 * max of the first 2 s
/// seen and afterwards is 0.5 * mean of the last 8 accepted amplitudes. A
/// candidate inside the refractory window of the previous peak replaces it
/// only if larger. State carries across process() calls so a stream can be
/// fed segment by segment.
class RPeakDetector {
 public:
  static constexpr std::size_t kAmplitudeWindow = 8;

  explicit RPeakDetector(double fs_hz);

  /// Peaks in chunk, as absolute indices (base_index + local index). Indices
  /// of peaks replaced later by a larger refractory neighbour in a following
  /// chunk are not retracted; use detect_rpeaks for whole-signal detection.
  std::vector<std::size_t> process(std::span<const double> chunk,
                                   std::size_t base_index);

  double threshold() const noexcept;
  std::size_t refractory_samples() const noexcept { return refractory_; }

 private:
  double fs_hz_;
  std::size_t refractory_;
  bool initialized_ = false;
  double initial_threshold_ = 0.0;
  std::deque<double> amplitudes_;
  bool have_last_ = false;
  std::size_t last_index_ = 0;
  double last_amplitude_ = 0.0;
};

/// Strictly increasing R-peak indices over a whole signal.
std::vector<std::size_t> detect_rpeaks(std::span<const double> values,
                                       double fs_hz);

struct Beat {
  std::array<double, kBeatLength> samples{};
  std::size_t r_index = 0;  // absolute when produced by the pipeline
  std::uint64_t source_seq = 0;
};

/// values[r_index - 90, r_index + 90). Throws OutOfBounds when the window does
/// not fit; nothing is padded.
Beat extract_beat(std::span<const double> values, std::size_t r_index,
                  std::uint64_t source_seq = 0);

}  // namespace ecgsec

#include "ecgsec/beat_processing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "ecgsec/error.hpp"

namespace ecgsec {

std::vector<double> bandpass_filter(std::span<const double> values, double fs_hz) {
  if (!(fs_hz > 0.0)) throw DomainError("bandpass_filter: fs must be positive");
  const std::size_t n = values.size();
  std::vector<double> smooth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= 2 ? i - 2 : 0;
    const std::size_t hi = std::min(n - 1, i + 2);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += values[j];
    smooth[i] = sum / static_cast<double>(hi - lo + 1);
  }

  const double pole = std::exp(-2.0 * std::numbers::pi * kBaselineCutoffHz / fs_hz);
  std::vector<double> out(n);
  double prev_in = n ? smooth[0] : 0.0;
  double prev_out = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    prev_out = smooth[i] - prev_in + pole * prev_out;
    prev_in = smooth[i];
    out[i] = prev_out;
  }
  return out;
}

std::vector<double> filter_with_context(std::span<const double> current,
                                        std::span<const double> context, double fs_hz) {
  if (context.empty()) return bandpass_filter(current, fs_hz);
  std::vector<double> joined(context.begin(), context.end());
  joined.insert(joined.end(), current.begin(), current.end());
  auto filtered = bandpass_filter(joined, fs_hz);
  return {filtered.begin() + static_cast<std::ptrdiff_t>(context.size()), filtered.end()};
}

NormalizedSegment normalize(std::span<const double> values, std::uint64_t source_seq) {
  if (values.size() < 2) throw DomainError("normalize needs at least two values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  if (sd < 1e-12) throw DegenerateSegment("segment has zero variance");
  NormalizedSegment out{std::vector<double>(values.size()), source_seq};
  std::transform(values.begin(), values.end(), out.values.begin(),
                 [&](double v) { return (v - mean) / sd; });
  return out;
}

RPeakDetector::RPeakDetector(double fs_hz)
    : fs_hz_(fs_hz),
      refractory_(static_cast<std::size_t>(std::llround(0.2 * fs_hz))) {
  if (!(fs_hz > 0.0)) throw DomainError("RPeakDetector: fs must be positive");
}

double RPeakDetector::threshold() const noexcept {
  if (amplitudes_.empty()) return initial_threshold_;
  const double sum = std::accumulate(amplitudes_.begin(), amplitudes_.end(), 0.0);
  return 0.5 * sum / static_cast<double>(amplitudes_.size());
}

std::vector<std::size_t> RPeakDetector::process(std::span<const double> chunk,
                                                std::size_t base_index) {
  std::vector<std::size_t> peaks;
  if (chunk.empty()) return peaks;
  if (!initialized_) {
    const auto init_len = std::min<std::size_t>(
        chunk.size(), static_cast<std::size_t>(std::llround(2.0 * fs_hz_)));
    initial_threshold_ = 0.6 * *std::max_element(chunk.begin(), chunk.begin() + init_len);
    initialized_ = true;
  }

  for (std::size_t i = 1; i + 1 < chunk.size(); ++i) {
    const double v = chunk[i];
    if (!(v > chunk[i - 1] && v >= chunk[i + 1])) continue;
    const std::size_t abs_index = base_index + i;
    const bool in_refractory = have_last_ && abs_index - last_index_ < refractory_;
    if (in_refractory) {
      if (v <= last_amplitude_) continue;
      // Larger peak inside the refractory window replaces the previous one.
      // The threshold it must clear is the one the replaced peak faced.
      amplitudes_.pop_back();
      if (!(v > threshold())) {
        amplitudes_.push_back(last_amplitude_);
        continue;
      }
      amplitudes_.push_back(v);
      if (!peaks.empty() && peaks.back() == last_index_) peaks.pop_back();
      peaks.push_back(abs_index);
      last_index_ = abs_index;
      last_amplitude_ = v;
      continue;
    }
    if (!(v > threshold())) continue;
    peaks.push_back(abs_index);
    amplitudes_.push_back(v);
    if (amplitudes_.size() > kAmplitudeWindow) amplitudes_.pop_front();
    have_last_ = true;
    last_index_ = abs_index;
    last_amplitude_ = v;
  }
  return peaks;
}

std::vector<std::size_t> detect_rpeaks(std::span<const double> values, double fs_hz) {
  RPeakDetector detector(fs_hz);
  return detector.process(values, 0);
}

Beat extract_beat(std::span<const double> values, std::size_t r_index,
                  std::uint64_t source_seq) {
  if (r_index < kBeatLead || r_index + (kBeatLength - kBeatLead) > values.size()) {
    throw OutOfBounds("beat window around index " + std::to_string(r_index) +
                      " does not fit in " + std::to_string(values.size()) + " samples");
  }
  Beat beat;
  std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(r_index - kBeatLead), kBeatLength,
              beat.samples.begin());
  beat.r_index = r_index;
  beat.source_seq = source_seq;
  return beat;
}

}  // namespace ecgsec

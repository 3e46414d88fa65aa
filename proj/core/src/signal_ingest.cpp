#include "ecgsec/signal_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "ecgsec/error.hpp"

namespace ecgsec {

std::array<std::uint8_t, kSegmentLength> Segment::wire_bytes() const noexcept {
  std::array<std::uint8_t, kSegmentLength> out{};
  std::transform(samples.begin(), samples.end(), out.begin(), to_wire_byte);
  return out;
}

std::uint64_t segment_timestamp_ms(std::uint64_t seq, double fs_hz) {
  return static_cast<std::uint64_t>(
      std::llround(static_cast<double>(seq) * kSegmentLength * 1000.0 / fs_hz));
}

Segmenter::Segmenter(double fs_hz) : fs_hz_(fs_hz) {
  if (!(fs_hz > 0.0) || !std::isfinite(fs_hz)) {
    throw ConfigError("sample rate must be positive");
  }
}

std::optional<Segment> Segmenter::push(RawSample raw) {
  buffer_[fill_++] = center(raw);
  if (fill_ < kSegmentLength) return std::nullopt;
  Segment seg;
  seg.seq = next_seq_;
  seg.timestamp_ms = segment_timestamp_ms(next_seq_, fs_hz_);
  seg.samples = buffer_;
  ++next_seq_;
  fill_ = 0;
  return seg;
}

std::vector<Segment> segmentize(std::span<const RawSample> stream, double fs_hz) {
  Segmenter segmenter(fs_hz);
  std::vector<Segment> out;
  out.reserve(stream.size() / kSegmentLength);
  for (RawSample s : stream) {
    if (auto seg = segmenter.push(s)) out.push_back(*seg);
  }
  return out;
}

// --- synthetic ECG ----------------------------------------------------------

const BeatMorphology& normal_morphology() {
  static const BeatMorphology kNormal{
      {-0.200, 0.025, 0.10},   // P
      {-0.025, 0.010, -0.12},  // Q
      {0.000, 0.010, 1.00},    // R
      {0.030, 0.010, -0.33},   // S
      {0.250, 0.040, 0.25},    // T
  };
  return kNormal;
}

void add_beat(std::span<double> signal, double r_index, double fs_hz,
              const BeatMorphology& morphology, double gain) {
  const auto n = static_cast<std::ptrdiff_t>(signal.size());
  for (const auto& w : morphology) {
    const double c = r_index + w.offset_s * fs_hz;
    const double sigma = w.width_s * fs_hz;
    const double reach = 5.0 * sigma;
    const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::floor(c - reach)));
    const auto hi = std::min<std::ptrdiff_t>(n - 1, static_cast<std::ptrdiff_t>(std::ceil(c + reach)));
    for (auto i = lo; i <= hi; ++i) {
      const double z = (static_cast<double>(i) - c) / sigma;
      signal[static_cast<std::size_t>(i)] += gain * w.amplitude * std::exp(-0.5 * z * z);
    }
  }
}

void SynthConfig::validate() const {
  if (!(fs_hz > 0.0) || !std::isfinite(fs_hz)) throw ConfigError("fs_hz must be positive");
  if (!(heart_rate_bpm >= 30.0 && heart_rate_bpm <= 220.0)) {
    throw ConfigError("heart_rate_bpm must lie in [30, 220]");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw ConfigError("noise_std must be non-negative");
  }
  if (!(duration_s >= 0.0) || duration_s > 86400.0) {
    throw ConfigError("duration_s must lie in [0, 86400]");
  }
}

SynthResult synth_ecg(const SynthConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(std::llround(config.duration_s * config.fs_hz));
  SynthResult result;
  if (n == 0) return result;

  std::vector<double> clean(n, 0.0);
  const double rr = config.fs_hz * 60.0 / config.heart_rate_bpm;
  for (std::size_t k = 0;; ++k) {
    const auto r = static_cast<std::size_t>(
        std::llround(0.5 * rr + static_cast<double>(k) * rr));
    if (r >= n) break;
    result.rpeaks.push_back(r);
    add_beat(clean, static_cast<double>(r), config.fs_hz, normal_morphology(), 1.0);
  }

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, config.noise_std > 0.0 ? config.noise_std : 1.0);
  result.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = kSynthBaseline + kSynthGain * clean[i];
    if (config.noise_std > 0.0) v += noise(rng);
    result.samples[i] = static_cast<RawSample>(std::clamp(std::round(v), 0.0, 255.0));
  }
  return result;
}

// --- sources ----------------------------------------------------------------

MemorySource::MemorySource(std::vector<RawSample> samples) : samples_(std::move(samples)) {}

std::optional<RawSample> MemorySource::next() {
  if (pos_ >= samples_.size()) return std::nullopt;
  return samples_[pos_++];
}

FileReplaySource::FileReplaySource(const std::filesystem::path& path, double fs_hz,
                                   bool paced)
    : path_(path), fs_hz_(fs_hz), paced_(paced), buffer_(4096) {
  if (!(fs_hz > 0.0)) throw ConfigError("replay sample rate must be positive");
  if (!std::filesystem::exists(path)) throw FileNotFound(path.string());
  in_.open(path, std::ios::binary);
  if (!in_) throw IoError("cannot open " + path.string());
}

bool FileReplaySource::refill() {
  if (!in_) return false;
  in_.read(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  if (in_.bad()) throw IoError("read error in " + path_.string());
  len_ = static_cast<std::size_t>(in_.gcount());
  pos_ = 0;
  return len_ > 0;
}

std::optional<RawSample> FileReplaySource::next() {
  if (pos_ >= len_ && !refill()) return std::nullopt;
  if (paced_) {
    if (delivered_ == 0) start_ = std::chrono::steady_clock::now();
    const auto due = start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                  std::chrono::duration<double>(static_cast<double>(delivered_) / fs_hz_));
    std::this_thread::sleep_until(due);
  }
  ++delivered_;
  return static_cast<RawSample>(buffer_[pos_++]);
}

std::unique_ptr<SampleSource> replay(const std::filesystem::path& path, double fs_hz,
                                     bool paced) {
  return std::make_unique<FileReplaySource>(path, fs_hz, paced);
}

// --- file formats -----------------------------------------------------------

void write_signal_file(const std::filesystem::path& path,
                       std::span<const RawSample> samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(samples.data()),
            static_cast<std::streamsize>(samples.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<RawSample> read_signal_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw FileNotFound(path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<RawSample> data((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error in " + path.string());
  return data;
}

void write_rpeaks_file(const std::filesystem::path& path,
                       std::span<const std::size_t> rpeaks) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (auto r : rpeaks) out << r << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::size_t> read_rpeaks_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw FileNotFound(path.string());
  std::ifstream in(path);
  std::vector<std::size_t> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": not an index");
    }
    out.push_back(value);
  }
  return out;
}

}  // namespace ecgsec

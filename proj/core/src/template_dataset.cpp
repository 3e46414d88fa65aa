#include <algorithm>
#include <cmath>
#include <random>

#include "ecgsec/beat_processing.hpp"
#include "ecgsec/error.hpp"
#include "ecgsec/inference.hpp"
#include "ecgsec/signal_ingest.hpp"

namespace ecgsec {

const BeatMorphology& class_morphology(BeatClass c) {
  static const BeatMorphology kLbbb{
      {-0.200, 0.025, 0.08},  // P
      {-0.022, 0.014, 0.60},  // notch
      {0.000, 0.018, 1.00},   // broad R
      {0.160, 0.040, -0.30},  // discordant T
  };
  static const BeatMorphology kRbbb{
      {-0.200, 0.025, 0.10},  // P
      {-0.036, 0.008, 0.45},  // r
      {-0.016, 0.008, -0.35}, // s
      {0.000, 0.012, 1.00},   // R'
      {0.036, 0.016, -0.25},  // slurred S
      {0.220, 0.040, 0.20},   // T
  };
  static const BeatMorphology kApc{
      {-0.110, 0.018, -0.14},  // early, inverted P'
      {-0.025, 0.010, -0.10},
      {0.000, 0.010, 1.00},
      {0.030, 0.010, -0.30},
      {0.220, 0.040, 0.20},
  };
  static const BeatMorphology kVpc{
      {0.000, 0.030, 1.00},   // wide R, no P
      {0.075, 0.030, -0.45},  // deep S
      {0.170, 0.045, -0.35},  // inverted T
  };
  switch (c) {
    case BeatClass::N: return normal_morphology();
    case BeatClass::LBBB: return kLbbb;
    case BeatClass::RBBB: return kRbbb;
    case BeatClass::APC: return kApc;
    case BeatClass::VPC: return kVpc;
  }
  throw DomainError("unknown beat class");
}

std::vector<LabeledBeat> make_template_dataset(const TemplateDatasetConfig& config) {
  if (!(config.fs_hz > 0.0)) throw ConfigError("fs_hz must be positive");
  if (!(config.noise_std >= 0.0)) throw ConfigError("noise_std must be non-negative");
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> gain_jitter(0.85, 1.15);
  std::uniform_real_distribution<double> width_jitter(0.9, 1.1);
  std::uniform_int_distribution<std::size_t> position(kBeatLead + 2, kSegmentLength - kBeatLead - 3);
  std::uniform_real_distribution<double> rr_samples(0.76 * config.fs_hz, 0.90 * config.fs_hz);
  std::uniform_int_distribution<int> index_jitter(-2, 2);
  std::normal_distribution<double> noise(0.0, config.noise_std > 0.0 ? config.noise_std : 1.0);

  std::vector<LabeledBeat> out;
  out.reserve(config.beats_per_class * kNumClasses);
  std::vector<double> record(2 * kSegmentLength);
  for (std::size_t i = 0; i < config.beats_per_class; ++i) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const BeatClass cls = beat_class_from_index(c);
      BeatMorphology morph = class_morphology(cls);
      const double wj = width_jitter(rng);
      for (auto& w : morph) w.width_s *= wj;

      std::fill(record.begin(), record.end(), 0.0);
      const std::size_t r_local = position(rng);
      const double r_abs = static_cast<double>(kSegmentLength + r_local);
      add_beat(record, r_abs - rr_samples(rng), config.fs_hz, normal_morphology(),
               gain_jitter(rng));
      add_beat(record, r_abs, config.fs_hz, morph, gain_jitter(rng));

      std::vector<double> centered(record.size());
      for (std::size_t k = 0; k < record.size(); ++k) {
        double v = kSynthBaseline + kSynthGain * record[k];
        if (config.noise_std > 0.0) v += noise(rng);
        centered[k] = static_cast<double>(
            center(static_cast<RawSample>(std::clamp(std::round(v), 0.0, 255.0))));
      }
      const std::span<const double> all(centered);
      const auto filtered = filter_with_context(all.subspan(kSegmentLength),
                                                all.first(kSegmentLength), config.fs_hz);
      const auto norm = normalize(filtered);
      const auto at = static_cast<std::size_t>(static_cast<int>(r_local) + index_jitter(rng));
      const Beat beat = extract_beat(norm.values, at);
      out.push_back({std::vector<double>(beat.samples.begin(), beat.samples.end()), cls});
    }
  }
  return out;
}

}  // namespace ecgsec

#pragma once

// 1D CNN beat classifier:
//   conv1d(filters x kernel, valid) -> ReLU -> dropout -> flatten
//   -> dense(hidden) + ReLU -> dense(5) -> softmax
// trained with categorical crossentropy and Adam.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ecgsec/beat_processing.hpp"
#include "ecgsec/signal_ingest.hpp"

namespace ecgsec {

inline constexpr std::size_t kNumClasses = 5;

enum class BeatClass : std::uint8_t { N = 0, LBBB, RBBB, APC, VPC };

std::string_view to_string(BeatClass c) noexcept;
BeatClass beat_class_from_index(std::size_t index);

struct ModelShape {
  std::size_t input_len = kBeatLength;
  std::size_t filters = 32;
  std::size_t kernel = 3;
  std::size_t hidden = 100;

  std::size_t conv_len() const noexcept { return input_len - kernel + 1; }
  std::size_t flat_len() const noexcept { return conv_len() * filters; }
  void validate() const;
  bool operator==(const ModelShape&) const = default;
};

/// All parameters, flat row-major:
///   conv_filters [filters][kernel][1], conv_bias [filters],
///   dense1_w [hidden][flat], dense1_b [hidden],
///   out_w [5][hidden], out_b [5].
/// Flatten order is channels-last: flat index = t * filters + f.
struct ModelWeights {
  ModelShape shape;
  std::vector<double> conv_filters;
  std::vector<double> conv_bias;
  std::vector<double> dense1_w;
  std::vector<double> dense1_b;
  std::vector<double> out_w;
  std::vector<double> out_b;

  static ModelWeights zeros(const ModelShape& shape = {});
  /// Glorot-uniform weights, zero biases.
  static ModelWeights glorot(const ModelShape& shape, std::uint64_t seed);

  /// Throws ShapeMismatch naming the offending tensor, or DomainError for a
  /// non-finite value.
  void validate() const;
  std::size_t parameter_count() const noexcept;

  bool operator==(const ModelWeights&) const = default;
};

struct ClassProbs {
  std::array<double, kNumClasses> probs{};
  BeatClass label = BeatClass::N;
};

ClassProbs softmax(std::span<const double, kNumClasses> logits);

struct ForwardOptions {
  bool training = false;
  double dropout_rate = 0.5;
  /// Mask seed; used only when training. Without one, training mode draws
  /// from a fixed default seed.
  std::optional<std::uint64_t> dropout_mask_seed;
};

/// Keep flags (1 = kept) for inverted dropout; each unit dropped with
/// probability rate.
std::vector<std::uint8_t> dropout_mask(std::size_t size, double rate,
                                       std::uint64_t seed);

ClassProbs forward(std::span<const double> input, const ModelWeights& weights,
                   const ForwardOptions& options = {});
ClassProbs forward(const Beat& beat, const ModelWeights& weights,
                   const ForwardOptions& options = {});

/// Raw logits of the output layer, before softmax.
std::array<double, kNumClasses> forward_logits(std::span<const double> input,
                                               const ModelWeights& weights,
                                               const ForwardOptions& options = {});

/// -sum y_i log(max(p_i, 1e-12)).
double crossentropy(std::span<const double, kNumClasses> y_true,
                    const ClassProbs& y_pred);
double crossentropy(BeatClass truth, const ClassProbs& y_pred);

struct LabeledBeat {
  std::vector<double> samples;
  BeatClass label = BeatClass::N;
};

struct BackwardOptions {
  double dropout_rate = 0.5;
  /// When set, sample i of the batch uses the mask derived from
  /// (mask_seed, i). Without it the pass is dropout-free.
  std::optional<std::uint64_t> mask_seed;
};

std::uint64_t sample_mask_seed(std::uint64_t batch_seed, std::size_t index) noexcept;

struct GradientResult {
  ModelWeights gradients;  // same shapes as the model, batch means
  double mean_loss = 0.0;
};

/// Mean loss over a batch, evaluated exactly as backward() sees it.
double batch_loss(std::span<const LabeledBeat> batch, const ModelWeights& weights,
                  const BackwardOptions& options = {});

/// Reverse-mode gradients of the mean crossentropy. Throws DomainError for an
/// empty batch and ShapeMismatch for inputs of the wrong length.
GradientResult backward(std::span<const LabeledBeat> batch,
                        const ModelWeights& weights,
                        const BackwardOptions& options = {});

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t epochs = 20;
  std::size_t batch_size = 16;
  double dropout_rate = 0.5;
  std::uint64_t seed = 7;

  void validate() const;
};

struct TrainResult {
  ModelWeights weights;
  /// Index 0 is the initialization; entry e is after epoch e. Evaluated in
  /// inference mode over the whole dataset.
  std::vector<double> loss_history;
  std::vector<double> accuracy_history;
};

/// Adam with bias-corrected moments over seeded shuffled mini-batches.
/// Requires every class to be present.
TrainResult train(std::span<const LabeledBeat> dataset, const TrainConfig& config,
                  const ModelShape& shape = {});

double accuracy(std::span<const LabeledBeat> dataset, const ModelWeights& weights);
double mean_loss(std::span<const LabeledBeat> dataset, const ModelWeights& weights);

// --- weights file -----------------------------------------------------------

/// JSON: architecture block plus {shape, values} per tensor; doubles written
/// with round-trip precision. Written to a temporary file and renamed.
void save_weights(const ModelWeights& weights, const std::filesystem::path& path);

/// Throws FileNotFound, ParseError, ShapeMismatch or DomainError; never
/// returns partially loaded weights.
ModelWeights load_weights(const std::filesystem::path& path);

std::string weights_to_json(const ModelWeights& weights);
ModelWeights weights_from_json(std::string_view text);

// --- synthetic training data ------------------------------------------------

/// P/QRS/T template of each class.
const BeatMorphology& class_morphology(BeatClass c);

struct TemplateDatasetConfig {
  std::size_t beats_per_class = 40;
  std::uint64_t seed = 7;
  double fs_hz = 500.0;
  double noise_std = 2.0;  // counts
};

/// Per class: a 600-sample record with jittered template beats, taken through
/// the pipeline's filter -> normalize -> extract path. Interleaved by class.
std::vector<LabeledBeat> make_template_dataset(const TemplateDatasetConfig& config);

}  // namespace ecgsec

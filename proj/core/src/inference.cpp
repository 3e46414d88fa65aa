#include "ecgsec/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "ecgsec/error.hpp"

namespace ecgsec {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr std::uint64_t kDefaultMaskSeed = 0x5eed'd809'0a5cULL;

double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_len(const char* field, const std::vector<double>& v, std::size_t expected) {
  if (v.size() != expected) {
    throw ShapeMismatch(field, "expected " + std::to_string(expected) + " values, got " +
                                   std::to_string(v.size()));
  }
}

void check_sizes(const ModelWeights& w) {
  const auto& s = w.shape;
  s.validate();
  check_len("conv_filters", w.conv_filters, s.filters * s.kernel);
  check_len("conv_bias", w.conv_bias, s.filters);
  check_len("dense1_w", w.dense1_w, s.hidden * s.flat_len());
  check_len("dense1_b", w.dense1_b, s.hidden);
  check_len("out_w", w.out_w, kNumClasses * s.hidden);
  check_len("out_b", w.out_b, kNumClasses);
}

void check_input(std::span<const double> input, const ModelShape& shape) {
  if (input.size() != shape.input_len) {
    throw ShapeMismatch("input", "expected " + std::to_string(shape.input_len) +
                                     " samples, got " + std::to_string(input.size()));
  }
}

template <typename F>
void for_each_tensor(ModelWeights& w, F&& f) {
  f(w.conv_filters);
  f(w.conv_bias);
  f(w.dense1_w);
  f(w.dense1_b);
  f(w.out_w);
  f(w.out_b);
}

// Activations kept for the backward pass.
struct Trace {
  std::vector<double> conv_pre;  // [t][f]
  std::vector<double> flat;      // relu + dropout, [t][f]
  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  std::array<double, kNumClasses> logits{};
};

// keep == nullptr disables dropout.
void run_forward(std::span<const double> x, const ModelWeights& w,
                 const std::uint8_t* keep, double keep_scale, Trace& tr) {
  const auto& s = w.shape;
  const std::size_t F = s.filters;
  const std::size_t K = s.kernel;
  const std::size_t T = s.conv_len();
  const std::size_t flat = s.flat_len();

  tr.conv_pre.resize(flat);
  tr.flat.resize(flat);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t f = 0; f < F; ++f) {
      double acc = w.conv_bias[f];
      const double* kern = &w.conv_filters[f * K];
      for (std::size_t k = 0; k < K; ++k) acc += kern[k] * x[t + k];
      const std::size_t idx = t * F + f;
      tr.conv_pre[idx] = acc;
      double a = acc > 0.0 ? acc : 0.0;
      if (keep) a = keep[idx] ? a * keep_scale : 0.0;
      tr.flat[idx] = a;
    }
  }

  tr.hidden_pre.resize(s.hidden);
  tr.hidden.resize(s.hidden);
  for (std::size_t h = 0; h < s.hidden; ++h) {
    const double* row = &w.dense1_w[h * flat];
    double acc = 0.0;
    for (std::size_t j = 0; j < flat; ++j) acc += row[j] * tr.flat[j];
    acc += w.dense1_b[h];
    tr.hidden_pre[h] = acc;
    tr.hidden[h] = acc > 0.0 ? acc : 0.0;
  }

  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double* row = &w.out_w[c * s.hidden];
    double acc = w.out_b[c];
    for (std::size_t h = 0; h < s.hidden; ++h) acc += row[h] * tr.hidden[h];
    tr.logits[c] = acc;
  }
}

void validate_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw DomainError("dropout rate must lie in [0,1)");
}

ClassProbs forward_impl(std::span<const double> input, const ModelWeights& weights,
                        const ForwardOptions& options, Trace& tr) {
  check_sizes(weights);
  check_input(input, weights.shape);
  if (options.training) {
    validate_rate(options.dropout_rate);
    const auto mask = dropout_mask(weights.shape.flat_len(), options.dropout_rate,
                                   options.dropout_mask_seed.value_or(kDefaultMaskSeed));
    run_forward(input, weights, mask.data(), 1.0 / (1.0 - options.dropout_rate), tr);
  } else {
    run_forward(input, weights, nullptr, 1.0, tr);
  }
  return softmax(tr.logits);
}

std::array<double, kNumClasses> one_hot(BeatClass c) {
  std::array<double, kNumClasses> y{};
  y[static_cast<std::size_t>(c)] = 1.0;
  return y;
}

void validate_batch(std::span<const LabeledBeat> batch, const ModelWeights& weights) {
  if (batch.empty()) throw DomainError("empty batch");
  check_sizes(weights);
  for (const auto& b : batch) check_input(b.samples, weights.shape);
}

}  // namespace

std::string_view to_string(BeatClass c) noexcept {
  switch (c) {
    case BeatClass::N: return "N";
    case BeatClass::LBBB: return "LBBB";
    case BeatClass::RBBB: return "RBBB";
    case BeatClass::APC: return "APC";
    case BeatClass::VPC: return "VPC";
  }
  return "?";
}

BeatClass beat_class_from_index(std::size_t index) {
  if (index >= kNumClasses) throw DomainError("class index out of range");
  return static_cast<BeatClass>(index);
}

void ModelShape::validate() const {
  if (filters == 0 || kernel == 0 || hidden == 0 || input_len < kernel) {
    throw ShapeMismatch("architecture", "degenerate model shape");
  }
}

ModelWeights ModelWeights::zeros(const ModelShape& shape) {
  shape.validate();
  ModelWeights w;
  w.shape = shape;
  w.conv_filters.assign(shape.filters * shape.kernel, 0.0);
  w.conv_bias.assign(shape.filters, 0.0);
  w.dense1_w.assign(shape.hidden * shape.flat_len(), 0.0);
  w.dense1_b.assign(shape.hidden, 0.0);
  w.out_w.assign(kNumClasses * shape.hidden, 0.0);
  w.out_b.assign(kNumClasses, 0.0);
  return w;
}

ModelWeights ModelWeights::glorot(const ModelShape& shape, std::uint64_t seed) {
  ModelWeights w = zeros(shape);
  std::mt19937_64 rng(seed);
  auto fill = [&](std::vector<double>& v, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& x : v) x = (2.0 * unit_double(rng) - 1.0) * limit;
  };
  const auto d = [](std::size_t n) { return static_cast<double>(n); };
  fill(w.conv_filters, d(shape.kernel), d(shape.kernel * shape.filters));
  fill(w.dense1_w, d(shape.flat_len()), d(shape.hidden));
  fill(w.out_w, d(shape.hidden), d(kNumClasses));
  return w;
}

void ModelWeights::validate() const {
  check_sizes(*this);
  auto finite = [](const char* field, const std::vector<double>& v) {
    for (double x : v) {
      if (!std::isfinite(x)) throw DomainError(std::string("non-finite value in ") + field);
    }
  };
  finite("conv_filters", conv_filters);
  finite("conv_bias", conv_bias);
  finite("dense1_w", dense1_w);
  finite("dense1_b", dense1_b);
  finite("out_w", out_w);
  finite("out_b", out_b);
}

std::size_t ModelWeights::parameter_count() const noexcept {
  return conv_filters.size() + conv_bias.size() + dense1_w.size() + dense1_b.size() +
         out_w.size() + out_b.size();
}

ClassProbs softmax(std::span<const double, kNumClasses> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  ClassProbs out;
  double sum = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out.probs[c] = std::exp(logits[c] - mx);
    sum += out.probs[c];
  }
  for (auto& p : out.probs) p /= sum;
  out.label = beat_class_from_index(static_cast<std::size_t>(
      std::max_element(out.probs.begin(), out.probs.end()) - out.probs.begin()));
  return out;
}

std::vector<std::uint8_t> dropout_mask(std::size_t size, double rate, std::uint64_t seed) {
  validate_rate(rate);
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> keep(size);
  for (auto& k : keep) k = unit_double(rng) >= rate ? 1 : 0;
  return keep;
}

ClassProbs forward(std::span<const double> input, const ModelWeights& weights,
                   const ForwardOptions& options) {
  Trace tr;
  return forward_impl(input, weights, options, tr);
}

ClassProbs forward(const Beat& beat, const ModelWeights& weights,
                   const ForwardOptions& options) {
  return forward(std::span<const double>(beat.samples), weights, options);
}

std::array<double, kNumClasses> forward_logits(std::span<const double> input,
                                               const ModelWeights& weights,
                                               const ForwardOptions& options) {
  Trace tr;
  forward_impl(input, weights, options, tr);
  return tr.logits;
}

double crossentropy(std::span<const double, kNumClasses> y_true, const ClassProbs& y_pred) {
  double loss = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (y_true[c] != 0.0) loss -= y_true[c] * std::log(std::max(y_pred.probs[c], kProbFloor));
  }
  return loss;
}

double crossentropy(BeatClass truth, const ClassProbs& y_pred) {
  const auto y = one_hot(truth);
  return crossentropy(y, y_pred);
}

std::uint64_t sample_mask_seed(std::uint64_t batch_seed, std::size_t index) noexcept {
  return splitmix64(batch_seed ^ splitmix64(static_cast<std::uint64_t>(index)));
}

double batch_loss(std::span<const LabeledBeat> batch, const ModelWeights& weights,
                  const BackwardOptions& options) {
  validate_batch(batch, weights);
  Trace tr;
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ForwardOptions fo;
    if (options.mask_seed) {
      fo.training = true;
      fo.dropout_rate = options.dropout_rate;
      fo.dropout_mask_seed = sample_mask_seed(*options.mask_seed, i);
    }
    total += crossentropy(batch[i].label, forward_impl(batch[i].samples, weights, fo, tr));
  }
  return total / static_cast<double>(batch.size());
}

GradientResult backward(std::span<const LabeledBeat> batch, const ModelWeights& weights,
                        const BackwardOptions& options) {
  validate_batch(batch, weights);
  const auto& s = weights.shape;
  const std::size_t F = s.filters;
  const std::size_t K = s.kernel;
  const std::size_t T = s.conv_len();
  const std::size_t flat = s.flat_len();
  const std::size_t H = s.hidden;

  GradientResult result{ModelWeights::zeros(s), 0.0};
  auto& g = result.gradients;

  Trace tr;
  std::vector<std::uint8_t> mask;
  std::vector<double> dhidden(H);
  std::vector<double> dflat(flat);
  std::vector<std::size_t> active;
  active.reserve(flat);
  double keep_scale = 1.0;
  if (options.mask_seed) {
    validate_rate(options.dropout_rate);
    keep_scale = 1.0 / (1.0 - options.dropout_rate);
  }

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& x = batch[i].samples;
    const std::uint8_t* keep = nullptr;
    if (options.mask_seed) {
      mask = dropout_mask(flat, options.dropout_rate, sample_mask_seed(*options.mask_seed, i));
      keep = mask.data();
    }
    run_forward(x, weights, keep, keep_scale, tr);
    const ClassProbs p = softmax(tr.logits);
    result.mean_loss += crossentropy(batch[i].label, p);

    // Softmax + crossentropy junction: dL/dz = p - y.
    std::array<double, kNumClasses> dz = p.probs;
    dz[static_cast<std::size_t>(batch[i].label)] -= 1.0;

    std::fill(dhidden.begin(), dhidden.end(), 0.0);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      g.out_b[c] += dz[c];
      const double* wrow = &weights.out_w[c * H];
      double* grow = &g.out_w[c * H];
      for (std::size_t h = 0; h < H; ++h) {
        grow[h] += dz[c] * tr.hidden[h];
        dhidden[h] += wrow[h] * dz[c];
      }
    }
    for (std::size_t h = 0; h < H; ++h) {
      if (!(tr.hidden_pre[h] > 0.0)) dhidden[h] = 0.0;
    }

    active.clear();
    for (std::size_t j = 0; j < flat; ++j) {
      if (tr.flat[j] != 0.0) active.push_back(j);
    }
    std::fill(dflat.begin(), dflat.end(), 0.0);
    for (std::size_t h = 0; h < H; ++h) {
      const double dh = dhidden[h];
      if (dh == 0.0) continue;
      g.dense1_b[h] += dh;
      double* grow = &g.dense1_w[h * flat];
      for (std::size_t j : active) grow[j] += dh * tr.flat[j];
      const double* wrow = &weights.dense1_w[h * flat];
      for (std::size_t j = 0; j < flat; ++j) dflat[j] += wrow[j] * dh;
    }

    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t f = 0; f < F; ++f) {
        const std::size_t idx = t * F + f;
        if (!(tr.conv_pre[idx] > 0.0)) continue;
        if (keep && !keep[idx]) continue;
        const double d = dflat[idx] * (keep ? keep_scale : 1.0);
        if (d == 0.0) continue;
        g.conv_bias[f] += d;
        double* kern = &g.conv_filters[f * K];
        for (std::size_t k = 0; k < K; ++k) kern[k] += d * x[t + k];
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  for_each_tensor(g, [&](std::vector<double>& v) {
    for (auto& x : v) x *= inv;
  });
  result.mean_loss *= inv;
  return result;
}

void TrainConfig::validate() const {
  auto unit_open = [](double v) { return v > 0.0 && v < 1.0; };
  if (!unit_open(learning_rate) || !unit_open(beta1) || !unit_open(beta2) ||
      !unit_open(epsilon)) {
    throw ConfigError("learning_rate, beta1, beta2 and epsilon must lie in (0,1)");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout_rate must lie in [0,1)");
  }
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
}

double accuracy(std::span<const LabeledBeat> dataset, const ModelWeights& weights) {
  if (dataset.empty()) return 0.0;
  std::size_t correct = 0;
  Trace tr;
  for (const auto& b : dataset) {
    if (forward_impl(b.samples, weights, {}, tr).label == b.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

double mean_loss(std::span<const LabeledBeat> dataset, const ModelWeights& weights) {
  return batch_loss(dataset, weights, {});
}

TrainResult train(std::span<const LabeledBeat> dataset, const TrainConfig& config,
                  const ModelShape& shape) {
  config.validate();
  shape.validate();
  if (dataset.empty()) throw ConfigError("training dataset is empty");
  std::array<bool, kNumClasses> present{};
  for (const auto& b : dataset) {
    check_input(b.samples, shape);
    present[static_cast<std::size_t>(b.label)] = true;
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (!present[c]) {
      throw ConfigError("training dataset has no beat of class " +
                        std::string(to_string(beat_class_from_index(c))));
    }
  }

  TrainResult result{ModelWeights::glorot(shape, config.seed), {}, {}};
  auto& w = result.weights;
  result.loss_history.push_back(mean_loss(dataset, w));
  result.accuracy_history.push_back(accuracy(dataset, w));

  ModelWeights m = ModelWeights::zeros(shape);
  ModelWeights v = ModelWeights::zeros(shape);
  std::mt19937_64 rng(splitmix64(config.seed));
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<LabeledBeat> batch;
  std::uint64_t step = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng() % i]);
    }
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(dataset[order[k]]);

      BackwardOptions bo;
      bo.dropout_rate = config.dropout_rate;
      if (config.dropout_rate > 0.0) bo.mask_seed = rng();
      auto grads = backward(batch, w, bo).gradients;

      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      std::array<std::vector<double>*, 6> wt{&w.conv_filters, &w.conv_bias, &w.dense1_w,
                                            &w.dense1_b, &w.out_w, &w.out_b};
      std::array<std::vector<double>*, 6> mt{&m.conv_filters, &m.conv_bias, &m.dense1_w,
                                            &m.dense1_b, &m.out_w, &m.out_b};
      std::array<std::vector<double>*, 6> vt{&v.conv_filters, &v.conv_bias, &v.dense1_w,
                                            &v.dense1_b, &v.out_w, &v.out_b};
      std::array<std::vector<double>*, 6> gt{&grads.conv_filters, &grads.conv_bias,
                                            &grads.dense1_w, &grads.dense1_b,
                                            &grads.out_w, &grads.out_b};
      for (std::size_t t = 0; t < wt.size(); ++t) {
        auto& wv = *wt[t];
        auto& mv = *mt[t];
        auto& vv = *vt[t];
        const auto& gv = *gt[t];
        for (std::size_t k = 0; k < wv.size(); ++k) {
          mv[k] = config.beta1 * mv[k] + (1.0 - config.beta1) * gv[k];
          vv[k] = config.beta2 * vv[k] + (1.0 - config.beta2) * gv[k] * gv[k];
          const double mhat = mv[k] / c1;
          const double vhat = vv[k] / c2;
          wv[k] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
        }
      }
    }
    result.loss_history.push_back(mean_loss(dataset, w));
    result.accuracy_history.push_back(accuracy(dataset, w));
  }
  return result;
}

}  // namespace ecgsec

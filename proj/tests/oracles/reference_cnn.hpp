#pragma once

// Naive forward pass and central-difference gradients for the classifier,
// written from the layer definitions and sharing no code with the library.
// ReLU pre-activations are recorded so that finite differences straddling a
// kink can be skipped.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "ecgsec/inference.hpp"

namespace oracle {

struct RefResult {
  double loss = 0.0;
  std::vector<double> probs;
  std::vector<double> preacts;  // conv then dense1 pre-activations
};

/// keep: per-flat-unit keep flags (empty for no dropout).
inline RefResult reference_forward(const std::vector<double>& x, int label,
                                   const ecgsec::ModelWeights& w,
                                   const std::vector<std::uint8_t>& keep, double rate) {
  const auto& s = w.shape;
  const std::size_t L = s.input_len - s.kernel + 1;
  RefResult r;
  std::vector<double> flat(L * s.filters);
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t f = 0; f < s.filters; ++f) {
      double z = w.conv_bias[f];
      for (std::size_t k = 0; k < s.kernel; ++k) z += w.conv_filters[f * s.kernel + k] * x[t + k];
      r.preacts.push_back(z);
      double a = z > 0 ? z : 0.0;
      if (!keep.empty()) a = keep[t * s.filters + f] ? a / (1.0 - rate) : 0.0;
      flat[t * s.filters + f] = a;
    }
  }
  std::vector<double> hidden(s.hidden);
  for (std::size_t j = 0; j < s.hidden; ++j) {
    double z = w.dense1_b[j];
    for (std::size_t i = 0; i < flat.size(); ++i) z += w.dense1_w[j * flat.size() + i] * flat[i];
    r.preacts.push_back(z);
    hidden[j] = z > 0 ? z : 0.0;
  }
  std::vector<double> logits(5);
  for (std::size_t c = 0; c < 5; ++c) {
    double z = w.out_b[c];
    for (std::size_t j = 0; j < s.hidden; ++j) z += w.out_w[c * s.hidden + j] * hidden[j];
    logits[c] = z;
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (auto& l : logits) sum += std::exp(l - m);
  for (auto l : logits) r.probs.push_back(std::exp(l - m) / sum);
  r.loss = -std::log(std::max(r.probs[static_cast<std::size_t>(label)], 1e-12));
  return r;
}

template <class W>
auto tensors(W& w) {
  return std::vector{&w.conv_filters, &w.conv_bias, &w.dense1_w, &w.dense1_b, &w.out_w, &w.out_b};
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
};

/// rel = |analytic - numeric| / max(|analytic|, |numeric|, floor).
/// loss_at(w) returns the batch loss and the concatenated pre-activations.
inline GradCheck check_gradients(
    ecgsec::ModelWeights w, const ecgsec::ModelWeights& analytic,
    const std::function<std::pair<double, std::vector<double>>(const ecgsec::ModelWeights&)>& loss_at,
    double h = 1e-5, double floor = 1e-7) {
  GradCheck out;
  auto params = tensors(w);
  const auto grads = tensors(analytic);
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t]->size(); ++i) {
      const double orig = (*params[t])[i];
      (*params[t])[i] = orig + h;
      const auto [lp, ap] = loss_at(w);
      (*params[t])[i] = orig - h;
      const auto [lm, am] = loss_at(w);
      (*params[t])[i] = orig;
      bool kink = false;
      for (std::size_t k = 0; k < ap.size() && !kink; ++k) kink = (ap[k] > 0) != (am[k] > 0);
      if (kink) {
        ++out.skipped_kinks;
        continue;
      }
      const double numeric = (lp - lm) / (2.0 * h);
      const double a = (*grads[t])[i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      out.max_rel_error = std::max(out.max_rel_error, rel);
      ++out.checked;
    }
  }
  return out;
}

}  // namespace oracle

#include "ecgsec/chaotic_cipher.hpp"

#include <string>

#include "ecgsec/error.hpp"

namespace ecgsec {

namespace {

bool x_in_domain(double x) noexcept { return x > 0.0 && x < 1.0; }

bool r_in_domain(double r) noexcept {
  return r > ChaoticKey::kMinR && r <= ChaoticKey::kMaxR;
}

// (r * x) * (1 - x), evaluated in that order; the build disables contraction.
double map(double x, double r) noexcept { return r * x * (1.0 - x); }

[[noreturn]] void collapse(double x, double r) {
  throw DomainError("logistic trajectory left (0,1) at x=" + std::to_string(x) +
                    " with r=" + std::to_string(r));
}

}  // namespace

ChaoticKey::ChaoticKey(double x0, double r) : x0_(x0), r_(r) {
  if (!x_in_domain(x0)) {
    throw DomainError("key x0 must lie strictly inside (0,1), got " + std::to_string(x0));
  }
  if (!r_in_domain(r)) {
    throw DomainError("key r must lie in (3.57, 4.0], got " + std::to_string(r));
  }
}

void CipherConfig::validate() const {
  if (burn_in > kMaxBurnIn) {
    throw ConfigError("burn_in exceeds " + std::to_string(kMaxBurnIn));
  }
}

double logistic_step(double x, double r) {
  if (!x_in_domain(x)) {
    throw DomainError("logistic_step: x must lie in (0,1), got " + std::to_string(x));
  }
  if (!r_in_domain(r)) {
    throw DomainError("logistic_step: r must lie in (3.57, 4.0], got " + std::to_string(r));
  }
  const double next = map(x, r);
  if (!x_in_domain(next)) collapse(next, r);
  return next;
}

KeystreamState::KeystreamState(const ChaoticKey& key, CipherConfig config)
    : key_(key), config_(config), x_(key.x0()) {
  config_.validate();
  reset();
}

void KeystreamState::reset() {
  x_ = key_.x0();
  iterations_ = 0;
  for (std::uint32_t i = 0; i < config_.burn_in; ++i) step();
}

double KeystreamState::step() {
  // Inputs are valid by construction; only the r = 4 collapse needs checking.
  x_ = map(x_, key_.r());
  if (!x_in_domain(x_)) collapse(x_, key_.r());
  ++iterations_;
  return x_;
}

std::vector<std::uint8_t> keystream_bytes(const ChaoticKey& key,
                                          const CipherConfig& config,
                                          std::size_t n) {
  KeystreamState state(key, config);
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = state.next_byte();
  return out;
}

std::vector<std::uint8_t> apply_stream(std::span<const std::uint8_t> data,
                                       const ChaoticKey& key,
                                       const CipherConfig& config) {
  std::vector<std::uint8_t> out(data.begin(), data.end());
  apply_stream_in_place(out, key, config);
  return out;
}

void apply_stream_in_place(std::span<std::uint8_t> data, const ChaoticKey& key,
                           const CipherConfig& config) {
  KeystreamState state(key, config);
  for (auto& b : data) b = static_cast<std::uint8_t>(b ^ state.next_byte());
}

}  // namespace ecgsec

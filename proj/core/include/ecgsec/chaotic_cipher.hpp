#pragma once

// Logistic-map keystream generation and XOR stream encryption.
//
// The keystream is x_{n+1} = r * x_n * (1 - x_n) starting at x0, one map
// step per output byte, each byte being floor(x * 255). Every call to
// apply_stream restarts the trajectory at x0, so one call corresponds to one
// acquisition segment. Encryption and decryption are the same operation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ecgsec {

/// Secret (x0, r) pair. Immutable once constructed.
class ChaoticKey {
 public:
  static constexpr double kMinR = 3.57;  // exclusive
  static constexpr double kMaxR = 4.0;   // inclusive

  /// Throws DomainError unless 0 < x0 < 1 and kMinR < r <= kMaxR.
  ChaoticKey(double x0, double r);

  double x0() const noexcept { return x0_; }
  double r() const noexcept { return r_; }

  /// Same r, different initial condition (validated).
  ChaoticKey with_x0(double x0) const { return ChaoticKey(x0, r_); }

  bool operator==(const ChaoticKey&) const = default;

 private:
  double x0_;
  double r_;
};

struct CipherConfig {
  static constexpr std::uint32_t kMaxBurnIn = 1'000'000;

  /// Map iterations discarded after every reset.
  std::uint32_t burn_in = 0;

  void validate() const;
  bool operator==(const CipherConfig&) const = default;
};

/// One application of the logistic map. Throws DomainError if x is not in
/// (0,1), r is outside the key range, or the result escapes (0,1) (only
/// reachable at r = 4, e.g. from x = 0.5).
double logistic_step(double x, double r);

/// floor(x * 255); x in (0,1) maps to [0, 254].
inline std::uint8_t keystream_byte(double x) noexcept {
  return static_cast<std::uint8_t>(x * 255.0);
}

/// Mutable trajectory state. Single owner; do not share across threads.
class KeystreamState {
 public:
  explicit KeystreamState(const ChaoticKey& key, CipherConfig config = {});

  /// Back to x0, then discard burn_in steps.
  void reset();

  /// Advance one step and return the new state.
  double step();

  std::uint8_t next_byte() { return keystream_byte(step()); }

  double x() const noexcept { return x_; }
  std::uint64_t iterations() const noexcept { return iterations_; }
  const ChaoticKey& key() const noexcept { return key_; }

 private:
  ChaoticKey key_;
  CipherConfig config_;
  double x_;
  std::uint64_t iterations_ = 0;
};

std::vector<std::uint8_t> keystream_bytes(const ChaoticKey& key,
                                          const CipherConfig& config,
                                          std::size_t n);

/// out[i] = data[i] ^ keystream[i], trajectory reset at the start of the call.
std::vector<std::uint8_t> apply_stream(std::span<const std::uint8_t> data,
                                       const ChaoticKey& key,
                                       const CipherConfig& config = {});

void apply_stream_in_place(std::span<std::uint8_t> data, const ChaoticKey& key,
                           const CipherConfig& config = {});

}  // namespace ecgsec

#pragma once

// Cryptographic audit of the chaotic cipher: SP800-22 frequency (monobit)
// test, Shannon entropy, avalanche and key sensitivity under x0
// perturbations, plaintext/ciphertext correlation and byte histograms.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecgsec/chaotic_cipher.hpp"

namespace ecgsec {

inline constexpr std::size_t kMonobitMinBits = 100;
inline constexpr double kMonobitAlpha = 0.01;
inline constexpr double kAvalancheDelta = 1e-10;
inline constexpr double kKeySensitivityDelta = 0.01;
inline constexpr std::size_t kAuditMinBytes = 12'500;

/// MSB-first bit expansion, one 0/1 element per bit.
std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> bytes);

struct MonobitResult {
  double p_value = 0.0;
  bool pass = false;
  long long sum = 0;   // S = sum(2b - 1)
  double s_obs = 0.0;  // |S| / sqrt(n)
  std::size_t n = 0;
};

/// Throws InputTooShort below 100 bits, DomainError for elements not 0/1.
MonobitResult nist_monobit(std::span<const std::uint8_t> bits);

/// Bits per byte over the empirical 256-symbol distribution. Throws
/// InputTooShort on empty input.
double shannon_entropy(std::span<const std::uint8_t> data);

using Histogram256 = std::array<std::uint64_t, 256>;

Histogram256 histogram256(std::span<const std::uint8_t> data);

/// sum (c_i - n/256)^2 / (n/256); 0 for an empty histogram.
double chi_square_uniformity(const Histogram256& hist);

/// Pearson coefficient with population moments. Throws LengthMismatch,
/// InputTooShort (fewer than 2), ZeroVariance when either sigma < 1e-12.
double correlation(std::span<const double> x, std::span<const double> y);

struct PerturbationResult {
  double byte_ratio = 0.0;  // fraction of byte positions that differ
  double bit_ratio = 0.0;   // fraction of bits that differ
  double delta_applied = 0.0;
};

/// Encrypts data under key and under key with x0 + delta (x0 - delta if that
/// leaves (0,1)); r is held fixed. Each encryption is one continuous stream.
PerturbationResult perturbation_ratio(const ChaoticKey& key,
                                      std::span<const std::uint8_t> data,
                                      double delta, const CipherConfig& config = {});

/// perturbation_ratio with delta = 1e-10.
PerturbationResult avalanche(const ChaoticKey& key, std::span<const std::uint8_t> data,
                             const CipherConfig& config = {});

/// Byte ratio under delta = 0.01.
double key_sensitivity(const ChaoticKey& key, std::span<const std::uint8_t> data,
                       const CipherConfig& config = {});

struct SecurityReport {
  bool nist_pass = false;
  double nist_p_value = 0.0;
  double shannon_entropy_bits = 0.0;
  double avalanche_ratio = 0.0;
  double key_sensitivity_ratio = 0.0;
  double correlation = 0.0;
  Histogram256 histogram_encrypted{};
  Histogram256 histogram_decrypted{};

  // Recorded alongside the headline values.
  double avalanche_bit_ratio = 0.0;
  double chi_square_encrypted = 0.0;
  double decrypted_correlation = 0.0;
  std::uint64_t length = 0;

  bool operator==(const SecurityReport&) const = default;
};

/// Encrypts plaintext once as a single stream and runs every test. Bytes are
/// centered samples in two's complement; correlation reads them as int8.
/// Throws InputTooShort below 12500 bytes.
SecurityReport run_audit(const ChaoticKey& key, std::span<const std::uint8_t> plaintext,
                         const CipherConfig& config = {});

std::string report_to_json(const SecurityReport& report);
SecurityReport report_from_json(std::string_view text);

/// "value,count" per line with a header row.
void write_histogram_csv(const std::filesystem::path& path, const Histogram256& hist);

}  // namespace ecgsec

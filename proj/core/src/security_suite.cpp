#include "ecgsec/security_suite.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "ecgsec/error.hpp"
#include "json.hpp"

namespace ecgsec {

std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint8_t> bits;
  bits.reserve(bytes.size() * 8);
  for (std::uint8_t b : bytes) {
    for (int i = 7; i >= 0; --i) bits.push_back(static_cast<std::uint8_t>((b >> i) & 1U));
  }
  return bits;
}

MonobitResult nist_monobit(std::span<const std::uint8_t> bits) {
  if (bits.size() < kMonobitMinBits) {
    throw InputTooShort("monobit test needs at least 100 bits, got " +
                        std::to_string(bits.size()));
  }
  long long sum = 0;
  for (std::uint8_t b : bits) {
    if (b > 1) throw DomainError("bit sequence element is not 0 or 1");
    sum += b ? 1 : -1;
  }
  MonobitResult r;
  r.n = bits.size();
  r.sum = sum;
  r.s_obs = std::abs(static_cast<double>(sum)) / std::sqrt(static_cast<double>(r.n));
  r.p_value = std::erfc(r.s_obs / std::sqrt(2.0));
  r.pass = r.p_value >= kMonobitAlpha;
  return r;
}

Histogram256 histogram256(std::span<const std::uint8_t> data) {
  Histogram256 h{};
  for (std::uint8_t b : data) ++h[b];
  return h;
}

double shannon_entropy(std::span<const std::uint8_t> data) {
  if (data.empty()) throw InputTooShort("entropy of an empty sequence is undefined");
  const auto h = histogram256(data);
  const double n = static_cast<double>(data.size());
  double entropy = 0.0;
  for (auto c : h) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    entropy -= p * std::log2(p);
  }
  return entropy;
}

double chi_square_uniformity(const Histogram256& hist) {
  const double n = static_cast<double>(std::accumulate(hist.begin(), hist.end(), std::uint64_t{0}));
  if (n == 0.0) return 0.0;
  const double expected = n / 256.0;
  double chi = 0.0;
  for (auto c : hist) {
    const double d = static_cast<double>(c) - expected;
    chi += d * d / expected;
  }
  return chi;
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw LengthMismatch("correlation inputs differ in length (" + std::to_string(x.size()) +
                         " vs " + std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw InputTooShort("correlation needs at least two samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  const double sdx = std::sqrt(sxx / n);
  const double sdy = std::sqrt(syy / n);
  if (sdx < 1e-12 || sdy < 1e-12) throw ZeroVariance("correlation input has zero variance");
  const double rho = (sxy / n) / (sdx * sdy);
  return std::clamp(rho, -1.0, 1.0);
}

PerturbationResult perturbation_ratio(const ChaoticKey& key, std::span<const std::uint8_t> data,
                                      double delta, const CipherConfig& config) {
  if (data.empty()) throw InputTooShort("perturbation test needs data");
  double x1 = key.x0() + delta;
  if (!(x1 > 0.0 && x1 < 1.0)) {
    delta = -delta;
    x1 = key.x0() + delta;
  }
  const ChaoticKey other = key.with_x0(x1);
  const auto a = apply_stream(data, key, config);
  const auto b = apply_stream(data, other, config);
  std::size_t bytes = 0;
  std::size_t bits = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto diff = static_cast<std::uint8_t>(a[i] ^ b[i]);
    bytes += diff != 0;
    bits += static_cast<std::size_t>(std::popcount(diff));
  }
  PerturbationResult r;
  r.byte_ratio = static_cast<double>(bytes) / static_cast<double>(a.size());
  r.bit_ratio = static_cast<double>(bits) / (8.0 * static_cast<double>(a.size()));
  r.delta_applied = delta;
  return r;
}

PerturbationResult avalanche(const ChaoticKey& key, std::span<const std::uint8_t> data,
                             const CipherConfig& config) {
  return perturbation_ratio(key, data, kAvalancheDelta, config);
}

double key_sensitivity(const ChaoticKey& key, std::span<const std::uint8_t> data,
                       const CipherConfig& config) {
  return perturbation_ratio(key, data, kKeySensitivityDelta, config).byte_ratio;
}

namespace {

std::vector<double> as_signed_samples(std::span<const std::uint8_t> bytes) {
  std::vector<double> out(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    out[i] = static_cast<double>(static_cast<std::int8_t>(bytes[i]));
  }
  return out;
}

}  // namespace

SecurityReport run_audit(const ChaoticKey& key, std::span<const std::uint8_t> plaintext,
                         const CipherConfig& config) {
  if (plaintext.size() < kAuditMinBytes) {
    throw InputTooShort("audit needs at least " + std::to_string(kAuditMinBytes) +
                        " bytes, got " + std::to_string(plaintext.size()));
  }
  const auto cipher = apply_stream(plaintext, key, config);
  const auto decrypted = apply_stream(cipher, key, config);

  SecurityReport r;
  r.length = plaintext.size();
  const auto mono = nist_monobit(unpack_bits(cipher));
  r.nist_pass = mono.pass;
  r.nist_p_value = mono.p_value;
  r.shannon_entropy_bits = shannon_entropy(cipher);
  const auto av = avalanche(key, plaintext, config);
  r.avalanche_ratio = av.byte_ratio;
  r.avalanche_bit_ratio = av.bit_ratio;
  r.key_sensitivity_ratio = key_sensitivity(key, plaintext, config);

  const auto original = as_signed_samples(plaintext);
  r.correlation = correlation(original, as_signed_samples(cipher));
  r.decrypted_correlation = correlation(original, as_signed_samples(decrypted));

  r.histogram_encrypted = histogram256(cipher);
  r.histogram_decrypted = histogram256(decrypted);
  r.chi_square_encrypted = chi_square_uniformity(r.histogram_encrypted);
  return r;
}

std::string report_to_json(const SecurityReport& r) {
  nlohmann::json doc{
      {"nist_pass", r.nist_pass},
      {"nist_p_value", r.nist_p_value},
      {"shannon_entropy_bits", r.shannon_entropy_bits},
      {"avalanche_ratio", r.avalanche_ratio},
      {"key_sensitivity_ratio", r.key_sensitivity_ratio},
      {"correlation", r.correlation},
      {"histogram_encrypted", r.histogram_encrypted},
      {"histogram_decrypted", r.histogram_decrypted},
      {"avalanche_bit_ratio", r.avalanche_bit_ratio},
      {"chi_square_encrypted", r.chi_square_encrypted},
      {"decrypted_correlation", r.decrypted_correlation},
      {"length", r.length},
  };
  return doc.dump(2);
}

SecurityReport report_from_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    SecurityReport r;
    r.nist_pass = doc.at("nist_pass").get<bool>();
    r.nist_p_value = doc.at("nist_p_value").get<double>();
    r.shannon_entropy_bits = doc.at("shannon_entropy_bits").get<double>();
    r.avalanche_ratio = doc.at("avalanche_ratio").get<double>();
    r.key_sensitivity_ratio = doc.at("key_sensitivity_ratio").get<double>();
    r.correlation = doc.at("correlation").get<double>();
    r.histogram_encrypted = doc.at("histogram_encrypted").get<Histogram256>();
    r.histogram_decrypted = doc.at("histogram_decrypted").get<Histogram256>();
    r.avalanche_bit_ratio = doc.value("avalanche_bit_ratio", 0.0);
    r.chi_square_encrypted = doc.value("chi_square_encrypted", 0.0);
    r.decrypted_correlation = doc.value("decrypted_correlation", 0.0);
    r.length = doc.value("length", std::uint64_t{0});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed security report: ") + e.what());
  }
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram256& hist) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "value,count\n";
  for (std::size_t i = 0; i < hist.size(); ++i) out << i << ',' << hist[i] << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace ecgsec

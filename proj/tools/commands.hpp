#pragma once

// Subcommand implementations behind the ecgsec executable. Data goes to files
// or `out`; diagnostics go to `diag`. Every function throws ecgsec::Error on
// failure.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecgsec/chaotic_cipher.hpp"
#include "ecgsec/inference.hpp"
#include "ecgsec/pipeline.hpp"
#include "ecgsec/security_suite.hpp"

namespace ecgsec::cli {

inline constexpr const char* kKeyEnvVar = "ECGSEC_X0";
inline constexpr double kDefaultX0 = 0.5;
inline constexpr double kDefaultR = 3.99;

/// Decimal text to double; the whole string must parse.
double parse_decimal(std::string_view text, std::string_view what);

struct KeyOptions {
  std::optional<std::string> x0;  // falls back to $ECGSEC_X0, then 0.5
  std::string r = "3.99";
  std::uint32_t burn_in = 0;
};

ChaoticKey resolve_key(const KeyOptions& options, std::ostream& diag);
CipherConfig cipher_config(const KeyOptions& options);

namespace fs = std::filesystem;

struct SynthOptions {
  fs::path output = "ecg.bin";
  double seconds = 10.0;
  double bpm = 72.0;
  double noise = 2.0;
  std::uint64_t seed = 1;
  double fs_hz = 500.0;
};

struct SynthOutcome {
  fs::path signal;
  fs::path sidecar;
  std::size_t samples = 0;
  std::size_t beats = 0;
};

/// Sidecar path for a signal file: "<signal>.rpeaks".
fs::path rpeaks_sidecar(const fs::path& signal);

SynthOutcome cmd_synth(const SynthOptions& options, std::ostream& out, std::ostream& diag);

struct StreamOptions {
  fs::path input;
  KeyOptions key;
  fs::path weights;
  double fs_hz = 500.0;
  bool paced = false;
  std::size_t queue_capacity = 8;
};

/// Log line of one processed segment. With include_latency = false the line
/// depends only on the input and key.
std::string format_segment_log(const SegmentResult& result, double latency_ms,
                               bool include_latency = true);

/// Raw signal input runs ingest -> encrypt -> frame on a producer thread and
/// decode -> decrypt -> classify on the caller's thread. `.ecgx` input (or
/// any file starting with the frame magic) skips the sender side.
PipelineStats cmd_stream(const StreamOptions& options, std::ostream& out, std::ostream& diag);

struct CipherFileOptions {
  fs::path input;
  fs::path output;
  KeyOptions key;
  double fs_hz = 500.0;
};

/// Raw bytes -> centered -> per-300-byte encryption -> .ecgx frames.
std::size_t cmd_encrypt(const CipherFileOptions& options, std::ostream& diag);
/// .ecgx frames -> decrypted raw bytes. Any damaged frame is an error.
std::size_t cmd_decrypt(const CipherFileOptions& options, std::ostream& diag);

struct AuditOptions {
  fs::path input;
  KeyOptions key;
  fs::path report = "report.json";
};

struct AuditOutcome {
  SecurityReport report;
  fs::path report_path;
  fs::path hist_encrypted_csv;
  fs::path hist_decrypted_csv;
};

AuditOutcome cmd_audit(const AuditOptions& options, std::ostream& out, std::ostream& diag);

struct TrainOptions {
  fs::path output = "weights.json";
  std::uint64_t seed = 7;
  std::size_t epochs = 20;
  std::size_t beats_per_class = 40;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::optional<fs::path> dump_beats;  // CSV of the training beats
};

TrainResult cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& diag);

struct ClassifyOptions {
  fs::path input;  // CSV, one beat of 180 values per line
  fs::path weights;
};

std::vector<ClassProbs> cmd_classify(const ClassifyOptions& options, std::ostream& out,
                                     std::ostream& diag);

/// Beat CSV reader/writer shared by train and classify.
void write_beats_csv(const fs::path& path, std::span<const LabeledBeat> beats);
std::vector<std::vector<double>> read_beats_csv(const fs::path& path);

struct PlotOptions {
  fs::path input;  // raw signal file
  KeyOptions key;
  fs::path output_dir = "plots";
  std::size_t start_segment = 0;
  std::size_t segments = 1;
  double fs_hz = 500.0;
};

struct PlotOutcome {
  fs::path csv;
  fs::path signals_svg;
  fs::path hist_encrypted_svg;
  fs::path hist_decrypted_svg;
  std::size_t rows = 0;
};

PlotOutcome cmd_plot(const PlotOptions& options, std::ostream& out, std::ostream& diag);

// SVG helpers (plot.cpp).
struct Series {
  std::string name;
  std::vector<double> values;
};

std::string render_line_svg(const std::vector<Series>& panels, std::string_view title);
std::string render_histogram_svg(const Histogram256& hist, std::string_view title);

}  // namespace ecgsec::cli

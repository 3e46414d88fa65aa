#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "ecgsec/bounded_queue.hpp"
#include "ecgsec/error.hpp"
#include "ecgsec/signal_ingest.hpp"
#include "ecgsec/transport.hpp"

namespace ecgsec::cli {

double parse_decimal(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw ConfigError(std::string(what) + ": '" + std::string(text) + "' is not a decimal number");
  }
  return value;
}

ChaoticKey resolve_key(const KeyOptions& options, std::ostream& diag) {
  double x0 = kDefaultX0;
  if (options.x0) {
    x0 = parse_decimal(*options.x0, "--x0");
  } else if (const char* env = std::getenv(kKeyEnvVar); env && *env) {
    x0 = parse_decimal(env, kKeyEnvVar);
  } else {
    diag << "warning: no --x0 or " << kKeyEnvVar << " given, using x0 = " << kDefaultX0 << '\n';
  }
  return ChaoticKey(x0, parse_decimal(options.r, "--r"));
}

CipherConfig cipher_config(const KeyOptions& options) {
  CipherConfig c{options.burn_in};
  c.validate();
  return c;
}

fs::path rpeaks_sidecar(const fs::path& signal) {
  fs::path p = signal;
  p += ".rpeaks";
  return p;
}

// --- synth ------------------------------------------------------------------

SynthOutcome cmd_synth(const SynthOptions& options, std::ostream& out, std::ostream& diag) {
  SynthConfig cfg;
  cfg.fs_hz = options.fs_hz;
  cfg.heart_rate_bpm = options.bpm;
  cfg.noise_std = options.noise;
  cfg.seed = options.seed;
  cfg.duration_s = options.seconds;
  const auto synth = synth_ecg(cfg);
  if (synth.samples.empty()) diag << "warning: zero-length signal requested\n";

  SynthOutcome o{options.output, rpeaks_sidecar(options.output), synth.samples.size(),
                 synth.rpeaks.size()};
  write_signal_file(o.signal, synth.samples);
  write_rpeaks_file(o.sidecar, synth.rpeaks);
  out << "signal  " << o.signal.string() << " (" << o.samples << " samples)\n"
      << "r-peaks " << o.sidecar.string() << " (" << o.beats << " beats)\n";
  return o;
}

// --- stream -----------------------------------------------------------------

std::string format_segment_log(const SegmentResult& r, double latency_ms, bool include_latency) {
  std::ostringstream s;
  s << "seq=" << r.seq << " t_ms=" << r.timestamp_ms << " peaks=" << r.detected.size()
    << " beats=" << r.beats.size() << " labels=";
  if (r.degenerate) {
    s << "degenerate";
  } else if (r.beats.empty()) {
    s << '-';
  } else {
    for (std::size_t i = 0; i < r.beats.size(); ++i) {
      if (i) s << ',';
      s << to_string(r.beats[i].probs.label) << '@' << r.beats[i].r_index;
    }
  }
  if (include_latency) s << " latency_ms=" << std::fixed << std::setprecision(3) << latency_ms;
  return s.str();
}

namespace {

const char* error_name(DecodeErrorKind k) {
  switch (k) {
    case DecodeErrorKind::BadMagic: return "BadMagic";
    case DecodeErrorKind::CrcMismatch: return "CrcMismatch";
    case DecodeErrorKind::Truncated: return "Truncated";
    case DecodeErrorKind::UnsupportedVersion: return "UnsupportedVersion";
  }
  return "?";
}

bool starts_with_magic(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<char, 4> head{};
  in.read(head.data(), head.size());
  return in.gcount() == 4 &&
         std::equal(head.begin(), head.end(), kFrameMagic.begin(),
                    [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; });
}

struct WireChunk {
  std::vector<std::uint8_t> bytes;
  double encrypt_ms = 0.0;
};

// encrypt_ms is the sender-side cost of the frames in the chunk just fed.
void handle_events(FrameDecoder& decoder, SegmentProcessor& processor, PipelineStats& stats,
                   double encrypt_ms, std::ostream& out, std::ostream& diag) {
  while (decoder.has_event()) {
    auto ev = decoder.pop_event();
    if (auto* err = std::get_if<DecodeError>(&ev)) {
      ++stats.frame_errors;
      diag << "frame error: " << error_name(err->kind) << " at offset " << err->offset;
      if (err->skipped) diag << " (" << err->skipped << " bytes skipped)";
      diag << '\n';
      continue;
    }
    const auto& frame = std::get<EncryptedFrame>(ev);
    SegmentResult result;
    try {
      result = processor.process(frame);
    } catch (const LengthMismatch& e) {
      ++stats.frame_errors;
      diag << "frame error: " << e.what() << '\n';
      continue;
    }
    result.latency_ms += encrypt_ms;
    stats.record(result);
    out << format_segment_log(result, result.latency_ms) << '\n';
    if (result.degenerate) diag << "segment " << result.seq << " is flat; skipped\n";
  }
}

void print_stats(const PipelineStats& stats, std::ostream& out) {
  out << "segments=" << stats.segments_processed << " beats=" << stats.beats_classified
      << " degenerate=" << stats.degenerate_segments << " frame_errors=" << stats.frame_errors
      << std::fixed << std::setprecision(3) << " mean_latency_ms=" << stats.mean_latency_ms()
      << " max_latency_ms=" << stats.max_latency_ms() << '\n';
  out << "classes:";
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out << ' ' << to_string(beat_class_from_index(c)) << '=' << stats.class_histogram[c];
  }
  out << '\n';
}

}  // namespace

PipelineStats cmd_stream(const StreamOptions& options, std::ostream& out, std::ostream& diag) {
  const ChaoticKey key = resolve_key(options.key, diag);
  const CipherConfig cfg = cipher_config(options.key);
  const ModelWeights weights = load_weights(options.weights);
  SegmentProcessor processor(key, cfg, weights, options.fs_hz);
  PipelineStats stats;
  FrameDecoder decoder;

  if (!fs::exists(options.input)) throw FileNotFound(options.input.string());

  if (options.input.extension() == ".ecgx" || starts_with_magic(options.input)) {
    std::ifstream in(options.input, std::ios::binary);
    if (!in) throw IoError("cannot open " + options.input.string());
    std::vector<char> buf(1 << 14);
    while (in) {
      in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
      if (in.bad()) throw IoError("read error in " + options.input.string());
      const auto n = static_cast<std::size_t>(in.gcount());
      decoder.feed({reinterpret_cast<const std::uint8_t*>(buf.data()), n});
      handle_events(decoder, processor, stats, 0.0, out, diag);
    }
    decoder.finish();
    handle_events(decoder, processor, stats, 0.0, out, diag);
    print_stats(stats, out);
    return stats;
  }

  // Sender thread: ingest -> segment -> encrypt -> frame.
  BoundedQueue<WireChunk> queue(options.queue_capacity);
  std::exception_ptr producer_error;
  auto source = replay(options.input, options.fs_hz, options.paced);
  std::thread producer([&] {
    try {
      Segmenter segmenter(options.fs_hz);
      SegmentEncryptor encryptor(key, cfg);
      while (auto sample = source->next()) {
        auto seg = segmenter.push(*sample);
        if (!seg) continue;
        const auto t0 = std::chrono::steady_clock::now();
        const auto frame = encryptor.encrypt(*seg);
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (!queue.push({encode_frame(frame), ms})) break;
      }
    } catch (...) {
      producer_error = std::current_exception();
    }
    queue.close();
  });

  try {
    while (auto chunk = queue.pop()) {
      decoder.feed(chunk->bytes);
      handle_events(decoder, processor, stats, chunk->encrypt_ms, out, diag);
    }
  } catch (...) {
    queue.close();
    producer.join();
    throw;
  }
  producer.join();
  if (producer_error) std::rethrow_exception(producer_error);
  decoder.finish();
  handle_events(decoder, processor, stats, 0.0, out, diag);
  print_stats(stats, out);
  return stats;
}

// --- encrypt / decrypt ------------------------------------------------------

std::size_t cmd_encrypt(const CipherFileOptions& options, std::ostream& diag) {
  const ChaoticKey key = resolve_key(options.key, diag);
  const CipherConfig cfg = cipher_config(options.key);
  const auto raw = read_signal_file(options.input);
  if (raw.empty()) diag << "warning: empty input\n";
  std::ofstream out(options.output, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + options.output.string());

  std::size_t frames = 0;
  std::vector<std::uint8_t> unit;
  for (std::size_t start = 0; start < raw.size(); start += kSegmentLength) {
    const std::size_t end = std::min(raw.size(), start + kSegmentLength);
    unit.clear();
    for (std::size_t i = start; i < end; ++i) unit.push_back(to_wire_byte(center(raw[i])));
    apply_stream_in_place(unit, key, cfg);
    const auto bytes = encode_frame(unit, frames, segment_timestamp_ms(frames, options.fs_hz));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    ++frames;
  }
  if (!out) throw IoError("write failed for " + options.output.string());
  return frames;
}

std::size_t cmd_decrypt(const CipherFileOptions& options, std::ostream& diag) {
  const ChaoticKey key = resolve_key(options.key, diag);
  const CipherConfig cfg = cipher_config(options.key);
  const auto bytes = read_signal_file(options.input);
  std::vector<RawSample> raw;
  raw.reserve(bytes.size());
  std::size_t frames = 0;
  for (auto& ev : decode_frames(bytes)) {
    if (const auto* err = std::get_if<DecodeError>(&ev)) {
      throw ParseError(std::string("malformed frame stream: ") + error_name(err->kind) +
                       " at offset " + std::to_string(err->offset));
    }
    auto& frame = std::get<EncryptedFrame>(ev);
    apply_stream_in_place(frame.payload, key, cfg);
    for (auto b : frame.payload) raw.push_back(uncenter(from_wire_byte(b)));
    ++frames;
  }
  write_signal_file(options.output, raw);
  return frames;
}

// --- audit ------------------------------------------------------------------

AuditOutcome cmd_audit(const AuditOptions& options, std::ostream& out, std::ostream& diag) {
  const ChaoticKey key = resolve_key(options.key, diag);
  const CipherConfig cfg = cipher_config(options.key);
  const auto raw = read_signal_file(options.input);
  std::vector<std::uint8_t> plain(raw.size());
  std::transform(raw.begin(), raw.end(), plain.begin(),
                 [](RawSample s) { return to_wire_byte(center(s)); });

  AuditOutcome o;
  o.report = run_audit(key, plain, cfg);
  o.report_path = options.report;
  const auto stem = (options.report.parent_path() / options.report.stem()).string();
  o.hist_encrypted_csv = stem + "_hist_encrypted.csv";
  o.hist_decrypted_csv = stem + "_hist_decrypted.csv";

  {
    std::ofstream f(o.report_path, std::ios::trunc);
    if (!f) throw IoError("cannot write " + o.report_path.string());
    f << report_to_json(o.report) << '\n';
  }
  write_histogram_csv(o.hist_encrypted_csv, o.report.histogram_encrypted);
  write_histogram_csv(o.hist_decrypted_csv, o.report.histogram_decrypted);

  const auto& r = o.report;
  out << std::left << std::setw(20) << "Test" << "Result\n"
      << std::setw(20) << "NIST Frequency" << (r.nist_pass ? "True" : "False")
      << " (p=" << std::setprecision(4) << r.nist_p_value << ")\n"
      << std::fixed << std::setprecision(4)
      << std::setw(20) << "Shannon Entropy" << r.shannon_entropy_bits << '\n'
      << std::setw(20) << "Avalanche Effect" << r.avalanche_ratio << " (bits "
      << r.avalanche_bit_ratio << ")\n"
      << std::setw(20) << "Key Sensitivity" << r.key_sensitivity_ratio << '\n'
      << std::setw(20) << "Correlation" << r.correlation << '\n'
      << std::setw(20) << "Chi-square (enc)" << std::setprecision(1) << r.chi_square_encrypted
      << '\n'
      << "report " << o.report_path.string() << '\n';
  return o;
}

// --- train / classify -------------------------------------------------------

void write_beats_csv(const fs::path& path, std::span<const LabeledBeat> beats) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  for (const auto& b : beats) {
    for (std::size_t i = 0; i < b.samples.size(); ++i) {
      if (i) out << ',';
      out << b.samples[i];
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::vector<double>> read_beats_csv(const fs::path& path) {
  if (!fs::exists(path)) throw FileNotFound(path.string());
  std::ifstream in(path);
  std::vector<std::vector<double>> beats;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const auto comma = line.find(',', pos);
      const auto end = comma == std::string::npos ? line.size() : comma;
      row.push_back(parse_decimal(std::string_view(line).substr(pos, end - pos),
                                  path.string() + ":" + std::to_string(lineno)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    beats.push_back(std::move(row));
  }
  return beats;
}

TrainResult cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& diag) {
  TemplateDatasetConfig dc;
  dc.beats_per_class = options.beats_per_class;
  dc.seed = options.seed;
  const auto dataset = make_template_dataset(dc);
  if (options.dump_beats) write_beats_csv(*options.dump_beats, dataset);

  TrainConfig tc;
  tc.seed = options.seed;
  tc.epochs = options.epochs;
  tc.batch_size = options.batch_size;
  tc.learning_rate = options.learning_rate;
  diag << "training on " << dataset.size() << " beats for " << tc.epochs << " epochs\n";
  auto result = train(dataset, tc);
  out << std::fixed << std::setprecision(4);
  for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
    out << "epoch " << e << " loss=" << result.loss_history[e]
        << " accuracy=" << result.accuracy_history[e] << '\n';
  }
  save_weights(result.weights, options.output);
  out << "weights " << options.output.string() << '\n';
  return result;
}

std::vector<ClassProbs> cmd_classify(const ClassifyOptions& options, std::ostream& out,
                                     std::ostream& diag) {
  const auto weights = load_weights(options.weights);
  const auto beats = read_beats_csv(options.input);
  if (beats.empty()) diag << "warning: no beats in " << options.input.string() << '\n';
  std::vector<ClassProbs> results;
  out << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < beats.size(); ++i) {
    const auto p = forward(beats[i], weights);
    out << "beat " << i << ' ' << to_string(p.label) << " probs=";
    for (std::size_t c = 0; c < kNumClasses; ++c) out << (c ? "," : "") << p.probs[c];
    out << '\n';
    results.push_back(p);
  }
  return results;
}

// --- plot -------------------------------------------------------------------

PlotOutcome cmd_plot(const PlotOptions& options, std::ostream& out, std::ostream& diag) {
  const ChaoticKey key = resolve_key(options.key, diag);
  const CipherConfig cfg = cipher_config(options.key);
  const auto raw = read_signal_file(options.input);
  const auto segments = segmentize(raw, options.fs_hz);
  if (options.start_segment >= segments.size()) {
    throw DomainError("start segment " + std::to_string(options.start_segment) +
                      " beyond the " + std::to_string(segments.size()) + " full segments in input");
  }
  const std::size_t last = std::min(segments.size(), options.start_segment + options.segments);
  fs::create_directories(options.output_dir);

  SegmentEncryptor encryptor(key, cfg);
  std::vector<Series> panels{{"raw", {}}, {"filtered", {}}, {"encrypted", {}}, {"decrypted", {}}};
  std::vector<std::uint8_t> cipher_all;
  std::vector<std::uint8_t> plain_all;
  PlotOutcome o;
  o.csv = options.output_dir / "signals.csv";
  std::ofstream csv(o.csv, std::ios::trunc);
  if (!csv) throw IoError("cannot write " + o.csv.string());
  csv << "index,raw,filtered,encrypted,decrypted\n" << std::setprecision(10);

  for (std::size_t s = options.start_segment; s < last; ++s) {
    const auto& seg = segments[s];
    const auto frame = encryptor.encrypt(seg);
    const auto plain = apply_stream(frame.payload, key, cfg);
    std::vector<double> values(seg.samples.begin(), seg.samples.end());
    std::vector<double> context;
    if (s > 0) context.assign(segments[s - 1].samples.begin(), segments[s - 1].samples.end());
    const auto filtered = filter_with_context(values, context, options.fs_hz);
    for (std::size_t i = 0; i < kSegmentLength; ++i) {
      const auto enc = static_cast<int>(from_wire_byte(frame.payload[i]));
      const auto dec = static_cast<int>(uncenter(from_wire_byte(plain[i])));
      const auto raw_value = static_cast<int>(uncenter(seg.samples[i]));
      csv << (s * kSegmentLength + i) << ',' << raw_value << ','
          << filtered[i] << ',' << enc << ',' << dec << '\n';
      panels[0].values.push_back(raw_value);
      panels[1].values.push_back(filtered[i]);
      panels[2].values.push_back(enc);
      panels[3].values.push_back(dec);
      ++o.rows;
    }
    cipher_all.insert(cipher_all.end(), frame.payload.begin(), frame.payload.end());
    plain_all.insert(plain_all.end(), plain.begin(), plain.end());
  }
  if (!csv) throw IoError("write failed for " + o.csv.string());

  auto write_text = [](const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::trunc);
    if (!f) throw IoError("cannot write " + p.string());
    f << text;
  };
  o.signals_svg = options.output_dir / "signals.svg";
  o.hist_encrypted_svg = options.output_dir / "hist_encrypted.svg";
  o.hist_decrypted_svg = options.output_dir / "hist_decrypted.svg";
  write_text(o.signals_svg, render_line_svg(panels, "raw / filtered / encrypted / decrypted"));
  write_text(o.hist_encrypted_svg,
             render_histogram_svg(histogram256(cipher_all), "encrypted byte histogram"));
  write_text(o.hist_decrypted_svg,
             render_histogram_svg(histogram256(plain_all), "decrypted byte histogram"));
  out << "csv " << o.csv.string() << " (" << o.rows << " rows)\n"
      << "svg " << o.signals_svg.string() << ' ' << o.hist_encrypted_svg.string() << ' '
      << o.hist_decrypted_svg.string() << '\n';
  return o;
}

}  // namespace ecgsec::cli

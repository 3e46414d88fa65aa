#include <cstdlib>
#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "ecgsec/error.hpp"

namespace {

using namespace ecgsec::cli;

void add_key_options(CLI::App* cmd, KeyOptions& key) {
  cmd->add_option("--x0", key.x0, "keystream seed in (0,1); default $ECGSEC_X0, then 0.5");
  cmd->add_option("--r", key.r, "logistic parameter in (3.57,4]")->capture_default_str();
  cmd->add_option("--burn-in", key.burn_in, "iterations discarded after each reset")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encrypted ECG streaming, beat classification and cipher audit"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "write a synthetic ECG recording and R-peak sidecar");
  c_synth->add_option("-o,--output", synth.output, "signal file")->capture_default_str();
  c_synth->add_option("--seconds", synth.seconds, "duration")->capture_default_str();
  c_synth->add_option("--bpm", synth.bpm, "heart rate")->capture_default_str();
  c_synth->add_option("--noise", synth.noise, "noise std in counts")->capture_default_str();
  c_synth->add_option("--seed", synth.seed, "noise seed")->capture_default_str();
  c_synth->add_option("--fs", synth.fs_hz, "sample rate")->capture_default_str();

  StreamOptions stream;
  auto* c_stream = app.add_subcommand("stream", "run the encrypt/transmit/classify pipeline");
  c_stream->add_option("-i,--input", stream.input, "raw signal or .ecgx frames")->required();
  c_stream->add_option("-w,--weights", stream.weights, "model weights JSON")->required();
  c_stream->add_option("--fs", stream.fs_hz, "sample rate")->capture_default_str();
  c_stream->add_flag("--paced,!--unpaced", stream.paced, "replay at the sample rate");
  c_stream->add_option("--queue", stream.queue_capacity, "frames in flight")->capture_default_str();
  add_key_options(c_stream, stream.key);

  CipherFileOptions enc;
  auto* c_enc = app.add_subcommand("encrypt", "encrypt a raw signal into .ecgx frames");
  c_enc->add_option("-i,--input", enc.input)->required();
  c_enc->add_option("-o,--output", enc.output)->required();
  c_enc->add_option("--fs", enc.fs_hz, "sample rate")->capture_default_str();
  add_key_options(c_enc, enc.key);

  CipherFileOptions dec;
  auto* c_dec = app.add_subcommand("decrypt", "decrypt .ecgx frames back to a raw signal");
  c_dec->add_option("-i,--input", dec.input)->required();
  c_dec->add_option("-o,--output", dec.output)->required();
  add_key_options(c_dec, dec.key);

  AuditOptions audit;
  auto* c_audit = app.add_subcommand("audit", "run the cipher security tests on a recording");
  c_audit->add_option("-i,--input", audit.input, "raw signal file")->required();
  c_audit->add_option("--report", audit.report, "JSON report path")->capture_default_str();
  add_key_options(c_audit, audit.key);

  TrainOptions trn;
  auto* c_train = app.add_subcommand("train", "train the beat classifier on template beats");
  c_train->add_option("-o,--output", trn.output, "weights JSON")->capture_default_str();
  c_train->add_option("--seed", trn.seed)->capture_default_str();
  c_train->add_option("--epochs", trn.epochs)->capture_default_str();
  c_train->add_option("--beats-per-class", trn.beats_per_class)->capture_default_str();
  c_train->add_option("--batch", trn.batch_size)->capture_default_str();
  c_train->add_option("--lr", trn.learning_rate)->capture_default_str();
  c_train->add_option("--dump-beats", trn.dump_beats, "write the training beats as CSV");

  ClassifyOptions cls;
  auto* c_cls = app.add_subcommand("classify", "classify beats from a CSV file");
  c_cls->add_option("-i,--input", cls.input, "one 180-value beat per line")->required();
  c_cls->add_option("-w,--weights", cls.weights)->required();

  PlotOptions plot;
  auto* c_plot = app.add_subcommand("plot", "export signal CSV and SVG plots");
  c_plot->add_option("-i,--input", plot.input, "raw signal file")->required();
  c_plot->add_option("-o,--output", plot.output_dir, "output directory")->capture_default_str();
  c_plot->add_option("--start", plot.start_segment, "first segment")->capture_default_str();
  c_plot->add_option("--segments", plot.segments, "segment count")->capture_default_str();
  c_plot->add_option("--fs", plot.fs_hz, "sample rate")->capture_default_str();
  add_key_options(c_plot, plot.key);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_synth) {
      cmd_synth(synth, std::cout, std::cerr);
    } else if (*c_stream) {
      cmd_stream(stream, std::cout, std::cerr);
    } else if (*c_enc) {
      const auto n = cmd_encrypt(enc, std::cerr);
      std::cout << n << " frames -> " << enc.output.string() << '\n';
    } else if (*c_dec) {
      const auto n = cmd_decrypt(dec, std::cerr);
      std::cout << n << " frames -> " << dec.output.string() << '\n';
    } else if (*c_audit) {
      cmd_audit(audit, std::cout, std::cerr);
    } else if (*c_train) {
      cmd_train(trn, std::cout, std::cerr);
    } else if (*c_cls) {
      cmd_classify(cls, std::cout, std::cerr);
    } else if (*c_plot) {
      cmd_plot(plot, std::cout, std::cerr);
    }
  } catch (const ecgsec::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return EXIT_SUCCESS;
}

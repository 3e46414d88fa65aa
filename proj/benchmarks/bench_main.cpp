#include <benchmark/benchmark.h>

#include <random>

#include "ecgsec/beat_processing.hpp"
#include "ecgsec/chaotic_cipher.hpp"
#include "ecgsec/inference.hpp"
#include "ecgsec/pipeline.hpp"
#include "ecgsec/security_suite.hpp"
#include "ecgsec/transport.hpp"

using namespace ecgsec;

namespace {

const ChaoticKey kKey(0.3, 3.99);

std::vector<std::uint8_t> random_bytes(std::size_t n) {
  std::mt19937_64 rng(1);
  std::vector<std::uint8_t> v(n);
  for (auto& b : v) b = static_cast<std::uint8_t>(rng());
  return v;
}

void BM_Keystream(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(keystream_bytes(kKey, {}, n));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_Keystream)->Arg(300)->Arg(30000);

void BM_ApplyStreamSegment(benchmark::State& state) {
  auto data = random_bytes(300);
  for (auto _ : state) {
    apply_stream_in_place(data, kKey);
    benchmark::ClobberMemory();
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * 300));
}
BENCHMARK(BM_ApplyStreamSegment);

void BM_Forward(benchmark::State& state) {
  const auto w = ModelWeights::glorot({}, 7);
  std::vector<double> beat(kBeatLength);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d;
  for (auto& v : beat) v = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(forward(beat, w));
}
BENCHMARK(BM_Forward);

void BM_FrameEncode(benchmark::State& state) {
  const auto payload = random_bytes(300);
  std::uint64_t seq = 0;
  for (auto _ : state) benchmark::DoNotOptimize(encode_frame(payload, seq++, 0));
}
BENCHMARK(BM_FrameEncode);

void BM_FrameDecode(benchmark::State& state) {
  std::vector<std::uint8_t> wire;
  for (int k = 0; k < 100; ++k) {
    const auto f = encode_frame(random_bytes(300), static_cast<std::uint64_t>(k), 0);
    wire.insert(wire.end(), f.begin(), f.end());
  }
  for (auto _ : state) benchmark::DoNotOptimize(decode_frames(wire));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 100));
}
BENCHMARK(BM_FrameDecode);

void BM_SegmentProcessing(benchmark::State& state) {
  SynthConfig cfg;
  cfg.duration_s = 60.0;
  const auto segs = segmentize(synth_ecg(cfg).samples);
  SegmentEncryptor enc(kKey, {});
  std::vector<EncryptedFrame> frames;
  for (const auto& s : segs) frames.push_back(enc.encrypt(s));
  const auto w = ModelWeights::glorot({}, 7);
  SegmentProcessor proc(kKey, {}, w, 500.0);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(proc.process(frames[i % frames.size()]));
    if (++i % frames.size() == 0) {
      state.PauseTiming();
      proc = SegmentProcessor(kKey, {}, w, 500.0);
      state.ResumeTiming();
    }
  }
}
BENCHMARK(BM_SegmentProcessing);

void BM_Audit(benchmark::State& state) {
  const auto data = random_bytes(30000);
  for (auto _ : state) benchmark::DoNotOptimize(run_audit(kKey, data));
}
BENCHMARK(BM_Audit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

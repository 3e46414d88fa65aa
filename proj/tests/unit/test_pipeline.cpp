#include <gtest/gtest.h>

#include <thread>

#include "ecgsec/bounded_queue.hpp"
#include "ecgsec/error.hpp"
#include "ecgsec/pipeline.hpp"

using namespace ecgsec;

namespace {

const ModelShape kShape{180, 4, 3, 8};

std::vector<RawSample> ecg(double seconds, double noise, std::uint64_t seed = 1) {
  SynthConfig cfg;
  cfg.duration_s = seconds;
  cfg.noise_std = noise;
  cfg.seed = seed;
  return synth_ecg(cfg).samples;
}

}  // namespace

TEST(SegmentEncryptor, PerSegmentReset) {
  const ChaoticKey key(0.3, 3.99);
  const auto segs = segmentize(ecg(2.0, 1.0));
  SegmentEncryptor enc(key, {});
  for (const auto& s : segs) {
    const auto f = enc.encrypt(s);
    const auto wire = s.wire_bytes();
    EXPECT_EQ(f.payload, apply_stream(wire, key));
    EXPECT_EQ(f.seq, s.seq);
    EXPECT_EQ(f.timestamp_ms, s.timestamp_ms);
  }
}

TEST(SegmentProcessor, CompositionOfParts) {
  const ChaoticKey key(0.41, 3.97);
  const auto weights = ModelWeights::glorot({}, 3);
  const auto raw = ecg(20.0, 2.0, 5);
  const auto segs = segmentize(raw);
  SegmentEncryptor enc(key, {});
  SegmentProcessor proc(key, {}, weights, 500.0);

  RPeakDetector det(500.0);
  std::vector<double> prev;
  for (const auto& s : segs) {
    const auto wire = encode_frame(enc.encrypt(s));
    const auto ev = decode_frames(wire);
    ASSERT_EQ(ev.size(), 1u);
    const auto got = proc.process(std::get<EncryptedFrame>(ev[0]));
    EXPECT_EQ(got.decrypted, s.samples);
    EXPECT_GE(got.latency_ms, 0.0);

    // Same chain by hand.
    std::vector<double> cur(s.samples.begin(), s.samples.end());
    const auto filtered = filter_with_context(cur, prev, 500.0);
    prev = cur;
    const auto peaks = det.process(filtered, s.seq * 300);
    EXPECT_EQ(got.detected, peaks);
    const auto norm = normalize(filtered);
    std::vector<std::size_t> idx;
    std::vector<BeatClass> labels;
    for (auto p : peaks) {
      if (p - s.seq * 300 < 90 || p - s.seq * 300 + 90 > 300) continue;
      idx.push_back(p);
      labels.push_back(forward(extract_beat(norm.values, p - s.seq * 300), weights).label);
    }
    ASSERT_EQ(got.beats.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      EXPECT_EQ(got.beats[i].r_index, idx[i]);
      EXPECT_EQ(got.beats[i].probs.label, labels[i]);
    }
  }
}

TEST(SegmentProcessor, DegenerateSegmentFlagged) {
  const ChaoticKey key(0.41, 3.97);
  SegmentProcessor proc(key, {}, ModelWeights::zeros(), 500.0);
  std::array<CenteredSample, kSegmentLength> flat{};
  flat.fill(5);
  EXPECT_TRUE(proc.process_plain(0, 0, flat).degenerate);
}

TEST(SegmentProcessor, RejectsWrongPayloadAndShape) {
  const ChaoticKey key(0.41, 3.97);
  SegmentProcessor proc(key, {}, ModelWeights::zeros(), 500.0);
  EncryptedFrame f;
  f.payload.resize(299);
  EXPECT_THROW(proc.process(f), LengthMismatch);
  EXPECT_THROW(SegmentProcessor(key, {}, ModelWeights::zeros(ModelShape{20, 4, 3, 8}), 500.0),
               ShapeMismatch);
}

TEST(PipelineStats, Aggregates) {
  PipelineStats st;
  SegmentResult a;
  a.latency_ms = 2.0;
  a.beats.push_back({10, {}});
  a.beats.back().probs.label = BeatClass::VPC;
  SegmentResult b;
  b.latency_ms = 4.0;
  b.degenerate = true;
  st.record(a);
  st.record(b);
  EXPECT_EQ(st.segments_processed, 2u);
  EXPECT_EQ(st.beats_classified, 1u);
  EXPECT_EQ(st.degenerate_segments, 1u);
  EXPECT_EQ(st.class_histogram[static_cast<std::size_t>(BeatClass::VPC)], 1u);
  EXPECT_DOUBLE_EQ(st.mean_latency_ms(), 3.0);
  EXPECT_DOUBLE_EQ(st.max_latency_ms(), 4.0);
}

TEST(BoundedQueue, ProducerConsumerOrder) {
  BoundedQueue<int> q(2);
  std::thread prod([&] {
    for (int i = 0; i < 1000; ++i) q.push(i);
    q.close();
  });
  int expect = 0;
  while (auto v = q.pop()) EXPECT_EQ(*v, expect++);
  prod.join();
  EXPECT_EQ(expect, 1000);
  EXPECT_FALSE(q.push(1));
}

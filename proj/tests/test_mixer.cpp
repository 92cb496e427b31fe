// Copyright 2026 The speechcaps-forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <set>

#include <gtest/gtest.h>

#include "speechcaps/error.hpp"
#include "speechcaps/jsonl.hpp"
#include "speechcaps/mixer.hpp"
#include "support/toy_data.hpp"

namespace speechcaps {
namespace {

namespace fs = std::filesystem;

TEST(Layout, ReferenceClipExample) {
  const std::vector<double> d = {3.744, 3.930, 3.984};
  const std::vector<BoundaryMode> m = {BoundaryMode::kOverlap, BoundaryMode::kGap};
  const std::vector<double> b = {2.568, 0.456};
  const auto spans = layout_segments(d, m, b);
  ASSERT_EQ(spans.size(), 3u);
  EXPECT_NEAR(spans[0].first, 0.0, 1e-9);
  EXPECT_NEAR(spans[0].second, 3.744, 1e-9);
  EXPECT_NEAR(spans[1].first, 1.176, 1e-9);
  EXPECT_NEAR(spans[1].second, 5.106, 1e-9);
  EXPECT_NEAR(spans[2].first, 5.562, 1e-9);
  EXPECT_NEAR(spans[2].second, 9.546, 1e-9);
}

TEST(Layout, ZeroGapConcatenation) {
  const std::vector<double> d = {2.0, 3.0};
  const std::vector<BoundaryMode> m = {BoundaryMode::kGap};
  const std::vector<double> b = {0.0};
  const auto spans = layout_segments(d, m, b);
  EXPECT_DOUBLE_EQ(spans[1].first, 2.0);
  EXPECT_DOUBLE_EQ(spans[1].second, 5.0);
}

class PlanTest : public ::testing::Test {
 protected:
  void SetUp() override { pool_ = load_manifest(testing::make_toy_pool(dir_.path())); }
  testing::TempDir dir_{"mixer"};
  Manifest pool_;
};

TEST_F(PlanTest, DeterministicAndWellFormed) {
  MixPolicy policy;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const ClipPlan a = plan_clip(pool_, seed, policy);
    const ClipPlan b = plan_clip(pool_, seed, policy);
    ASSERT_EQ(a.meta, b.meta);
    const auto& segs = a.meta.segments;
    ASSERT_TRUE(segs.size() == 2 || segs.size() == 3);
    EXPECT_DOUBLE_EQ(segs[0].start_s, 0.0);
    std::set<std::string> speakers;
    double total = 0.0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      speakers.insert(segs[i].speaker_id);
      EXPECT_EQ(segs[i].order_index, static_cast<int>(i) + 1);
      const auto& src = a.sources[i];
      EXPECT_NEAR(segs[i].end_s - segs[i].start_s, src.duration_s, 1.0 / policy.target_rate_hz);
      if (i > 0) EXPECT_GE(segs[i].start_s, segs[i - 1].start_s);
      total = std::max(total, segs[i].end_s);
    }
    EXPECT_EQ(speakers.size(), segs.size());
    EXPECT_DOUBLE_EQ(a.meta.total_duration_s, total);
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
      const double d = a.meta.boundary_durations_s[i];
      if (a.meta.boundary_modes[i] == BoundaryMode::kGap) {
        EXPECT_NEAR(segs[i + 1].start_s - segs[i].end_s, d, 1e-9);
        EXPECT_GE(d, 0.0);
        EXPECT_LE(d, 1.0);
      } else {
        EXPECT_NEAR(segs[i].end_s - segs[i + 1].start_s, d, 1e-9);
        EXPECT_GE(d, 0.8);
        EXPECT_LE(d, 2.4);
      }
    }
  }
}

TEST_F(PlanTest, PoolTooSmall) {
  Manifest two;
  for (const auto& r : pool_.records) {
    if (r.speaker_id == "spk0" || r.speaker_id == "spk1") two.records.push_back(r);
  }
  try {
    plan_clip(two, 1, MixPolicy{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPoolTooSmall);
  }
}

TEST_F(PlanTest, UtteranceTooShort) {
  Manifest shorty = pool_;
  for (auto& r : shorty.records) r.duration_s = 0.5;
  MixPolicy policy;
  policy.overlap_probability = 1.0;
  try {
    plan_clip(shorty, 3, policy);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUtteranceTooShort);
  }
}

TEST_F(PlanTest, ClampKeepsOnsetsAudible) {
  Manifest shortish = pool_;
  for (auto& r : shortish.records) r.duration_s = 1.2;
  MixPolicy policy;
  policy.overlap_probability = 1.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ClipPlan p = plan_clip(shortish, seed, policy);
    for (double d : p.meta.boundary_durations_s) {
      EXPECT_LE(d, 1.2 - 0.05 + 1e-12);
      EXPECT_GE(d, 0.8);
    }
  }
}

// A two-utterance plan built by hand, with constant-valued sources.
struct HandPlan {
  ClipPlan plan;
  AudioSource audio;
};

HandPlan constant_plan(double a, double b, double dur_a, double dur_b, BoundaryMode mode, double boundary,
                       int rate) {
  HandPlan hp;
  const std::vector<double> d = {dur_a, dur_b};
  const std::vector<BoundaryMode> m = {mode};
  const std::vector<double> bd = {boundary};
  const auto spans = layout_segments(d, m, bd);
  for (int i = 0; i < 2; ++i) {
    UtteranceRecord r;
    r.id = i == 0 ? "a" : "b";
    r.duration_s = d[i];
    r.sample_rate_hz = rate;
    hp.plan.sources.push_back(r);
    SpeakerSegment s;
    s.order_index = i + 1;
    s.utterance_id = r.id;
    s.start_s = spans[i].first;
    s.end_s = spans[i].second;
    hp.plan.meta.segments.push_back(s);
  }
  hp.plan.meta.boundary_modes = m;
  hp.plan.meta.boundary_durations_s = bd;
  hp.plan.meta.total_duration_s = std::max(spans[0].second, spans[1].second);
  hp.audio = [a, b](const UtteranceRecord& r) {
    Waveform w;
    w.sample_rate_hz = r.sample_rate_hz;
    w.samples = Signal<float>::Constant(std::llround(r.duration_s * r.sample_rate_hz),
                                        static_cast<float>(r.id == "a" ? a : b));
    return w;
  };
  return hp;
}

TEST(Render, OverlapIsAdditive) {
  MixPolicy policy;
  const auto hp = constant_plan(0.4, 0.4, 2.0, 2.0, BoundaryMode::kOverlap, 1.0, 16000);
  const RenderedClip c = render_clip(hp.plan, policy, hp.audio);
  EXPECT_DOUBLE_EQ(c.meta.scale_factor, 1.0);
  EXPECT_NEAR(c.wave.samples[16000 + 8000], 0.8f, 1e-6);
  EXPECT_NEAR(c.wave.samples[100], 0.4f, 1e-6);
  EXPECT_EQ(c.wave.size(), 48000);
}

TEST(Render, PeakIsScaled) {
  MixPolicy policy;
  const auto hp = constant_plan(0.6, 0.6, 2.0, 2.0, BoundaryMode::kOverlap, 1.0, 16000);
  const RenderedClip c = render_clip(hp.plan, policy, hp.audio);
  // 0.99 / 1.2 by hand.
  EXPECT_NEAR(c.meta.scale_factor, 0.825, 1e-6);
  EXPECT_NEAR(c.wave.samples.cwiseAbs().maxCoeff(), 0.99f, 1e-5);
}

TEST(Render, GapIsSilent) {
  MixPolicy policy;
  const auto hp = constant_plan(0.3, 0.2, 1.0, 1.5, BoundaryMode::kGap, 0.5, 8000);
  policy.target_rate_hz = 8000;
  const RenderedClip c = render_clip(hp.plan, policy, hp.audio);
  EXPECT_EQ(c.wave.size(), std::llround(3.0 * 8000));
  for (Eigen::Index i = 8000; i < 12000; ++i) ASSERT_EQ(c.wave.samples[i], 0.0f);
  EXPECT_NEAR(c.wave.samples[12000], 0.2f, 1e-6);
}

TEST(Render, ResamplesToPolicyRate) {
  MixPolicy policy;
  policy.target_rate_hz = 8000;
  auto hp = constant_plan(0.3, 0.2, 1.0, 1.0, BoundaryMode::kGap, 0.0, 22050);
  const RenderedClip c = render_clip(hp.plan, policy, hp.audio);
  EXPECT_EQ(c.wave.sample_rate_hz, 8000);
  EXPECT_NEAR(static_cast<double>(c.wave.size()), 16000.0, 2.0);
}

TEST(GenerateSet, ReproducibleAcrossRunsAndWorkers) {
  testing::TempDir dir("mixer");
  const Manifest pool = load_manifest(testing::make_toy_pool(dir / "pool", {.rate_hz = 8000}));
  MixPolicy policy;
  policy.target_rate_hz = 8000;
  generate_set(pool, 1, 42, policy, dir / "a");
  generate_set(pool, 1, 42, policy, dir / "b");
  EXPECT_EQ(read_text(dir / "a" / "clips.jsonl"), read_text(dir / "b" / "clips.jsonl"));
  EXPECT_EQ(read_text(dir / "a" / "clips" / "clip_000000.wav"), read_text(dir / "b" / "clips" / "clip_000000.wav"));

  generate_set(pool, 12, 42, policy, dir / "c");
  policy.workers = 3;
  generate_set(pool, 12, 42, policy, dir / "d");
  EXPECT_EQ(read_text(dir / "c" / "clips.jsonl"), read_text(dir / "d" / "clips.jsonl"));
  const auto clips = load_clip_manifest(dir / "c" / "clips.jsonl");
  ASSERT_EQ(clips.size(), 12u);
  for (const auto& c : clips) EXPECT_TRUE(fs::exists(dir / "c" / c.audio_path));
}

TEST(GenerateSet, OffReferenceRangesAreMarked) {
  testing::TempDir dir("mixer");
  const Manifest pool = load_manifest(testing::make_toy_pool(dir / "pool", {.rate_hz = 8000}));
  MixPolicy policy;
  policy.target_rate_hz = 8000;
  policy.gap_max_s = 2.0;
  EXPECT_FALSE(policy.within_paper_bounds());
  const auto r = generate_set(pool, 2, 1, policy, dir / "o", {.write_audio = false});
  for (const auto& c : r.clips) EXPECT_TRUE(c.off_paper_bounds);
}

TEST(ClipManifest, JsonRoundTrip) {
  testing::TempDir dir("mixer");
  const Manifest pool = load_manifest(testing::make_toy_pool(dir / "pool"));
  const ClipPlan p = plan_clip(pool, 9, MixPolicy{});
  const ClipMetadata back = clip_from_json(to_json(p.meta));
  EXPECT_EQ(back, p.meta);
}

}  // namespace
}  // namespace speechcaps

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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "speechcaps/error.hpp"
#include "speechcaps/lexicon.hpp"
#include "speechcaps/prosody.hpp"
#include "support/toy_data.hpp"

namespace speechcaps {
namespace {

PhonemeLexicon reference() { return PhonemeLexicon::load(testing::lexicon_path()); }

Waveform constant(double v, double seconds, int rate) {
  Waveform w;
  w.sample_rate_hz = rate;
  w.samples = Signal<float>::Constant(std::llround(seconds * rate), static_cast<float>(v));
  return w;
}

TEST(Pitch, Sine220) {
  const auto est = estimate_pitch(testing::sine(220.0, 1.0, 16000, 0.5));
  ASSERT_TRUE(est.pitch_hz);
  EXPECT_NEAR(*est.pitch_hz, 220.0, 2.0);
  EXPECT_GE(est.voiced_fraction, 0.9);
}

TEST(Pitch, ReasonableAcrossRange) {
  for (double f : {80.0, 120.0, 180.0, 310.0, 450.0}) {
    const auto est = estimate_pitch(testing::sine(f, 0.5, 16000, 0.4));
    ASSERT_TRUE(est.pitch_hz) << f;
    EXPECT_NEAR(*est.pitch_hz, f, f * 0.01) << f;
  }
}

TEST(Pitch, SilenceIsUnvoiced) {
  const auto est = estimate_pitch(constant(0.0, 1.0, 16000));
  EXPECT_FALSE(est.pitch_hz);
  EXPECT_EQ(est.voiced_fraction, 0.0);
}

TEST(Pitch, WhiteNoiseMostlyUnvoiced) {
  std::mt19937 gen(7);
  std::uniform_real_distribution<float> u(-0.3f, 0.3f);
  Waveform w;
  w.sample_rate_hz = 16000;
  w.samples.resize(16000);
  for (auto& s : w.samples) s = u(gen);
  EXPECT_LE(estimate_pitch(w).voiced_fraction, 0.2);
}

TEST(Pitch, Errors) {
  Waveform empty;
  empty.sample_rate_hz = 16000;
  EXPECT_THROW(estimate_pitch(empty), Error);
  EXPECT_THROW(estimate_pitch(testing::sine(200, 0.5, 4000)), Error);
}

TEST(Pitch, ScaleAndReversalInvariance) {
  const Waveform w = testing::sine(170.0, 0.8, 16000, 0.5);
  Waveform scaled = w;
  scaled.samples *= 0.25f;
  Waveform reversed = w;
  reversed.samples = w.samples.reverse().eval();
  const double p = *estimate_pitch(w).pitch_hz;
  EXPECT_NEAR(*estimate_pitch(scaled).pitch_hz, p, 0.5);
  EXPECT_NEAR(*estimate_pitch(reversed).pitch_hz, p, 1.0);
  EXPECT_NEAR(compute_energy(reversed), compute_energy(w), 0.1);
}

TEST(Energy, AnalyticValues) {
  EXPECT_NEAR(compute_energy(constant(0.5, 1.0, 16000)), 20.0 * std::log10(0.5), 0.02);
  Waveform square = constant(1.0, 1.0, 16000);
  for (Eigen::Index i = 0; i < square.size(); i += 2) square.samples[i] = -1.0f;
  EXPECT_NEAR(compute_energy(square), 0.0, 1e-6);
  EXPECT_NEAR(compute_energy(testing::sine(200.0, 1.0, 16000, 0.5)), 20.0 * std::log10(0.5 / std::sqrt(2.0)), 0.05);
}

TEST(Energy, SilenceFloorAndScaling) {
  EXPECT_DOUBLE_EQ(compute_energy(constant(0.0, 0.5, 16000)), -60.0);
  const Waveform w = testing::sine(300.0, 1.0, 16000, 0.6);
  for (double k : {0.5, 0.1, 1.5}) {
    Waveform s = w;
    s.samples *= static_cast<float>(k);
    EXPECT_NEAR(compute_energy(s) - compute_energy(w), 20.0 * std::log10(k), 0.05);
  }
  // Leading silence does not dilute loudness: only the few frames straddling
  // the onset differ from the bare tone, however long the silence is.
  auto padded = [&](Eigen::Index pad) {
    Waveform p;
    p.sample_rate_hz = 16000;
    p.samples = Signal<float>::Zero(pad + w.size());
    p.samples.tail(w.size()) = w.samples;
    return compute_energy(p);
  };
  EXPECT_NEAR(padded(16000), padded(160000), 1e-9);
  EXPECT_NEAR(padded(16000), compute_energy(w), 0.15);
}

TEST(Phonemes, LexiconAndFallback) {
  const auto lex = reference();
  EXPECT_EQ(count_phonemes("hello world", lex), 8);
  EXPECT_EQ(count_phonemes("Hello, world!", lex), 8);
  EXPECT_EQ(count_phonemes("", lex), 0);
  EXPECT_EQ(count_phonemes("zorp", lex), 4);
  EXPECT_EQ(fallback_phoneme_count("zorp"), 4);
  EXPECT_EQ(fallback_phoneme_count("thick"), 3);  // th, i, ck
}

TEST(Phonemes, AdditiveUnderConcatenation) {
  const auto lex = reference();
  const std::vector<std::string> parts = {"hello", "the weather", "zorp blick", "quietly", "world 42"};
  for (const auto& a : parts) {
    for (const auto& b : parts) {
      EXPECT_EQ(count_phonemes(a + " " + b, lex), count_phonemes(a, lex) + count_phonemes(b, lex));
    }
  }
}

TEST(Phonemes, LexiconParsing) {
  const auto lex = PhonemeLexicon::parse(";;; comment\nHELLO  HH AH0 L OW1\nHELLO(1) HH EH0 L OW1\nA AH0\n");
  EXPECT_EQ(lex.size(), 2u);
  EXPECT_EQ(lex.lookup("hello"), 4);
  EXPECT_EQ(lex.lookup("absent"), -1);
}

TEST(Measure, SpeakingRateAndDegenerate) {
  const auto lex = reference();
  UtteranceRecord r;
  r.id = "u";
  r.transcript = "hello world";
  r.duration_s = 3.744;
  r.sample_rate_hz = 16000;
  const auto m = measure(r, constant(0.0, 3.744, 16000), lex);
  EXPECT_NEAR(m.speaking_rate_pps, 8.0 / 3.744, 1e-9);
  EXPECT_FALSE(m.pitch_hz);
  EXPECT_DOUBLE_EQ(m.energy_db, -60.0);
}

TEST(Measure, BatchPreservesOrder) {
  testing::TempDir dir("prosody");
  const Manifest pool = load_manifest(testing::make_toy_pool(dir.path(), {.speakers = 3, .utterances_per_speaker = 3}));
  const auto lex = reference();
  const auto one = measure_batch(pool, lex, 1);
  const auto three = measure_batch(pool, lex, 3);
  ASSERT_EQ(one.size(), pool.records.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].utterance_id, pool.records[i].id);
    EXPECT_EQ(to_json(one[i]).dump(), to_json(three[i]).dump());
    ASSERT_TRUE(one[i].pitch_hz);
    EXPECT_GE(*one[i].pitch_hz, 50.0);
    EXPECT_LE(*one[i].pitch_hz, 500.0);
    EXPECT_LE(one[i].energy_db, 0.0);
    EXPECT_GT(one[i].speaking_rate_pps, 0.0);
  }
}

}  // namespace
}  // namespace speechcaps

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

#include <gtest/gtest.h>

#include "speechcaps/corpus.hpp"
#include "speechcaps/error.hpp"
#include "speechcaps/wav.hpp"
#include "support/toy_data.hpp"

namespace speechcaps {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

Json record(const std::string& id, const std::string& wav) {
  return Json{{"id", id},         {"speaker_id", "s1"},   {"gender", "female"},
              {"emotion", "sad"}, {"transcript", "hi"},   {"audio_path", wav}};
}

TEST(Corpus, LoadsThreeRecords) {
  TempDir dir("corpus");
  testing::write_file(dir / "a.wav", testing::wav_bytes(1, 16000, 16, std::vector<std::int32_t>(1600, 100)));
  write_jsonl(dir / "m.jsonl", {record("u1", "a.wav"), record("u2", "a.wav"), record("u3", "a.wav")});
  const Manifest m = load_manifest(dir / "m.jsonl");
  ASSERT_EQ(m.records.size(), 3u);
  EXPECT_EQ(m.records[1].id, "u2");
  EXPECT_DOUBLE_EQ(m.records[0].duration_s, 0.1);
  EXPECT_EQ(m.records[0].sample_rate_hz, 16000);
}

TEST(Corpus, DurationFromHeader) {
  TempDir dir("corpus");
  testing::write_file(dir / "a.wav", testing::wav_bytes(1, 16000, 16, std::vector<std::int32_t>(59904, 0)));
  write_jsonl(dir / "m.jsonl", {record("u1", "a.wav")});
  // 59904 / 16000 computed by hand.
  EXPECT_DOUBLE_EQ(load_manifest(dir / "m.jsonl").records[0].duration_s, 3.744);
}

TEST(Corpus, BadGenderNamesLine) {
  TempDir dir("corpus");
  testing::write_file(dir / "a.wav", testing::wav_bytes(1, 16000, 16, std::vector<std::int32_t>(16, 0)));
  Json bad = record("u2", "a.wav");
  bad["gender"] = "robot";
  write_jsonl(dir / "m.jsonl", {record("u1", "a.wav"), bad});
  try {
    load_manifest(dir / "m.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
}

TEST(Corpus, ManifestErrors) {
  TempDir dir("corpus");
  testing::write_file(dir / "a.wav", testing::wav_bytes(1, 16000, 16, std::vector<std::int32_t>(16, 0)));
  write_jsonl(dir / "dup.jsonl", {record("u1", "a.wav"), record("u1", "a.wav")});
  EXPECT_EQ(code_of([&] { load_manifest(dir / "dup.jsonl"); }), ErrorCode::kDuplicateId);
  write_jsonl(dir / "missing.jsonl", {record("u1", "nope.wav")});
  EXPECT_EQ(code_of([&] { load_manifest(dir / "missing.jsonl"); }), ErrorCode::kMissingAudio);
  Json no_transcript = record("u1", "a.wav");
  no_transcript.erase("transcript");
  write_jsonl(dir / "schema.jsonl", {no_transcript});
  EXPECT_EQ(code_of([&] { load_manifest(dir / "schema.jsonl"); }), ErrorCode::kSchema);
  Json wrong_duration = record("u1", "a.wav");
  wrong_duration["duration_s"] = 0.5;
  write_jsonl(dir / "dur.jsonl", {wrong_duration});
  EXPECT_EQ(code_of([&] { load_manifest(dir / "dur.jsonl"); }), ErrorCode::kSchema);
}

TEST(Corpus, RoundTripIsFieldForField) {
  TempDir dir("corpus");
  const auto pool = testing::make_toy_pool(dir / "pool", {.speakers = 3, .utterances_per_speaker = 2});
  const Manifest a = load_manifest(pool);
  save_manifest(dir / "elsewhere" / "copy.jsonl", a);
  const Manifest b = load_manifest(dir / "elsewhere" / "copy.jsonl");
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_EQ(a.records[i], b.records[i]);
}

TEST(Audio, Pcm16Scaling) {
  const Waveform w = decode_wav(testing::wav_bytes(1, 8000, 16, std::vector<std::int32_t>(100, 16384)));
  ASSERT_EQ(w.size(), 100);
  EXPECT_EQ(w.sample_rate_hz, 8000);
  for (Eigen::Index i = 0; i < w.size(); ++i) EXPECT_NEAR(w.samples[i], 0.5f, 1.0 / 32768);
}

TEST(Audio, StereoIsAveraged) {
  std::vector<float> inter;
  for (int i = 0; i < 50; ++i) {
    inter.push_back(0.2f);
    inter.push_back(0.6f);
  }
  const Waveform w = decode_wav(testing::wav_bytes_float(2, 16000, inter));
  ASSERT_EQ(w.size(), 50);
  for (Eigen::Index i = 0; i < w.size(); ++i) EXPECT_NEAR(w.samples[i], 0.4f, 1e-6);
}

TEST(Audio, OtherIntegerWidths) {
  const Waveform w8 = decode_wav(testing::wav_bytes(1, 8000, 8, {64, -64}));
  EXPECT_NEAR(w8.samples[0], 0.5f, 1e-6);
  EXPECT_NEAR(w8.samples[1], -0.5f, 1e-6);
  const Waveform w24 = decode_wav(testing::wav_bytes(1, 8000, 24, {1 << 22, -(1 << 22)}));
  EXPECT_NEAR(w24.samples[0], 0.5f, 1e-6);
  EXPECT_NEAR(w24.samples[1], -0.5f, 1e-6);
}

TEST(Audio, MalformedInputs) {
  const std::string good = testing::wav_bytes(1, 16000, 16, std::vector<std::int32_t>(10, 1));
  EXPECT_EQ(code_of([&] { decode_wav(good.substr(0, 20)); }), ErrorCode::kCorruptFile);
  EXPECT_EQ(code_of([&] { decode_wav(good.substr(0, good.size() - 7)); }), ErrorCode::kCorruptFile);
  std::string alaw = good;
  alaw[20] = 6;  // format tag: A-law
  EXPECT_EQ(code_of([&] { decode_wav(alaw); }), ErrorCode::kUnsupportedFormat);
}

TEST(Audio, WriterRoundTrip) {
  TempDir dir("corpus");
  const Waveform w = testing::sine(440.0, 0.05, 16000, 0.7);
  write_wav_pcm16(dir / "s.wav", w);
  const Waveform r = read_wav(dir / "s.wav");
  ASSERT_EQ(r.size(), w.size());
  EXPECT_LT((r.samples - w.samples).cwiseAbs().maxCoeff(), 1.0f / 32768 + 1e-6f);
}

}  // namespace
}  // namespace speechcaps

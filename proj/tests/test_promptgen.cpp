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

#include <algorithm>

#include <gtest/gtest.h>

#include "speechcaps/error.hpp"
#include "speechcaps/promptgen.hpp"
#include "support/qa_oracle.hpp"
#include "support/toy_data.hpp"

namespace speechcaps {
namespace {

SpeakerSegment segment(int idx, Gender g, const char* emotion, Level pitch, Level speed, Level energy,
                       double start, double end) {
  SpeakerSegment s;
  s.order_index = idx;
  s.utterance_id = "u" + std::to_string(idx);
  s.speaker_id = "s" + std::to_string(idx);
  s.gender = g;
  s.emotion = emotion;
  s.pitch = pitch;
  s.speed = speed;
  s.energy = energy;
  s.start_s = start;
  s.end_s = end;
  return s;
}

// The three-speaker reference clip: overlap then gap, speeds slow/medium/fast.
ClipMetadata reference_clip() {
  ClipMetadata m;
  m.clip_id = "ref";
  m.segments = {segment(1, Gender::kFemale, "sad", Level::kLow, Level::kLow, Level::kLow, 0.0, 3.744),
                segment(2, Gender::kMale, "shouting", Level::kHigh, Level::kMedium, Level::kHigh, 1.176, 5.106),
                segment(3, Gender::kFemale, "cheerful", Level::kMedium, Level::kHigh, Level::kMedium, 5.562, 9.546)};
  m.boundary_modes = {BoundaryMode::kOverlap, BoundaryMode::kGap};
  m.boundary_durations_s = {2.568, 0.456};
  m.total_duration_s = 9.546;
  return m;
}

std::size_t occurrences(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

TEST(Template, FillAndErrors) {
  EXPECT_EQ(fill_template("a ${x} b ${y}", {{"x", "1"}, {"y", "2"}}), "a 1 b 2");
  EXPECT_THROW(fill_template("a ${missing}", {}), Error);
  EXPECT_THROW(fill_template("a ${open", {{"open", "x"}}), Error);
  PromptTemplate t = PromptTemplate::builtin();
  t.speaker_block = "Speaker ${index} ${nonexistent}";
  try {
    build_caption_prompt(reference_clip(), t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTemplate);
  }
}

TEST(CaptionPrompt, ReferenceClip) {
  const ClipMetadata m = reference_clip();
  const CaptionPrompt p = build_caption_prompt(m);
  for (const auto& s : m.segments) {
    const std::string block = "Speaker " + std::to_string(s.order_index) + ": {gender: " +
                              std::string(to_string(s.gender)) + ", emotion: " + s.emotion;
    EXPECT_EQ(occurrences(p.prompt_text, block), 1u) << block;
  }
  EXPECT_NE(p.prompt_text.find("speed: slow"), std::string::npos);
  EXPECT_NE(p.prompt_text.find("speed: fast"), std::string::npos);
  EXPECT_NE(p.prompt_text.find("start: 1.176, end: 5.106"), std::string::npos);
  EXPECT_EQ(occurrences(lower(p.prompt_text), "overlapping slightly"), 1u);
  EXPECT_EQ(occurrences(lower(p.prompt_text), "following"), 1u);
  EXPECT_EQ(build_caption_prompt(m).prompt_text, p.prompt_text);
  EXPECT_EQ(clip_from_json(Json::parse(p.metadata_block)), m);
}

TEST(CaptionPrompt, GapOnlyClip) {
  ClipMetadata m = reference_clip();
  m.segments.pop_back();
  m.segments[1].start_s = 4.0;
  m.segments[1].end_s = 7.93;
  m.boundary_modes = {BoundaryMode::kGap};
  m.boundary_durations_s = {0.256};
  const auto text = lower(build_caption_prompt(m).prompt_text);
  EXPECT_EQ(occurrences(text, "following"), 1u);
  EXPECT_EQ(occurrences(text, "overlapping"), 0u);
}

TEST(CaptionPrompt, MissingLabels) {
  ClipMetadata m = reference_clip();
  m.segments[1].speed.reset();
  try {
    build_caption_prompt(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingLabels);
  }
}

TEST(CaptionPrompt, BackendQuotas) {
  const std::vector<std::pair<std::string, std::size_t>> q = {{"a", 2}, {"b", 0}};
  EXPECT_EQ(assign_backends(5, q), (std::vector<std::string>{"a", "a", "b", "b", "b"}));
  const std::vector<std::pair<std::string, std::size_t>> tight = {{"a", 2}, {"b", 1}};
  EXPECT_THROW(assign_backends(5, tight), Error);
}

TEST(TemplateCaptioner, MirrorsRelations) {
  TemplateCaptioner c;
  const ClipMetadata m = reference_clip();
  const auto text = c.describe(build_caption_prompt(m), m);
  EXPECT_NE(text.find("The audio starts with a female speaker"), std::string::npos);
  EXPECT_NE(text.find("Overlapping slightly"), std::string::npos);
  EXPECT_NE(text.find("Following this"), std::string::npos);
}

TEST(Qa, ReferenceClipPairs) {
  const ClipMetadata m = reference_clip();
  QaPolicy all{100, 100};
  const auto items = generate_qa(m, 1, all);
  bool saw_emotion_first = false, saw_fastest = false;
  for (const auto& q : items) {
    if (q.kind == QaKind::kOrdinalAttribute && q.attribute == Attribute::kEmotion && q.target_order_index == 1) {
      saw_emotion_first = true;
      EXPECT_EQ(q.answer, "sad");
      EXPECT_NE(q.question.find("first"), std::string::npos);
    }
    if (q.kind == QaKind::kSuperlative && q.attribute == Attribute::kSpeed && q.extremum == Extremum::kHighest) {
      saw_fastest = true;
      EXPECT_EQ(q.answer, "3 (the third)");
    }
  }
  EXPECT_TRUE(saw_emotion_first);
  EXPECT_TRUE(saw_fastest);
  EXPECT_EQ(std::count_if(items.begin(), items.end(),
                          [](const QAItem& q) { return q.kind == QaKind::kOrdinalAttribute; }),
            15);
}

TEST(Qa, TiedExtremumIsSkipped) {
  ClipMetadata m = reference_clip();
  m.segments.pop_back();
  m.boundary_modes.pop_back();
  m.boundary_durations_s.pop_back();
  m.segments[0].speed = Level::kMedium;
  m.segments[1].speed = Level::kMedium;
  for (const auto& q : generate_qa(m, 3, {100, 100})) {
    EXPECT_FALSE(q.kind == QaKind::kSuperlative && q.attribute == Attribute::kSpeed) << q.question;
  }
}

TEST(Qa, QuotasDeterminismAndOracle) {
  testing::TempDir dir("qa");
  const Manifest pool = load_manifest(testing::make_toy_pool(dir.path()));
  std::vector<ClipMetadata> clips;
  for (std::uint64_t s = 0; s < 200; ++s) clips.push_back(plan_clip(pool, s, MixPolicy{}).meta);
  const auto a = generate_qa_set(clips, 5);
  const auto b = generate_qa_set(clips, 5, {}, 4);
  EXPECT_EQ(a, b);
  std::map<std::string, const ClipMetadata*> by_id;
  for (const auto& c : clips) by_id[c.clip_id] = &c;
  std::map<std::string, int> ordinal_count, superlative_count;
  for (const auto& q : a) {
    const auto r = testing::oracle_answer(q.question, *by_id.at(q.clip_id));
    ASSERT_TRUE(r.answer) << q.question << ": " << r.why;
    EXPECT_EQ(*r.answer, q.answer) << q.question;
    (q.kind == QaKind::kOrdinalAttribute ? ordinal_count : superlative_count)[q.clip_id]++;
    if (q.kind == QaKind::kSuperlative && q.attribute == Attribute::kPitch) {
      ASSERT_TRUE(q.gender_scope);
      EXPECT_NE(q.question.find(" " + std::string(to_string(*q.gender_scope)) + " "), std::string::npos);
    }
  }
  for (const auto& [id, n] : ordinal_count) EXPECT_LE(n, 4);
  for (const auto& [id, n] : superlative_count) EXPECT_LE(n, 3);
  EXPECT_TRUE(generate_qa_set(std::vector<ClipMetadata>{}, 5).empty());
}

TEST(Qa, JsonRoundTrip) {
  for (const auto& q : generate_qa(reference_clip(), 8, {100, 100})) EXPECT_EQ(qa_from_json(to_json(q)), q);
}

}  // namespace
}  // namespace speechcaps

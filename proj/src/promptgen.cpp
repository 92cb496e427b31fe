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

#include "speechcaps/promptgen.hpp"

#include <algorithm>
#include <array>
#include <set>

#include <fmt/format.h>

#include "speechcaps/error.hpp"
#include "speechcaps/parallel.hpp"
#include "speechcaps/rng.hpp"

namespace speechcaps {

namespace fs = std::filesystem;

std::string fill_template(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find("${", pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    const std::size_t close = text.find('}', open);
    if (close == std::string_view::npos) {
      throw Error(ErrorCode::kTemplate, "unterminated placeholder in template");
    }
    const std::string name(text.substr(open + 2, close - open - 2));
    auto it = values.find(name);
    if (it == values.end()) throw Error(ErrorCode::kTemplate, "unresolved placeholder '${" + name + "}'");
    out += it->second;
    pos = close + 1;
  }
  return out;
}

PromptTemplate PromptTemplate::builtin() {
  PromptTemplate t;
  t.preamble =
      "You are given metadata for an audio clip in which ${count} people speak in turn, "
      "sometimes over each other. Write one fluent paragraph describing how each person "
      "speaks: their gender, emotion, pitch, speaking speed and energy, in the order they "
      "appear, and how their turns relate in time.";
  t.speaker_block =
      "Speaker ${index}: {gender: ${gender}, emotion: ${emotion}, pitch: ${pitch}, speed: ${speed}, "
      "energy: ${energy}, start: ${start}, end: ${end}}";
  t.overlap_hint =
      "Speaker ${next} starts before speaker ${prev} finishes, overlapping slightly "
      "(about ${duration} s of simultaneous speech).";
  t.gap_hint = "Following speaker ${prev}, speaker ${next} begins after a pause of about ${duration} s.";
  t.closing =
      "Do not list the metadata or quote exact timestamps; describe the ${count} voices "
      "naturally.";
  return t;
}

PromptTemplate PromptTemplate::load(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kTemplate, path.string() + ": " + e.what());
  }
  PromptTemplate t = builtin();
  auto take = [&](const char* key, std::string& field) {
    if (j.contains(key)) field = j.at(key).get<std::string>();
  };
  take("preamble", t.preamble);
  take("speaker_block", t.speaker_block);
  take("overlap_hint", t.overlap_hint);
  take("gap_hint", t.gap_hint);
  take("closing", t.closing);
  return t;
}

namespace {

std::string seconds(double s) { return fmt::format("{:.3f}", s); }

void require_labels(const ClipMetadata& meta) {
  for (const auto& s : meta.segments) {
    if (!s.pitch || !s.speed || !s.energy || s.emotion.empty()) {
      throw Error(ErrorCode::kMissingLabels, "clip '" + meta.clip_id + "' speaker " +
                                                 std::to_string(s.order_index) +
                                                 " lacks attribute labels");
    }
  }
}

std::string attribute_value(const SpeakerSegment& s, Attribute a) {
  switch (a) {
    case Attribute::kGender: return std::string(to_string(s.gender));
    case Attribute::kEmotion: return s.emotion;
    case Attribute::kPitch: return std::string(level_word(ProsodicAttribute::kPitch, *s.pitch));
    case Attribute::kSpeed: return std::string(level_word(ProsodicAttribute::kSpeed, *s.speed));
    case Attribute::kEnergy: return std::string(level_word(ProsodicAttribute::kEnergy, *s.energy));
  }
  return {};
}

}  // namespace

CaptionPrompt build_caption_prompt(const ClipMetadata& meta, const PromptTemplate& tmpl) {
  require_labels(meta);
  const std::string count = std::to_string(meta.segments.size());
  std::string text = fill_template(tmpl.preamble, {{"count", count}});
  text += "\n\n";
  for (const auto& s : meta.segments) {
    text += fill_template(tmpl.speaker_block, {{"index", std::to_string(s.order_index)},
                                               {"gender", attribute_value(s, Attribute::kGender)},
                                               {"emotion", attribute_value(s, Attribute::kEmotion)},
                                               {"pitch", attribute_value(s, Attribute::kPitch)},
                                               {"speed", attribute_value(s, Attribute::kSpeed)},
                                               {"energy", attribute_value(s, Attribute::kEnergy)},
                                               {"start", seconds(s.start_s)},
                                               {"end", seconds(s.end_s)}});
    text += '\n';
  }
  text += '\n';
  for (std::size_t i = 0; i < meta.boundary_modes.size(); ++i) {
    const auto& hint =
        meta.boundary_modes[i] == BoundaryMode::kOverlap ? tmpl.overlap_hint : tmpl.gap_hint;
    text += fill_template(hint, {{"prev", std::to_string(meta.segments[i].order_index)},
                                 {"next", std::to_string(meta.segments[i + 1].order_index)},
                                 {"duration", seconds(meta.boundary_durations_s[i])}});
    text += '\n';
  }
  text += '\n';
  text += fill_template(tmpl.closing, {{"count", count}});

  CaptionPrompt p;
  p.clip_id = meta.clip_id;
  p.prompt_text = std::move(text);
  p.metadata_block = to_json(meta).dump();
  return p;
}

Json to_json(const CaptionPrompt& p) {
  Json j;
  j["clip_id"] = p.clip_id;
  if (!p.backend.empty()) j["backend"] = p.backend;
  j["prompt"] = p.prompt_text;
  j["metadata"] = Json::parse(p.metadata_block);
  return j;
}

std::vector<std::string> assign_backends(std::size_t n,
                                         std::span<const std::pair<std::string, std::size_t>> quotas) {
  std::vector<std::string> out;
  out.reserve(n);
  for (const auto& [name, quota] : quotas) {
    const std::size_t remaining = n - out.size();
    const std::size_t take = quota == 0 ? remaining : std::min(quota, remaining);
    out.insert(out.end(), take, name);
  }
  if (out.size() < n) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("backend quotas cover {} of {} clips", out.size(), n));
  }
  return out;
}

std::string TemplateCaptioner::describe(const CaptionPrompt&, const ClipMetadata& meta) {
  require_labels(meta);
  std::string out;
  for (std::size_t i = 0; i < meta.segments.size(); ++i) {
    const auto& s = meta.segments[i];
    const std::string traits =
        fmt::format("sounding {}, with {} pitch, a {} pace and {} energy",
                    attribute_value(s, Attribute::kEmotion), attribute_value(s, Attribute::kPitch),
                    attribute_value(s, Attribute::kSpeed), attribute_value(s, Attribute::kEnergy));
    if (i == 0) {
      out += fmt::format("The audio starts with a {} speaker {}.", to_string(s.gender), traits);
    } else if (meta.boundary_modes[i - 1] == BoundaryMode::kOverlap) {
      out += fmt::format(" Overlapping slightly, a {} voice comes in, {}.", to_string(s.gender), traits);
    } else {
      out += fmt::format(" Following this, a {} speaker talks, {}.", to_string(s.gender), traits);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(QaKind k) {
  return k == QaKind::kOrdinalAttribute ? "ordinal_attribute" : "superlative";
}

std::string_view to_string(Extremum e) { return e == Extremum::kHighest ? "highest" : "lowest"; }

std::string superlative_answer(int order_index) {
  return fmt::format("{} (the {})", order_index, ordinal_word(order_index));
}

Json to_json(const QAItem& q) {
  Json j;
  j["clip_id"] = q.clip_id;
  j["question"] = q.question;
  j["answer"] = q.answer;
  j["kind"] = to_string(q.kind);
  j["attribute"] = to_string(q.attribute);
  j["num_speakers"] = q.num_speakers;
  if (q.target_order_index) j["target_order_index"] = *q.target_order_index;
  if (q.answer_order_index) j["answer_order_index"] = *q.answer_order_index;
  if (q.extremum) j["extremum"] = to_string(*q.extremum);
  if (q.gender_scope) j["gender_scope"] = to_string(*q.gender_scope);
  return j;
}

QAItem qa_from_json(const Json& j) {
  try {
    QAItem q;
    q.clip_id = j.at("clip_id").get<std::string>();
    q.question = j.at("question").get<std::string>();
    q.answer = j.at("answer").get<std::string>();
    const auto kind = j.value("kind", std::string("ordinal_attribute"));
    if (kind == "ordinal_attribute") {
      q.kind = QaKind::kOrdinalAttribute;
    } else if (kind == "superlative") {
      q.kind = QaKind::kSuperlative;
    } else {
      throw Error(ErrorCode::kSchema, "invalid QA kind '" + kind + "'");
    }
    auto attr = parse_attribute(j.value("attribute", std::string("emotion")));
    if (!attr) throw Error(ErrorCode::kSchema, "invalid QA attribute");
    q.attribute = *attr;
    q.num_speakers = j.value("num_speakers", 0);
    if (j.contains("target_order_index")) q.target_order_index = j.at("target_order_index").get<int>();
    if (j.contains("answer_order_index")) q.answer_order_index = j.at("answer_order_index").get<int>();
    if (j.contains("extremum")) {
      q.extremum = j.at("extremum").get<std::string>() == "lowest" ? Extremum::kLowest : Extremum::kHighest;
    }
    if (j.contains("gender_scope")) q.gender_scope = parse_gender(j.at("gender_scope").get<std::string>());
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("QA item: ") + e.what());
  }
}

std::vector<QAItem> load_qa(const fs::path& path) {
  std::vector<QAItem> out;
  for_each_jsonl(path, [&](const Json& obj, std::size_t line) {
    try {
      out.push_back(qa_from_json(obj));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

void save_qa(const fs::path& path, std::span<const QAItem> items) {
  std::vector<Json> rows;
  rows.reserve(items.size());
  for (const auto& q : items) rows.push_back(to_json(q));
  write_jsonl(path, rows);
}

namespace {

constexpr std::array<const char*, 3> kOrdinalTemplates = {
    "Among the ${n} speakers in the audio, what is the ${noun} of the speaker who is ${ordinal} in "
    "the sequence?",
    "In this audio, there are ${n} speakers. What is the ${noun} of the ${ordinal} speaker?",
    "There are ${n} speakers in this recording. Considering the order in which they speak, what is "
    "the ${noun} of the ${ordinal} one?",
};

constexpr std::array<const char*, 3> kSuperlativeTemplates = {
    "In this audio, there are ${n} speakers. Who, according to their speaking order, ${verb}?",
    "Which speaker, identified by speaking order, ${verb} among the ${n} speakers in this audio?",
    "Listening to all ${n} speakers in this clip, who ${verb}? Answer with the speaker's position "
    "in the speaking order.",
};

constexpr std::array<const char*, 3> kGenderSuperlativeTemplates = {
    "In this audio, there are ${n} speakers. Among the ${gender} speakers, who, according to their "
    "speaking order, ${verb}?",
    "Which ${gender} speaker, identified by speaking order, ${verb} among the ${n} speakers in this "
    "audio?",
    "Listening to all ${n} speakers in this clip, which of the ${gender} speakers ${verb}? Answer "
    "with the speaker's position in the speaking order.",
};

std::string ordinal_noun(Attribute a) {
  switch (a) {
    case Attribute::kGender: return "gender";
    case Attribute::kEmotion: return "emotion";
    case Attribute::kPitch: return "pitch";
    case Attribute::kSpeed: return "speaking speed";
    case Attribute::kEnergy: return "energy level";
  }
  return {};
}

std::string superlative_verb(ProsodicAttribute a, Extremum e) {
  const auto dir = to_string(e);
  switch (a) {
    case ProsodicAttribute::kPitch: return fmt::format("speaks at the {} pitch", dir);
    case ProsodicAttribute::kSpeed: return fmt::format("speaks at the {} speed", dir);
    case ProsodicAttribute::kEnergy: return fmt::format("speaks with the {} energy", dir);
  }
  return {};
}

struct SuperlativeCandidate {
  ProsodicAttribute attribute;
  Extremum extremum;
  std::optional<Gender> gender;
  int answer;
};

// Unique extremum among eligible speakers, or nullopt.
std::optional<int> unique_extremum(const ClipMetadata& meta, ProsodicAttribute a, Extremum e,
                                   std::optional<Gender> gender) {
  std::vector<std::pair<int, int>> eligible;  // (level, order index)
  for (const auto& s : meta.segments) {
    if (gender && s.gender != *gender) continue;
    eligible.emplace_back(static_cast<int>(*s.level(a)), s.order_index);
  }
  if (eligible.size() < 2) return std::nullopt;
  int best = eligible.front().first;
  for (const auto& [level, idx] : eligible) {
    best = e == Extremum::kHighest ? std::max(best, level) : std::min(best, level);
  }
  std::optional<int> who;
  for (const auto& [level, idx] : eligible) {
    if (level != best) continue;
    if (who) return std::nullopt;
    who = idx;
  }
  return who;
}

// Chooses k of n indices uniformly, returned in ascending order.
std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + static_cast<std::size_t>(rng.below(n - i))]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

std::vector<QAItem> generate_qa(const ClipMetadata& meta, std::uint64_t rng_seed,
                                const QaPolicy& policy) {
  require_labels(meta);
  Rng rng(rng_seed);
  const int n = static_cast<int>(meta.segments.size());
  const std::string n_str = std::to_string(n);
  std::vector<QAItem> items;

  constexpr Attribute kOrdinalAttributes[] = {Attribute::kGender, Attribute::kEmotion,
                                              Attribute::kPitch, Attribute::kSpeed,
                                              Attribute::kEnergy};
  std::vector<std::pair<Attribute, int>> ordinal;
  for (auto a : kOrdinalAttributes) {
    for (int pos = 1; pos <= n; ++pos) ordinal.emplace_back(a, pos);
  }
  for (std::size_t c : sample_indices(rng, ordinal.size(), policy.max_ordinal_per_clip)) {
    const auto [attr, pos] = ordinal[c];
    const auto& seg = meta.segments[static_cast<std::size_t>(pos - 1)];
    QAItem q;
    q.clip_id = meta.clip_id;
    q.kind = QaKind::kOrdinalAttribute;
    q.attribute = attr;
    q.num_speakers = n;
    q.target_order_index = seg.order_index;
    q.answer = attribute_value(seg, attr);
    q.question = fill_template(kOrdinalTemplates[rng.below(kOrdinalTemplates.size())],
                               {{"n", n_str},
                                {"noun", ordinal_noun(attr)},
                                {"ordinal", ordinal_word(seg.order_index)}});
    items.push_back(std::move(q));
  }

  std::vector<SuperlativeCandidate> superlative;
  for (auto a : {ProsodicAttribute::kPitch, ProsodicAttribute::kSpeed, ProsodicAttribute::kEnergy}) {
    for (auto e : {Extremum::kHighest, Extremum::kLowest}) {
      if (a == ProsodicAttribute::kPitch) {
        for (auto g : {Gender::kFemale, Gender::kMale}) {
          if (auto who = unique_extremum(meta, a, e, g)) superlative.push_back({a, e, g, *who});
        }
      } else if (auto who = unique_extremum(meta, a, e, std::nullopt)) {
        superlative.push_back({a, e, std::nullopt, *who});
      }
    }
  }
  for (std::size_t c : sample_indices(rng, superlative.size(), policy.max_superlative_per_clip)) {
    const auto& cand = superlative[c];
    QAItem q;
    q.clip_id = meta.clip_id;
    q.kind = QaKind::kSuperlative;
    q.attribute = as_attribute(cand.attribute);
    q.num_speakers = n;
    q.answer_order_index = cand.answer;
    q.extremum = cand.extremum;
    q.gender_scope = cand.gender;
    q.answer = superlative_answer(cand.answer);
    std::map<std::string, std::string> values = {
        {"n", n_str}, {"verb", superlative_verb(cand.attribute, cand.extremum)}};
    if (cand.gender) {
      values["gender"] = std::string(to_string(*cand.gender));
      q.question = fill_template(kGenderSuperlativeTemplates[rng.below(kGenderSuperlativeTemplates.size())],
                                 values);
    } else {
      q.question = fill_template(kSuperlativeTemplates[rng.below(kSuperlativeTemplates.size())], values);
    }
    items.push_back(std::move(q));
  }
  return items;
}

std::vector<QAItem> generate_qa_set(std::span<const ClipMetadata> clips, std::uint64_t rng_seed,
                                    const QaPolicy& policy, std::size_t workers) {
  std::vector<std::vector<QAItem>> per_clip(clips.size());
  parallel_for(clips.size(), workers, [&](std::size_t i) {
    per_clip[i] = generate_qa(clips[i], derive_seed(rng_seed, i), policy);
  });
  std::vector<QAItem> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (auto& items : per_clip) {
    for (auto& q : items) {
      if (seen.emplace(q.clip_id, q.question).second) out.push_back(std::move(q));
    }
  }
  return out;
}

}  // namespace speechcaps

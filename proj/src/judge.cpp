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

#include "speechcaps/judge.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <set>
#include <tuple>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "speechcaps/error.hpp"
#include "speechcaps/parallel.hpp"

namespace speechcaps {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Records and verdicts.

Json to_json(const ModelOutputRecord& r) {
  Json j;
  j["clip_id"] = r.clip_id;
  j["question"] = r.question;
  j["gold"] = r.gold;
  j["output"] = r.output;
  j["model_tag"] = r.model_tag;
  if (r.kind) j["kind"] = to_string(*r.kind);
  if (r.attribute) j["attribute"] = to_string(*r.attribute);
  return j;
}

ModelOutputRecord model_output_from_json(const Json& j) {
  try {
    ModelOutputRecord r;
    r.clip_id = j.at("clip_id").get<std::string>();
    r.question = j.at("question").get<std::string>();
    r.gold = j.at("gold").get<std::string>();
    r.output = j.at("output").get<std::string>();
    r.model_tag = j.value("model_tag", std::string("model"));
    if (j.contains("kind")) {
      const auto k = j.at("kind").get<std::string>();
      r.kind = k == "superlative" ? QaKind::kSuperlative : QaKind::kOrdinalAttribute;
    }
    if (j.contains("attribute")) r.attribute = parse_attribute(j.at("attribute").get<std::string>());
    if (r.question.empty()) throw Error(ErrorCode::kSchema, "empty question");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("model output record: ") + e.what());
  }
}

std::vector<ModelOutputRecord> load_model_outputs(const fs::path& path) {
  std::vector<ModelOutputRecord> out;
  std::set<std::tuple<std::string, std::string, std::string>> keys;
  for_each_jsonl(path, [&](const Json& obj, std::size_t line) {
    const std::string where = path.string() + ":" + std::to_string(line) + ": ";
    ModelOutputRecord r;
    try {
      r = model_output_from_json(obj);
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
    if (!keys.emplace(r.clip_id, r.question, r.model_tag).second) {
      throw Error(ErrorCode::kSchema, where + "duplicate (clip_id, question, model_tag)");
    }
    out.push_back(std::move(r));
  });
  return out;
}

Json to_json(const JudgeVerdict& v) {
  Json j;
  j["clip_id"] = v.clip_id;
  j["question"] = v.question;
  j["model_tag"] = v.model_tag;
  j["relevant"] = v.relevant;
  j["aligned"] = v.aligned;
  j["backend"] = v.backend;
  j["raw_judge_reply"] = v.raw_judge_reply;
  j["status"] = v.failed ? "failed" : "ok";
  if (v.conflict) j["conflict"] = true;
  if (!v.error.empty()) j["error"] = v.error;
  return j;
}

JudgeVerdict verdict_from_json(const Json& j) {
  try {
    JudgeVerdict v;
    v.clip_id = j.at("clip_id").get<std::string>();
    v.question = j.at("question").get<std::string>();
    v.model_tag = j.value("model_tag", std::string("model"));
    v.relevant = j.at("relevant").get<bool>();
    v.aligned = j.at("aligned").get<bool>();
    v.backend = j.value("backend", std::string());
    v.raw_judge_reply = j.value("raw_judge_reply", std::string());
    v.failed = j.value("status", std::string("ok")) == "failed";
    v.conflict = j.value("conflict", false);
    v.error = j.value("error", std::string());
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("verdict: ") + e.what());
  }
}

std::vector<JudgeVerdict> load_verdicts(const fs::path& path) {
  std::vector<JudgeVerdict> out;
  for_each_jsonl(path, [&](const Json& obj, std::size_t line) {
    try {
      out.push_back(verdict_from_json(obj));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

void save_verdicts(const fs::path& path, std::span<const JudgeVerdict> verdicts) {
  std::vector<Json> rows;
  rows.reserve(verdicts.size());
  for (const auto& v : verdicts) rows.push_back(to_json(v));
  write_jsonl(path, rows);
}

// ---------------------------------------------------------------------------
// Rule backend.

std::vector<std::string> judge_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

namespace {

bool contains_phrase(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return false;
  return std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end()) != tokens.end();
}

bool contains_text(const std::string& haystack, std::string_view needle) {
  std::string lower(haystack.size(), '\0');
  std::transform(haystack.begin(), haystack.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower.find(needle) != std::string::npos;
}

}  // namespace

JudgeVocabulary JudgeVocabulary::parse(const Json& j) {
  JudgeVocabulary v;
  try {
    for (const auto& [attr_name, values] : j.at("attributes").items()) {
      auto attr = parse_attribute(attr_name);
      if (!attr) throw Error(ErrorCode::kSchema, "unknown attribute '" + attr_name + "' in vocabulary");
      auto& list = v.phrases_[*attr];
      for (const auto& [canon, synonyms] : values.items()) {
        list.emplace_back(judge_tokens(canon), canon);
        for (const auto& s : synonyms) list.emplace_back(judge_tokens(s.get<std::string>()), canon);
      }
    }
    for (const auto& [num, words] : j.at("ordinals").items()) {
      int n = 0;
      std::from_chars(num.data(), num.data() + num.size(), n);
      for (const auto& w : words) v.ordinals_.emplace_back(judge_tokens(w.get<std::string>()), n);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("judge vocabulary: ") + e.what());
  }
  return v;
}

JudgeVocabulary JudgeVocabulary::load(const fs::path& path) {
  try {
    return parse(Json::parse(read_text(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kSchema, path.string() + ": " + e.what());
  }
}

std::set<std::string> JudgeVocabulary::mentions(Attribute attribute,
                                                const std::vector<std::string>& tokens) const {
  std::set<std::string> out;
  auto it = phrases_.find(attribute);
  if (it == phrases_.end()) return out;
  for (const auto& [phrase, canon] : it->second) {
    if (contains_phrase(tokens, phrase)) out.insert(canon);
  }
  return out;
}

std::set<int> JudgeVocabulary::positions(const std::vector<std::string>& tokens) const {
  std::set<int> out;
  for (const auto& [phrase, n] : ordinals_) {
    if (contains_phrase(tokens, phrase)) out.insert(n);
  }
  return out;
}

std::string JudgeVocabulary::canonical(Attribute attribute, const std::string& value) const {
  const auto tokens = judge_tokens(value);
  auto it = phrases_.find(attribute);
  if (it != phrases_.end()) {
    for (const auto& [phrase, canon] : it->second) {
      if (phrase == tokens) return canon;
    }
  }
  std::string joined;
  for (const auto& t : tokens) joined += (joined.empty() ? "" : " ") + t;
  return joined;
}

std::pair<QaKind, Attribute> question_type(const ModelOutputRecord& r) {
  QaKind kind = r.kind ? *r.kind
                       : (contains_text(r.question, "what is the") ? QaKind::kOrdinalAttribute
                                                                   : QaKind::kSuperlative);
  if (r.attribute) return {kind, *r.attribute};
  static const std::pair<const char*, Attribute> kKeywords[] = {
      {"emotion", Attribute::kEmotion}, {"gender", Attribute::kGender},
      {"pitch", Attribute::kPitch},     {"speed", Attribute::kSpeed},
      {"speaking rate", Attribute::kSpeed}, {"energy", Attribute::kEnergy},
      {"loud", Attribute::kEnergy}};
  for (const auto& [word, attr] : kKeywords) {
    if (contains_text(r.question, word)) return {kind, attr};
  }
  throw Error(ErrorCode::kInvalidArgument, "cannot tell which attribute the question asks about");
}

Decision RuleJudge::judge_relevance(const ModelOutputRecord& r) {
  const auto [kind, attribute] = question_type(r);
  const auto tokens = judge_tokens(r.output);
  bool relevant;
  if (kind == QaKind::kSuperlative) {
    relevant = !vocab_.positions(tokens).empty();
  } else {
    relevant = !vocab_.mentions(attribute, tokens).empty() ||
               contains_phrase(tokens, judge_tokens(r.gold));
  }
  return {relevant, relevant ? "relevant" : "irrelevant"};
}

Decision RuleJudge::judge_alignment(const ModelOutputRecord& r) {
  if (r.gold.empty()) throw Error(ErrorCode::kInvalidArgument, "empty gold answer");
  const auto [kind, attribute] = question_type(r);
  const auto tokens = judge_tokens(r.output);
  bool aligned;
  if (kind == QaKind::kSuperlative) {
    int gold = 0;
    const auto first = r.gold.find_first_of("0123456789");
    if (first != std::string::npos) {
      std::from_chars(r.gold.data() + first, r.gold.data() + r.gold.size(), gold);
    } else if (auto p = vocab_.positions(judge_tokens(r.gold)); p.size() == 1) {
      gold = *p.begin();
    }
    const auto said = vocab_.positions(tokens);
    aligned = gold > 0 && said.size() == 1 && *said.begin() == gold;
  } else {
    const std::string canon = vocab_.canonical(attribute, r.gold);
    aligned = vocab_.mentions(attribute, tokens).count(canon) > 0 ||
              contains_phrase(tokens, judge_tokens(r.gold));
  }
  return {aligned, aligned ? "aligned" : "not aligned"};
}

// ---------------------------------------------------------------------------
// LLM backend.

std::optional<bool> parse_yes_no(std::string_view reply) {
  const auto tokens = judge_tokens(reply);
  if (tokens.empty()) return std::nullopt;
  if (tokens.front() == "yes") return true;
  if (tokens.front() == "no") return false;
  return std::nullopt;
}

namespace {
constexpr const char* kJudgeSystemPrompt =
    "You grade answers to questions about speakers in an audio clip. Reply with exactly one "
    "word: YES or NO.";
}

std::string LlmJudge::relevance_prompt(const ModelOutputRecord& r) {
  return fmt::format(
      "Question: {}\nResponse: {}\n\nIgnoring whether it is correct, does the response answer the "
      "kind of thing the question asks for (for example an emotion when asked about emotion, or a "
      "speaker position when asked which speaker)? Reply YES or NO.",
      r.question, r.output);
}

std::string LlmJudge::alignment_prompt(const ModelOutputRecord& r) {
  return fmt::format(
      "Question: {}\nGround truth answer: {}\nModel output: {}\n\nDoes the model output agree "
      "with the ground truth answer in meaning? Reply YES or NO.",
      r.question, r.gold, r.output);
}

Decision LlmJudge::ask(const std::string& prompt) {
  std::string last;
  for (int attempt = 0; attempt < max_reply_attempts_; ++attempt) {
    try {
      last = client_->complete(kJudgeSystemPrompt, prompt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUnparseableReply) throw;
      last = e.what();
      continue;
    }
    if (auto v = parse_yes_no(last)) return {*v, last};
    spdlog::debug("unparseable judge reply '{}' (attempt {})", last, attempt + 1);
  }
  throw Error(ErrorCode::kUnparseableReply, fmt::format("no YES/NO reply after {} attempts (last: '{}')",
                                                        max_reply_attempts_, last));
}

Decision LlmJudge::judge_relevance(const ModelOutputRecord& r) { return ask(relevance_prompt(r)); }

Decision LlmJudge::judge_alignment(const ModelOutputRecord& r) {
  if (r.gold.empty()) throw Error(ErrorCode::kInvalidArgument, "empty gold answer");
  return ask(alignment_prompt(r));
}

// ---------------------------------------------------------------------------

JudgeBatchResult judge_batch(std::span<const ModelOutputRecord> records, JudgeBackend& backend,
                             const JudgeBatchOptions& options) {
  if (options.concurrency < 1) throw Error(ErrorCode::kInvalidArgument, "concurrency must be >= 1");
  JudgeBatchResult result;
  result.verdicts.resize(records.size());
  parallel_for(records.size(), options.concurrency, [&](std::size_t i) {
    const auto& r = records[i];
    JudgeVerdict v;
    v.clip_id = r.clip_id;
    v.question = r.question;
    v.model_tag = r.model_tag;
    v.backend = backend.name();
    try {
      const Decision rel = backend.judge_relevance(r);
      const Decision ali = backend.judge_alignment(r);
      v.relevant = rel.value;
      v.aligned = ali.value;
      v.raw_judge_reply = "relevance: " + rel.raw + " | alignment: " + ali.raw;
    } catch (const Error& e) {
      v.failed = true;
      v.relevant = v.aligned = false;
      v.error = e.what();
    }
    if (v.aligned && !v.relevant) {
      v.aligned = false;
      v.conflict = true;
    }
    result.verdicts[i] = std::move(v);
  });
  for (const auto& v : result.verdicts) {
    if (v.failed) ++result.failed;
    if (v.conflict) {
      ++result.conflicts;
      spdlog::warn("judge conflict for ({}, {}, {}): aligned without relevant; stored as irrelevant",
                   v.clip_id, v.question, v.model_tag);
    }
  }
  if (!records.empty() &&
      static_cast<double>(result.failed) > options.max_failure_fraction * static_cast<double>(records.size())) {
    throw Error(ErrorCode::kJudgeAborted,
                fmt::format("{} of {} records failed to judge", result.failed, records.size()));
  }
  return result;
}

}  // namespace speechcaps

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

#ifndef SPEECHCAPS_JUDGE_HPP_
#define SPEECHCAPS_JUDGE_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "speechcaps/chat_client.hpp"
#include "speechcaps/promptgen.hpp"

namespace speechcaps {

struct ModelOutputRecord {
  std::string clip_id;
  std::string question;
  std::string gold;
  std::string output;
  std::string model_tag;
  // Optional hints; inferred from the question text when absent.
  std::optional<QaKind> kind;
  std::optional<Attribute> attribute;
};

Json to_json(const ModelOutputRecord& r);
ModelOutputRecord model_output_from_json(const Json& j);
/// Rejects duplicate (clip_id, question, model_tag) keys with kSchema.
std::vector<ModelOutputRecord> load_model_outputs(const std::filesystem::path& path);

struct JudgeVerdict {
  std::string clip_id;
  std::string question;
  std::string model_tag;
  bool relevant = false;
  bool aligned = false;
  std::string backend;
  std::string raw_judge_reply;
  bool failed = false;    // backend failed after retries; excluded from metrics
  bool conflict = false;  // backend said aligned but not relevant
  std::string error;

  bool operator==(const JudgeVerdict&) const = default;
};

Json to_json(const JudgeVerdict& v);
JudgeVerdict verdict_from_json(const Json& j);
std::vector<JudgeVerdict> load_verdicts(const std::filesystem::path& path);
void save_verdicts(const std::filesystem::path& path, std::span<const JudgeVerdict> verdicts);

struct Decision {
  bool value = false;
  std::string raw;
};

class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  virtual std::string name() const = 0;
  /// Did the output attempt to answer the question asked?
  virtual Decision judge_relevance(const ModelOutputRecord& record) = 0;
  /// Does the output agree with the gold answer?
  virtual Decision judge_alignment(const ModelOutputRecord& record) = 0;
};

/// Answer vocabulary for the rule judge: per attribute, canonical values with
/// their synonyms, plus the words that name speaker positions.
class JudgeVocabulary {
 public:
  static JudgeVocabulary load(const std::filesystem::path& path);
  static JudgeVocabulary parse(const Json& j);

  /// Canonical values of `attribute` mentioned in the (normalized) text.
  std::set<std::string> mentions(Attribute attribute, const std::vector<std::string>& tokens) const;
  /// Speaker positions mentioned in the text.
  std::set<int> positions(const std::vector<std::string>& tokens) const;
  /// Canonical form of a gold value (itself when not in the table).
  std::string canonical(Attribute attribute, const std::string& value) const;

 private:
  // attribute -> list of (phrase tokens, canonical value)
  std::map<Attribute, std::vector<std::pair<std::vector<std::string>, std::string>>> phrases_;
  std::vector<std::pair<std::vector<std::string>, int>> ordinals_;
};

/// Lowercases and splits on anything that is not a letter or digit.
std::vector<std::string> judge_tokens(std::string_view text);

/// (kind, attribute) of a question: the record's hints when present, else
/// inferred: "what is the ..." questions are ordinal, anything else is a
/// superlative; the attribute comes from keywords.
std::pair<QaKind, Attribute> question_type(const ModelOutputRecord& record);

/// Deterministic offline judge.
class RuleJudge final : public JudgeBackend {
 public:
  explicit RuleJudge(JudgeVocabulary vocabulary) : vocab_(std::move(vocabulary)) {}
  std::string name() const override { return "rule"; }
  Decision judge_relevance(const ModelOutputRecord& record) override;
  Decision judge_alignment(const ModelOutputRecord& record) override;

 private:
  JudgeVocabulary vocab_;
};

/// Prompts an external model for constrained YES/NO replies.
class LlmJudge final : public JudgeBackend {
 public:
  explicit LlmJudge(std::shared_ptr<const ChatClient> client, int max_reply_attempts = 3)
      : client_(std::move(client)), max_reply_attempts_(max_reply_attempts) {}
  std::string name() const override { return "llm"; }
  Decision judge_relevance(const ModelOutputRecord& record) override;
  Decision judge_alignment(const ModelOutputRecord& record) override;

  static std::string relevance_prompt(const ModelOutputRecord& record);
  static std::string alignment_prompt(const ModelOutputRecord& record);

 private:
  Decision ask(const std::string& prompt);

  std::shared_ptr<const ChatClient> client_;
  int max_reply_attempts_;
};

/// "yes"/"Yes."/"YES" -> true, "no" variants -> false, else nullopt.
std::optional<bool> parse_yes_no(std::string_view reply);

struct JudgeBatchOptions {
  std::size_t concurrency = 1;
  double max_failure_fraction = 0.05;
};

struct JudgeBatchResult {
  std::vector<JudgeVerdict> verdicts;  // input order
  std::size_t failed = 0;
  std::size_t conflicts = 0;
};

/// Judges every record. aligned-without-relevant verdicts are stored as
/// (false, false) and logged. Records whose backend calls fail are marked
/// failed; more than max_failure_fraction failures raise kJudgeAborted.
JudgeBatchResult judge_batch(std::span<const ModelOutputRecord> records, JudgeBackend& backend,
                             const JudgeBatchOptions& options = {});

}  // namespace speechcaps

#endif  // SPEECHCAPS_JUDGE_HPP_

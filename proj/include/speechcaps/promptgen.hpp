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

#ifndef SPEECHCAPS_PROMPTGEN_HPP_
#define SPEECHCAPS_PROMPTGEN_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "speechcaps/mixer.hpp"

namespace speechcaps {

/// Replaces ${name} placeholders. Throws kTemplate if a placeholder is left
/// unresolved or is not closed.
std::string fill_template(std::string_view text, const std::map<std::string, std::string>& values);

/// Caption-request template. Placeholders:
///   preamble/closing: ${count}
///   speaker_block:    ${index} ${gender} ${emotion} ${pitch} ${speed} ${energy} ${start} ${end}
///   overlap_hint/gap_hint: ${prev} ${next} ${duration}
struct PromptTemplate {
  std::string preamble;
  std::string speaker_block;
  std::string overlap_hint;
  std::string gap_hint;
  std::string closing;

  static PromptTemplate builtin();
  /// JSON object with the five keys above; missing keys keep the built-in text.
  static PromptTemplate load(const std::filesystem::path& path);
};

struct CaptionPrompt {
  std::string clip_id;
  std::string prompt_text;
  std::string metadata_block;  // canonical JSON of the clip metadata
  std::string backend;         // describer this prompt is routed to
};

/// Preamble, one attribute block per speaker in order, one relation hint per
/// boundary, closing. Throws kMissingLabels when a segment lacks a label.
CaptionPrompt build_caption_prompt(const ClipMetadata& meta,
                                   const PromptTemplate& tmpl = PromptTemplate::builtin());

Json to_json(const CaptionPrompt& p);

/// Routes clips to describer backends by quota, in order: the first
/// quotas[0].second clips go to quotas[0].first, and so on. A quota of 0 is
/// unbounded. Throws kInvalidArgument when the quotas cannot cover n.
std::vector<std::string> assign_backends(std::size_t n,
                                         std::span<const std::pair<std::string, std::size_t>> quotas);

/// Produces a description for a clip.
class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual std::string name() const = 0;
  virtual std::string describe(const CaptionPrompt& prompt, const ClipMetadata& meta) = 0;
};

/// Offline describer: rule-based sentence assembly from the labels.
class TemplateCaptioner final : public Captioner {
 public:
  std::string name() const override { return "template"; }
  std::string describe(const CaptionPrompt& prompt, const ClipMetadata& meta) override;
};

// ---------------------------------------------------------------------------
// Question-answer generation.

enum class QaKind { kOrdinalAttribute, kSuperlative };
enum class Extremum { kHighest, kLowest };

std::string_view to_string(QaKind k);
std::string_view to_string(Extremum e);

struct QAItem {
  std::string clip_id;
  std::string question;
  std::string answer;
  QaKind kind = QaKind::kOrdinalAttribute;
  Attribute attribute = Attribute::kEmotion;
  int num_speakers = 0;
  std::optional<int> target_order_index;  // ordinal questions
  std::optional<int> answer_order_index;  // superlative questions
  std::optional<Extremum> extremum;       // superlative questions
  std::optional<Gender> gender_scope;     // pitch superlatives

  bool operator==(const QAItem&) const = default;
};

Json to_json(const QAItem& item);
QAItem qa_from_json(const Json& j);
std::vector<QAItem> load_qa(const std::filesystem::path& path);
void save_qa(const std::filesystem::path& path, std::span<const QAItem> items);

struct QaPolicy {
  // Ordinal candidates are all (attribute, position) pairs; superlative
  // candidates are every well-posed (attribute, direction[, gender]). Each set
  // is down-sampled to these quotas per clip.
  std::size_t max_ordinal_per_clip = 4;
  std::size_t max_superlative_per_clip = 3;
};

/// Gold answer forms: the label word for ordinal questions, "<n> (the <ordinal>)"
/// for superlative ones.
std::string superlative_answer(int order_index);

/// Throws kMissingLabels when a segment lacks a pitch/speed/energy label or
/// an emotion.
std::vector<QAItem> generate_qa(const ClipMetadata& meta, std::uint64_t rng_seed,
                                const QaPolicy& policy = {});

/// Clip i uses derive_seed(rng_seed, i). Identical (clip_id, question) pairs are
/// kept once.
std::vector<QAItem> generate_qa_set(std::span<const ClipMetadata> clips, std::uint64_t rng_seed,
                                    const QaPolicy& policy = {}, std::size_t workers = 1);

}  // namespace speechcaps

#endif  // SPEECHCAPS_PROMPTGEN_HPP_

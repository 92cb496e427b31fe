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

#include "speechcaps/attributes.hpp"

#include <array>

namespace speechcaps {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kMissingAudio: return "MissingAudio";
    case ErrorCode::kSchema: return "SchemaError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kPoolTooSmall: return "PoolTooSmall";
    case ErrorCode::kUtteranceTooShort: return "UtteranceTooShort";
    case ErrorCode::kOffPaperBounds: return "OffPaperBounds";
    case ErrorCode::kEmptySignal: return "EmptySignal";
    case ErrorCode::kPopulationTooSmall: return "PopulationTooSmall";
    case ErrorCode::kDegenerateDistribution: return "DegenerateDistribution";
    case ErrorCode::kMissingThresholds: return "MissingThresholds";
    case ErrorCode::kTemplate: return "TemplateError";
    case ErrorCode::kMissingLabels: return "MissingLabels";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kUnparseableReply: return "UnparseableReply";
    case ErrorCode::kJudgeAborted: return "JudgeAborted";
    case ErrorCode::kKeyMismatch: return "KeyMismatch";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kStaleUpstream: return "StaleUpstream";
    case ErrorCode::kMissingUpstream: return "MissingUpstream";
  }
  return "Unknown";
}

std::string_view to_string(Gender g) { return g == Gender::kMale ? "male" : "female"; }

std::string_view to_string(Level l) {
  switch (l) {
    case Level::kLow: return "low";
    case Level::kMedium: return "medium";
    case Level::kHigh: return "high";
  }
  return "";
}

std::string_view to_string(Attribute a) {
  switch (a) {
    case Attribute::kGender: return "gender";
    case Attribute::kEmotion: return "emotion";
    case Attribute::kPitch: return "pitch";
    case Attribute::kSpeed: return "speed";
    case Attribute::kEnergy: return "energy";
  }
  return "";
}

std::string_view to_string(ProsodicAttribute a) { return to_string(as_attribute(a)); }

std::string_view speed_word(Level l) {
  switch (l) {
    case Level::kLow: return "slow";
    case Level::kMedium: return "medium";
    case Level::kHigh: return "fast";
  }
  return "";
}

std::string_view level_word(ProsodicAttribute a, Level l) {
  return a == ProsodicAttribute::kSpeed ? speed_word(l) : to_string(l);
}

std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "male") return Gender::kMale;
  if (s == "female") return Gender::kFemale;
  return std::nullopt;
}

std::optional<Level> parse_level(std::string_view s) {
  if (s == "low" || s == "slow") return Level::kLow;
  if (s == "medium") return Level::kMedium;
  if (s == "high" || s == "fast") return Level::kHigh;
  return std::nullopt;
}

std::optional<Attribute> parse_attribute(std::string_view s) {
  for (auto a : {Attribute::kGender, Attribute::kEmotion, Attribute::kPitch, Attribute::kSpeed,
                 Attribute::kEnergy}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

std::optional<ProsodicAttribute> parse_prosodic_attribute(std::string_view s) {
  if (s == "pitch") return ProsodicAttribute::kPitch;
  if (s == "speed") return ProsodicAttribute::kSpeed;
  if (s == "energy") return ProsodicAttribute::kEnergy;
  return std::nullopt;
}

Attribute as_attribute(ProsodicAttribute a) {
  switch (a) {
    case ProsodicAttribute::kPitch: return Attribute::kPitch;
    case ProsodicAttribute::kSpeed: return Attribute::kSpeed;
    case ProsodicAttribute::kEnergy: return Attribute::kEnergy;
  }
  return Attribute::kPitch;
}

std::string ordinal_word(int position) {
  static constexpr std::array<const char*, 10> kWords = {
      "first", "second", "third", "fourth", "fifth",
      "sixth", "seventh", "eighth", "ninth", "tenth"};
  if (position >= 1 && position <= static_cast<int>(kWords.size())) return kWords[position - 1];
  return std::to_string(position) + "th";
}

}  // namespace speechcaps

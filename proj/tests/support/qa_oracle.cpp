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

#include "support/qa_oracle.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <vector>

namespace speechcaps::testing {

namespace {

std::vector<std::string> words(const std::string& text) {
  std::string clean;
  for (char c : text) {
    clean.push_back(std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(c)) : ' ');
  }
  std::istringstream in(clean);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

bool has(const std::vector<std::string>& ws, const std::string& w) {
  return std::find(ws.begin(), ws.end(), w) != ws.end();
}

const char* kOrdinals[] = {"first", "second", "third", "fourth", "fifth"};

std::string level_text(std::optional<Level> l, bool speed) {
  if (!l) return "?";
  switch (*l) {
    case Level::kLow: return speed ? "slow" : "low";
    case Level::kMedium: return "medium";
    case Level::kHigh: return speed ? "fast" : "high";
  }
  return "?";
}

}  // namespace

OracleResult oracle_answer(const std::string& question, const ClipMetadata& meta) {
  const auto ws = words(question);
  const bool pitch = has(ws, "pitch"), speed = has(ws, "speed"), energy = has(ws, "energy");
  const bool emotion = has(ws, "emotion"), gender = has(ws, "gender");
  if (pitch + speed + energy + emotion + gender != 1) return {std::nullopt, "attribute not identifiable"};

  std::string lowered(question.size(), ' ');
  std::transform(question.begin(), question.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  if (lowered.find("what is the") != std::string::npos) {
    int pos = 0;
    for (int i = 0; i < 5; ++i) {
      if (has(ws, kOrdinals[i])) pos = pos == 0 ? i + 1 : -1;
    }
    if (pos <= 0 || pos > static_cast<int>(meta.segments.size())) return {std::nullopt, "bad position"};
    // Speaking order is order of start time.
    std::vector<const SpeakerSegment*> order;
    for (const auto& s : meta.segments) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->start_s < b->start_s; });
    const SpeakerSegment& s = *order[static_cast<std::size_t>(pos - 1)];
    if (gender) return {s.gender == Gender::kMale ? "male" : "female", ""};
    if (emotion) return {s.emotion, ""};
    if (pitch) return {level_text(s.pitch, false), ""};
    if (speed) return {level_text(s.speed, true), ""};
    return {level_text(s.energy, false), ""};
  }

  const bool highest = has(ws, "highest"), lowest = has(ws, "lowest");
  if (highest == lowest) return {std::nullopt, "no direction"};
  std::optional<Gender> only;
  if (has(ws, "male")) only = Gender::kMale;
  if (has(ws, "female")) only = only ? std::optional<Gender>() : Gender::kFemale;
  if (has(ws, "male") && has(ws, "female")) return {std::nullopt, "two genders"};

  std::vector<std::pair<int, int>> eligible;  // (value, position)
  std::vector<const SpeakerSegment*> order;
  for (const auto& s : meta.segments) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->start_s < b->start_s; });
  for (std::size_t i = 0; i < order.size(); ++i) {
    const SpeakerSegment& s = *order[i];
    if (only && s.gender != *only) continue;
    const std::optional<Level> l = pitch ? s.pitch : speed ? s.speed : s.energy;
    if (!l) return {std::nullopt, "missing label"};
    eligible.emplace_back(static_cast<int>(*l), static_cast<int>(i) + 1);
  }
  if (eligible.size() < 2) return {std::nullopt, "fewer than two eligible speakers"};
  int best = eligible[0].first;
  for (const auto& e : eligible) best = highest ? std::max(best, e.first) : std::min(best, e.first);
  int count = 0, who = 0;
  for (const auto& e : eligible) {
    if (e.first == best) {
      ++count;
      who = e.second;
    }
  }
  if (count != 1) return {std::nullopt, "tied extremum"};
  return {std::to_string(who) + " (the " + kOrdinals[who - 1] + ")", ""};
}

}  // namespace speechcaps::testing

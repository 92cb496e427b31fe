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

#ifndef SPEECHCAPS_ATTRIBUTES_HPP_
#define SPEECHCAPS_ATTRIBUTES_HPP_

#include <optional>
#include <string>
#include <string_view>

#include "speechcaps/error.hpp"

namespace speechcaps {

enum class Gender { kMale, kFemale };

// Ordered: low < medium < high.
enum class Level { kLow = 0, kMedium = 1, kHigh = 2 };

enum class Attribute { kGender, kEmotion, kPitch, kSpeed, kEnergy };

// The three measured (continuous) attributes that get banded.
enum class ProsodicAttribute { kPitch, kSpeed, kEnergy };

std::string_view to_string(Gender g);
std::string_view to_string(Level l);
std::string_view to_string(Attribute a);
std::string_view to_string(ProsodicAttribute a);

// Speed is rendered slow/medium/fast in clip metadata, prompts and QA.
std::string_view speed_word(Level l);
std::string_view level_word(ProsodicAttribute a, Level l);

std::optional<Gender> parse_gender(std::string_view s);
// Accepts low/medium/high and the speed words slow/fast.
std::optional<Level> parse_level(std::string_view s);
std::optional<Attribute> parse_attribute(std::string_view s);
std::optional<ProsodicAttribute> parse_prosodic_attribute(std::string_view s);

Attribute as_attribute(ProsodicAttribute a);

// "first", "second", ... for 1-based positions.
std::string ordinal_word(int position);

}  // namespace speechcaps

#endif  // SPEECHCAPS_ATTRIBUTES_HPP_

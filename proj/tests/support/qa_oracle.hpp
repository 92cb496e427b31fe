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

#ifndef SPEECHCAPS_TESTS_SUPPORT_QA_ORACLE_HPP_
#define SPEECHCAPS_TESTS_SUPPORT_QA_ORACLE_HPP_

#include <optional>
#include <string>

#include "speechcaps/mixer.hpp"
#include "speechcaps/promptgen.hpp"

namespace speechcaps::testing {

struct OracleResult {
  std::optional<std::string> answer;  // nullopt: the question is not well posed
  std::string why;
};

/// Re-derives the answer to a generated question from the question text and
/// the clip metadata alone, by brute force over the segments.
OracleResult oracle_answer(const std::string& question, const ClipMetadata& meta);

}  // namespace speechcaps::testing

#endif  // SPEECHCAPS_TESTS_SUPPORT_QA_ORACLE_HPP_

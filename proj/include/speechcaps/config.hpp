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

#ifndef SPEECHCAPS_CONFIG_HPP_
#define SPEECHCAPS_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "speechcaps/jsonl.hpp"
#include "speechcaps/labeler.hpp"
#include "speechcaps/mixer.hpp"
#include "speechcaps/promptgen.hpp"

namespace speechcaps {

inline constexpr const char* kToolVersion = "0.1.0";

struct JudgeSettings {
  std::string backend = "rule";  // rule | llm
  std::filesystem::path vocabulary_path;
  std::string endpoint;
  std::string model;
  std::string api_key;  // from the environment only
  std::size_t concurrency = 1;
  double max_failure_fraction = 0.05;
  int max_attempts = 5;
  double timeout_s = 60.0;
  std::optional<std::filesystem::path> audit_path;
};

struct RunConfig {
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  bool allow_nonpaper_bounds = false;
  MixPolicy mix;
  LabelingOptions labeling;
  QaPolicy qa;
  std::optional<std::filesystem::path> template_path;
  // Describer routing for caption prompts; quota 0 means "the rest".
  std::vector<std::pair<std::string, std::size_t>> caption_backends = {{"template", 0}};
  std::filesystem::path lexicon_path;
  JudgeSettings judge;

  /// Defaults with data paths pointing at the bundled data directory.
  static RunConfig defaults();
  /// Overlays `j` onto the defaults. Unknown keys and an "api_key" entry are
  /// rejected with kSchema. Relative paths resolve against `base_dir`.
  static RunConfig from_json(const Json& j, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  /// Picks up SPEECHCAPS_API_KEY.
  void apply_environment();
  /// Throws kOffPaperBounds for off-reference mixing ranges unless allowed,
  /// and kInvalidArgument for malformed settings.
  void validate() const;

  Json to_json() const;
};

}  // namespace speechcaps

#endif  // SPEECHCAPS_CONFIG_HPP_

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

#ifndef SPEECHCAPS_JSONL_HPP_
#define SPEECHCAPS_JSONL_HPP_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace speechcaps {

using Json = nlohmann::ordered_json;

/// Calls fn(object, line_number) for every non-blank line. Lines that are not
/// JSON objects raise Error(kSchema) naming the line.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& fn);

std::vector<Json> read_jsonl(const std::filesystem::path& path);

/// Writes one compact object per line, creating parent directories.
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

/// Writes text verbatim, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace speechcaps

#endif  // SPEECHCAPS_JSONL_HPP_

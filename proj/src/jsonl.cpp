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

#include "speechcaps/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "speechcaps/error.hpp"

namespace speechcaps {

namespace fs = std::filesystem;

void for_each_jsonl(const fs::path& path, const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kSchema, path.string() + ":" + std::to_string(line_no) +
                                          ": invalid JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) {
      throw Error(ErrorCode::kSchema,
                  path.string() + ":" + std::to_string(line_no) + ": expected a JSON object");
    }
    fn(obj, line_no);
  }
}

std::vector<Json> read_jsonl(const fs::path& path) {
  std::vector<Json> rows;
  for_each_jsonl(path, [&](const Json& obj, std::size_t) { rows.push_back(obj); });
  return rows;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "failed while writing '" + path.string() + "'");
}

void write_jsonl(const fs::path& path, const std::vector<Json>& rows) {
  std::string text;
  for (const auto& row : rows) {
    text += row.dump();
    text += '\n';
  }
  write_text(path, text);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace speechcaps

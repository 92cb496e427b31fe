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

#include "speechcaps/corpus.hpp"

#include <cmath>
#include <unordered_set>

#include "speechcaps/error.hpp"
#include "speechcaps/wav.hpp"

namespace speechcaps {

namespace fs = std::filesystem;

namespace {

constexpr double kDurationTolerance_s = 1e-3;

[[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorCode::kSchema, what); }

std::string require_string(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(std::string("missing field '") + key + "'");
  if (!it->is_string()) schema_error(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) schema_error(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::optional<Level> optional_level(const Json& obj, const char* key) {
  auto s = optional_string(obj, key);
  if (!s) return std::nullopt;
  auto level = parse_level(*s);
  if (!level) schema_error(std::string("field '") + key + "' has invalid level '" + *s + "'");
  return level;
}

}  // namespace

std::optional<Level> UtteranceRecord::label(ProsodicAttribute a) const {
  switch (a) {
    case ProsodicAttribute::kPitch: return pitch_label;
    case ProsodicAttribute::kSpeed: return speed_label;
    case ProsodicAttribute::kEnergy: return energy_label;
  }
  return std::nullopt;
}

void UtteranceRecord::set_label(ProsodicAttribute a, std::optional<Level> level) {
  switch (a) {
    case ProsodicAttribute::kPitch: pitch_label = level; break;
    case ProsodicAttribute::kSpeed: speed_label = level; break;
    case ProsodicAttribute::kEnergy: energy_label = level; break;
  }
}

std::optional<std::size_t> Manifest::find(const std::string& id) const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].id == id) return i;
  }
  return std::nullopt;
}

Json to_json(const UtteranceRecord& r) {
  Json j;
  j["id"] = r.id;
  j["speaker_id"] = r.speaker_id;
  j["gender"] = to_string(r.gender);
  j["emotion"] = r.emotion;
  if (r.pitch_label) j["pitch_label"] = to_string(*r.pitch_label);
  if (r.speed_label) j["speed_label"] = to_string(*r.speed_label);
  if (r.energy_label) j["energy_label"] = to_string(*r.energy_label);
  if (r.style_prompt) j["style_prompt"] = *r.style_prompt;
  j["transcript"] = r.transcript;
  j["audio_path"] = r.audio_path;
  j["duration_s"] = r.duration_s;
  j["sample_rate_hz"] = r.sample_rate_hz;
  return j;
}

UtteranceRecord record_from_json(const Json& obj, const fs::path& base_dir) {
  UtteranceRecord r;
  r.id = require_string(obj, "id");
  if (r.id.empty()) schema_error("field 'id' must be non-empty");
  r.speaker_id = require_string(obj, "speaker_id");
  const std::string gender = require_string(obj, "gender");
  auto g = parse_gender(gender);
  if (!g) schema_error("field 'gender' must be 'male' or 'female', got '" + gender + "'");
  r.gender = *g;
  r.emotion = require_string(obj, "emotion");
  r.pitch_label = optional_level(obj, "pitch_label");
  r.speed_label = optional_level(obj, "speed_label");
  r.energy_label = optional_level(obj, "energy_label");
  r.style_prompt = optional_string(obj, "style_prompt");
  r.transcript = require_string(obj, "transcript");
  const fs::path audio = require_string(obj, "audio_path");
  r.audio_path = (audio.is_relative() && !base_dir.empty() ? base_dir / audio : audio)
                     .lexically_normal()
                     .string();
  if (auto it = obj.find("duration_s"); it != obj.end() && !it->is_null()) {
    if (!it->is_number()) schema_error("field 'duration_s' must be a number");
    r.duration_s = it->get<double>();
    if (!(r.duration_s > 0.0)) schema_error("field 'duration_s' must be positive");
  }
  if (auto it = obj.find("sample_rate_hz"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer()) schema_error("field 'sample_rate_hz' must be an integer");
    r.sample_rate_hz = it->get<int>();
    if (r.sample_rate_hz <= 0) schema_error("field 'sample_rate_hz' must be positive");
  }
  return r;
}

Manifest load_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::kIo, "manifest '" + path.string() + "' not found");
  Manifest manifest;
  manifest.source_tag = path.string();
  const fs::path base_dir = path.parent_path();
  std::unordered_set<std::string> seen;
  for_each_jsonl(path, [&](const Json& obj, std::size_t line) {
    const std::string where = path.string() + ":" + std::to_string(line) + ": ";
    UtteranceRecord r;
    try {
      r = record_from_json(obj, base_dir);
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
    if (!seen.insert(r.id).second) {
      throw Error(ErrorCode::kDuplicateId, where + "duplicate id '" + r.id + "'");
    }
    if (!fs::exists(r.audio_path)) {
      throw Error(ErrorCode::kMissingAudio, where + "audio '" + r.audio_path + "' not found");
    }
    WavInfo info;
    try {
      info = read_wav_info(r.audio_path);
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
    if (info.frames == 0) throw Error(ErrorCode::kSchema, where + "audio has no samples");
    if (r.sample_rate_hz == 0) {
      r.sample_rate_hz = info.sample_rate_hz;
    } else if (r.sample_rate_hz != info.sample_rate_hz) {
      throw Error(ErrorCode::kSchema, where + "sample_rate_hz " + std::to_string(r.sample_rate_hz) +
                                          " disagrees with audio header (" +
                                          std::to_string(info.sample_rate_hz) + ")");
    }
    const double measured = info.duration_s();
    if (r.duration_s == 0.0) {
      r.duration_s = measured;
    } else if (std::abs(r.duration_s - measured) > kDurationTolerance_s) {
      throw Error(ErrorCode::kSchema, where + "duration_s " + std::to_string(r.duration_s) +
                                          " disagrees with audio length " + std::to_string(measured));
    }
    manifest.records.push_back(std::move(r));
  });
  return manifest;
}

void save_manifest(const fs::path& path, const Manifest& manifest) {
  std::vector<Json> rows;
  rows.reserve(manifest.records.size());
  // Audio paths are written relative to the manifest so that it can be
  // reloaded from wherever it ends up.
  const fs::path base = fs::absolute(path).parent_path();
  for (const auto& r : manifest.records) {
    Json j = to_json(r);
    const fs::path rel = fs::absolute(r.audio_path).lexically_normal().lexically_relative(base);
    if (!rel.empty()) j["audio_path"] = rel.generic_string();
    rows.push_back(std::move(j));
  }
  write_jsonl(path, rows);
}

Waveform load_audio(const UtteranceRecord& record) { return read_wav(record.audio_path); }

}  // namespace speechcaps

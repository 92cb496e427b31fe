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

#ifndef SPEECHCAPS_CORPUS_HPP_
#define SPEECHCAPS_CORPUS_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "speechcaps/attributes.hpp"
#include "speechcaps/jsonl.hpp"
#include "speechcaps/signal.hpp"

namespace speechcaps {

/// One single-talker utterance. `audio_path` is stored resolved against the
/// manifest's directory.
struct UtteranceRecord {
  std::string id;
  std::string speaker_id;
  Gender gender = Gender::kFemale;
  std::string emotion;
  std::optional<Level> pitch_label;
  std::optional<Level> speed_label;
  std::optional<Level> energy_label;
  std::optional<std::string> style_prompt;
  std::string transcript;
  std::string audio_path;
  double duration_s = 0.0;
  int sample_rate_hz = 0;

  std::optional<Level> label(ProsodicAttribute a) const;
  void set_label(ProsodicAttribute a, std::optional<Level> level);

  bool operator==(const UtteranceRecord&) const = default;
};

struct Manifest {
  std::vector<UtteranceRecord> records;
  std::string source_tag;

  /// Index of the record with the given id, if any.
  std::optional<std::size_t> find(const std::string& id) const;
};

Json to_json(const UtteranceRecord& r);

/// Parses one manifest object. `base_dir` resolves relative audio paths.
/// Does not touch the audio file. Throws Error(kSchema).
UtteranceRecord record_from_json(const Json& obj, const std::filesystem::path& base_dir = {});

/// Reads and validates a JSONL manifest: schema, unique ids, audio presence,
/// and duration/sample rate against the WAV header (duration filled in when
/// absent, checked within 1 ms otherwise).
Manifest load_manifest(const std::filesystem::path& path);

void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Mono samples at the file's native rate.
Waveform load_audio(const UtteranceRecord& record);

}  // namespace speechcaps

#endif  // SPEECHCAPS_CORPUS_HPP_

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

#include "speechcaps/prosody.hpp"

#include "speechcaps/parallel.hpp"

namespace speechcaps {

std::optional<double> ProsodyMeasurement::value(ProsodicAttribute a) const {
  switch (a) {
    case ProsodicAttribute::kPitch: return pitch_hz;
    case ProsodicAttribute::kSpeed: return speaking_rate_pps;
    case ProsodicAttribute::kEnergy: return energy_db;
  }
  return std::nullopt;
}

ProsodyMeasurement measure(const UtteranceRecord& record, const Waveform& wave,
                           const PhonemeLexicon& lexicon, const ProsodyOptions& opt) {
  ProsodyMeasurement m;
  m.utterance_id = record.id;
  m.speaker_id = record.speaker_id;
  m.gender = record.gender;
  const PitchEstimate pitch = estimate_pitch(wave, opt.pitch);
  m.pitch_hz = pitch.pitch_hz;
  m.voiced_fraction = pitch.voiced_fraction;
  m.energy_db = compute_energy(wave, opt.energy);
  m.phoneme_count = count_phonemes(record.transcript, lexicon);
  const double duration = record.duration_s > 0 ? record.duration_s : wave.duration_s();
  m.speaking_rate_pps = duration > 0 ? m.phoneme_count / duration : 0.0;
  return m;
}

std::vector<ProsodyMeasurement> measure_batch(const Manifest& manifest, const PhonemeLexicon& lexicon,
                                              std::size_t workers, const ProsodyOptions& opt) {
  std::vector<ProsodyMeasurement> out(manifest.records.size());
  parallel_for(out.size(), workers, [&](std::size_t i) {
    const auto& r = manifest.records[i];
    out[i] = measure(r, load_audio(r), lexicon, opt);
  });
  return out;
}

Json to_json(const ProsodyMeasurement& m) {
  Json j;
  j["utterance_id"] = m.utterance_id;
  j["speaker_id"] = m.speaker_id;
  j["gender"] = to_string(m.gender);
  j["pitch_hz"] = m.pitch_hz ? Json(*m.pitch_hz) : Json(nullptr);
  j["energy_db"] = m.energy_db;
  j["speaking_rate_pps"] = m.speaking_rate_pps;
  j["voiced_fraction"] = m.voiced_fraction;
  j["phoneme_count"] = m.phoneme_count;
  return j;
}

ProsodyMeasurement measurement_from_json(const Json& j) {
  try {
    ProsodyMeasurement m;
    m.utterance_id = j.at("utterance_id").get<std::string>();
    m.speaker_id = j.value("speaker_id", std::string());
    if (auto g = parse_gender(j.value("gender", std::string("female")))) {
      m.gender = *g;
    } else {
      throw Error(ErrorCode::kSchema, "invalid gender in measurement '" + m.utterance_id + "'");
    }
    if (auto it = j.find("pitch_hz"); it != j.end() && !it->is_null()) m.pitch_hz = it->get<double>();
    m.energy_db = j.at("energy_db").get<double>();
    m.speaking_rate_pps = j.at("speaking_rate_pps").get<double>();
    m.voiced_fraction = j.value("voiced_fraction", 0.0);
    m.phoneme_count = j.value("phoneme_count", 0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("measurement: ") + e.what());
  }
}

std::vector<ProsodyMeasurement> load_measurements(const std::filesystem::path& path) {
  std::vector<ProsodyMeasurement> out;
  for_each_jsonl(path, [&](const Json& obj, std::size_t line) {
    try {
      out.push_back(measurement_from_json(obj));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

void save_measurements(const std::filesystem::path& path, std::span<const ProsodyMeasurement> ms) {
  std::vector<Json> rows;
  rows.reserve(ms.size());
  for (const auto& m : ms) rows.push_back(to_json(m));
  write_jsonl(path, rows);
}

}  // namespace speechcaps

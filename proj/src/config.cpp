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

#include "speechcaps/config.hpp"

#include <cstdlib>
#include <set>

#include <fmt/format.h>

#include "speechcaps/chat_client.hpp"
#include "speechcaps/error.hpp"

namespace speechcaps {

namespace fs = std::filesystem;

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kSchema, where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "api_key") {
      throw Error(ErrorCode::kSchema, fmt::format("{}: api keys are read from {} only", where, kApiKeyEnv));
    }
    if (!known.count(key)) throw Error(ErrorCode::kSchema, fmt::format("{}: unknown key '{}'", where, key));
  }
}

template <typename T>
void take(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  return (p.is_relative() && !base.empty() ? base / p : p).lexically_normal();
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.lexicon_path = fs::path(SPEECHCAPS_DATA_DIR) / "lexicon" / "reference.dict";
  c.judge.vocabulary_path = fs::path(SPEECHCAPS_DATA_DIR) / "judge" / "vocabulary.json";
  return c;
}

RunConfig RunConfig::from_json(const Json& j, const fs::path& base_dir) {
  RunConfig c = defaults();
  try {
    reject_unknown(j, {"master_seed", "workers", "allow_nonpaper_bounds", "mix", "labeling", "qa",
                       "template_path", "caption_backends", "lexicon_path", "judge"},
                   "config");
    take(j, "master_seed", c.master_seed);
    take(j, "workers", c.workers);
    take(j, "allow_nonpaper_bounds", c.allow_nonpaper_bounds);
    if (auto it = j.find("mix"); it != j.end()) {
      const Json& m = *it;
      reject_unknown(m, {"target_rate_hz", "speaker_count_weights", "overlap_probability", "gap_min_s",
                         "gap_max_s", "overlap_min_s", "overlap_max_s", "clamp_overlap", "clamp_margin_s",
                         "max_utterance_s", "peak_limit", "max_retries"},
                     "config.mix");
      take(m, "target_rate_hz", c.mix.target_rate_hz);
      take(m, "speaker_count_weights", c.mix.speaker_count_weights);
      take(m, "overlap_probability", c.mix.overlap_probability);
      take(m, "gap_min_s", c.mix.gap_min_s);
      take(m, "gap_max_s", c.mix.gap_max_s);
      take(m, "overlap_min_s", c.mix.overlap_min_s);
      take(m, "overlap_max_s", c.mix.overlap_max_s);
      take(m, "clamp_overlap", c.mix.clamp_overlap);
      take(m, "clamp_margin_s", c.mix.clamp_margin_s);
      take(m, "max_utterance_s", c.mix.max_utterance_s);
      take(m, "peak_limit", c.mix.peak_limit);
      take(m, "max_retries", c.mix.max_retries);
    }
    if (auto it = j.find("labeling"); it != j.end()) {
      reject_unknown(*it, {"band_width", "per_speaker"}, "config.labeling");
      take(*it, "band_width", c.labeling.band_width);
      take(*it, "per_speaker", c.labeling.per_speaker);
    }
    if (auto it = j.find("qa"); it != j.end()) {
      reject_unknown(*it, {"max_ordinal_per_clip", "max_superlative_per_clip"}, "config.qa");
      take(*it, "max_ordinal_per_clip", c.qa.max_ordinal_per_clip);
      take(*it, "max_superlative_per_clip", c.qa.max_superlative_per_clip);
    }
    if (auto it = j.find("template_path"); it != j.end() && !it->is_null()) {
      c.template_path = resolve(it->get<std::string>(), base_dir);
    }
    if (auto it = j.find("caption_backends"); it != j.end()) {
      c.caption_backends.clear();
      for (const auto& entry : *it) {
        c.caption_backends.emplace_back(entry.at("name").get<std::string>(),
                                        entry.value("quota", std::size_t{0}));
      }
    }
    if (auto it = j.find("lexicon_path"); it != j.end()) {
      c.lexicon_path = resolve(it->get<std::string>(), base_dir);
    }
    if (auto it = j.find("judge"); it != j.end()) {
      const Json& m = *it;
      reject_unknown(m, {"backend", "vocabulary_path", "endpoint", "model", "concurrency",
                         "max_failure_fraction", "max_attempts", "timeout_s", "audit_path"},
                     "config.judge");
      take(m, "backend", c.judge.backend);
      if (auto v = m.find("vocabulary_path"); v != m.end()) {
        c.judge.vocabulary_path = resolve(v->get<std::string>(), base_dir);
      }
      take(m, "endpoint", c.judge.endpoint);
      take(m, "model", c.judge.model);
      take(m, "concurrency", c.judge.concurrency);
      take(m, "max_failure_fraction", c.judge.max_failure_fraction);
      take(m, "max_attempts", c.judge.max_attempts);
      take(m, "timeout_s", c.judge.timeout_s);
      if (auto v = m.find("audit_path"); v != m.end() && !v->is_null()) {
        c.judge.audit_path = resolve(v->get<std::string>(), base_dir);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kSchema, path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

void RunConfig::apply_environment() {
  if (const char* key = std::getenv(kApiKeyEnv); key != nullptr) judge.api_key = key;
}

void RunConfig::validate() const {
  mix.validate();
  if (!mix.within_paper_bounds() && !allow_nonpaper_bounds) {
    throw Error(ErrorCode::kOffPaperBounds,
                fmt::format("gap [{}, {}] s / overlap [{}, {}] s leave the reference ranges "
                            "[{}, {}] / [{}, {}]; pass --allow-nonpaper-bounds to run anyway",
                            mix.gap_min_s, mix.gap_max_s, mix.overlap_min_s, mix.overlap_max_s,
                            kPaperGapMin_s, kPaperGapMax_s, kPaperOverlapMin_s, kPaperOverlapMax_s));
  }
  if (workers < 1) throw Error(ErrorCode::kInvalidArgument, "workers must be >= 1");
  if (!(labeling.band_width > 0.0 && labeling.band_width <= 1.0 / 3.0)) {
    throw Error(ErrorCode::kInvalidArgument, "band_width must lie in (0, 1/3]");
  }
  if (judge.backend != "rule" && judge.backend != "llm") {
    throw Error(ErrorCode::kInvalidArgument, "judge backend must be 'rule' or 'llm'");
  }
  if (judge.concurrency < 1) throw Error(ErrorCode::kInvalidArgument, "judge concurrency must be >= 1");
  if (caption_backends.empty()) throw Error(ErrorCode::kInvalidArgument, "no caption backends configured");
}

Json RunConfig::to_json() const {
  Json j;
  j["master_seed"] = master_seed;
  j["workers"] = workers;
  j["allow_nonpaper_bounds"] = allow_nonpaper_bounds;
  j["mix"] = {{"target_rate_hz", mix.target_rate_hz},
              {"speaker_count_weights", mix.speaker_count_weights},
              {"overlap_probability", mix.overlap_probability},
              {"gap_min_s", mix.gap_min_s},
              {"gap_max_s", mix.gap_max_s},
              {"overlap_min_s", mix.overlap_min_s},
              {"overlap_max_s", mix.overlap_max_s},
              {"clamp_overlap", mix.clamp_overlap},
              {"clamp_margin_s", mix.clamp_margin_s},
              {"max_utterance_s", mix.max_utterance_s},
              {"peak_limit", mix.peak_limit},
              {"max_retries", mix.max_retries}};
  j["labeling"] = {{"band_width", labeling.band_width}, {"per_speaker", labeling.per_speaker}};
  j["qa"] = {{"max_ordinal_per_clip", qa.max_ordinal_per_clip},
             {"max_superlative_per_clip", qa.max_superlative_per_clip}};
  j["template_path"] = template_path ? Json(template_path->generic_string()) : Json(nullptr);
  Json backends = Json::array();
  for (const auto& [name, quota] : caption_backends) backends.push_back({{"name", name}, {"quota", quota}});
  j["caption_backends"] = std::move(backends);
  j["lexicon_path"] = lexicon_path.generic_string();
  j["judge"] = {{"backend", judge.backend},
                {"vocabulary_path", judge.vocabulary_path.generic_string()},
                {"endpoint", judge.endpoint},
                {"model", judge.model},
                {"concurrency", judge.concurrency},
                {"max_failure_fraction", judge.max_failure_fraction},
                {"max_attempts", judge.max_attempts},
                {"timeout_s", judge.timeout_s},
                {"audit_path", judge.audit_path ? Json(judge.audit_path->generic_string()) : Json(nullptr)}};
  return j;
}

}  // namespace speechcaps

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

#include "speechcaps/mixer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>

#include <spdlog/spdlog.h>

#include "speechcaps/error.hpp"
#include "speechcaps/parallel.hpp"
#include "speechcaps/rng.hpp"
#include "speechcaps/wav.hpp"

namespace speechcaps {

namespace fs = std::filesystem;

std::string_view to_string(BoundaryMode m) { return m == BoundaryMode::kGap ? "gap" : "overlap"; }

std::optional<BoundaryMode> parse_boundary_mode(std::string_view s) {
  if (s == "gap") return BoundaryMode::kGap;
  if (s == "overlap") return BoundaryMode::kOverlap;
  return std::nullopt;
}

bool MixPolicy::within_paper_bounds() const {
  return gap_min_s >= kPaperGapMin_s && gap_max_s <= kPaperGapMax_s &&
         overlap_min_s >= kPaperOverlapMin_s && overlap_max_s <= kPaperOverlapMax_s;
}

void MixPolicy::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (target_rate_hz <= 0) bad("target rate must be positive");
  if (speaker_count_weights[0] < 0 || speaker_count_weights[1] < 0 ||
      speaker_count_weights[0] + speaker_count_weights[1] <= 0) {
    bad("speaker count weights must be non-negative with a positive sum");
  }
  if (overlap_probability < 0 || overlap_probability > 1) bad("overlap probability must be in [0, 1]");
  if (gap_min_s < 0 || gap_max_s < gap_min_s) bad("gap range must satisfy 0 <= min <= max");
  if (overlap_min_s <= 0 || overlap_max_s < overlap_min_s) {
    bad("overlap range must satisfy 0 < min <= max");
  }
  if (clamp_margin_s < 0) bad("clamp margin must be non-negative");
  if (!(peak_limit > 0 && peak_limit <= 1)) bad("peak limit must be in (0, 1]");
  if (max_retries < 0) bad("max_retries must be non-negative");
  if (workers < 1) bad("workers must be >= 1");
}

std::optional<Level> SpeakerSegment::level(ProsodicAttribute a) const {
  switch (a) {
    case ProsodicAttribute::kPitch: return pitch;
    case ProsodicAttribute::kSpeed: return speed;
    case ProsodicAttribute::kEnergy: return energy;
  }
  return std::nullopt;
}

namespace {

void put_level(Json& j, const char* key, ProsodicAttribute a, const std::optional<Level>& l) {
  if (l) j[key] = level_word(a, *l);
}

std::optional<Level> get_level(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  auto level = parse_level(it->get<std::string>());
  if (!level) throw Error(ErrorCode::kSchema, std::string("invalid level for '") + key + "'");
  return level;
}

}  // namespace

Json to_json(const ClipMetadata& meta) {
  Json j;
  j["clip_id"] = meta.clip_id;
  j["audio_path"] = meta.audio_path;
  j["sample_rate_hz"] = meta.sample_rate_hz;
  j["num_samples"] = meta.num_samples;
  j["total_duration_s"] = meta.total_duration_s;
  j["seed"] = meta.seed;
  j["scale_factor"] = meta.scale_factor;
  j["off_paper_bounds"] = meta.off_paper_bounds;
  Json modes = Json::array();
  for (auto m : meta.boundary_modes) modes.push_back(to_string(m));
  j["boundary_modes"] = modes;
  j["boundary_durations_s"] = meta.boundary_durations_s;
  Json speakers = Json::array();
  for (const auto& s : meta.segments) {
    Json sj;
    sj["order_index"] = s.order_index;
    sj["utterance_id"] = s.utterance_id;
    sj["speaker_id"] = s.speaker_id;
    sj["gender"] = to_string(s.gender);
    sj["emotion"] = s.emotion;
    put_level(sj, "pitch", ProsodicAttribute::kPitch, s.pitch);
    put_level(sj, "speed", ProsodicAttribute::kSpeed, s.speed);
    put_level(sj, "energy", ProsodicAttribute::kEnergy, s.energy);
    sj["start"] = s.start_s;
    sj["end"] = s.end_s;
    speakers.push_back(std::move(sj));
  }
  j["speakers"] = speakers;
  return j;
}

ClipMetadata clip_from_json(const Json& j) {
  try {
    ClipMetadata meta;
    meta.clip_id = j.at("clip_id").get<std::string>();
    meta.audio_path = j.value("audio_path", std::string());
    meta.sample_rate_hz = j.value("sample_rate_hz", 0);
    meta.num_samples = j.value("num_samples", std::int64_t{0});
    meta.total_duration_s = j.at("total_duration_s").get<double>();
    meta.seed = j.value("seed", std::uint64_t{0});
    meta.scale_factor = j.value("scale_factor", 1.0);
    meta.off_paper_bounds = j.value("off_paper_bounds", false);
    for (const auto& m : j.at("boundary_modes")) {
      auto mode = parse_boundary_mode(m.get<std::string>());
      if (!mode) throw Error(ErrorCode::kSchema, "invalid boundary mode");
      meta.boundary_modes.push_back(*mode);
    }
    meta.boundary_durations_s = j.at("boundary_durations_s").get<std::vector<double>>();
    for (const auto& sj : j.at("speakers")) {
      SpeakerSegment s;
      s.order_index = sj.at("order_index").get<int>();
      s.utterance_id = sj.at("utterance_id").get<std::string>();
      s.speaker_id = sj.value("speaker_id", std::string());
      auto g = parse_gender(sj.at("gender").get<std::string>());
      if (!g) throw Error(ErrorCode::kSchema, "invalid gender");
      s.gender = *g;
      s.emotion = sj.at("emotion").get<std::string>();
      s.pitch = get_level(sj, "pitch");
      s.speed = get_level(sj, "speed");
      s.energy = get_level(sj, "energy");
      s.start_s = sj.at("start").get<double>();
      s.end_s = sj.at("end").get<double>();
      meta.segments.push_back(std::move(s));
    }
    if (meta.segments.empty() || meta.boundary_modes.size() + 1 != meta.segments.size() ||
        meta.boundary_durations_s.size() != meta.boundary_modes.size()) {
      throw Error(ErrorCode::kSchema, "clip '" + meta.clip_id + "' has inconsistent boundary lists");
    }
    return meta;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("clip metadata: ") + e.what());
  }
}

std::vector<ClipMetadata> load_clip_manifest(const fs::path& path) {
  std::vector<ClipMetadata> clips;
  for_each_jsonl(path, [&](const Json& obj, std::size_t line) {
    try {
      clips.push_back(clip_from_json(obj));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return clips;
}

void save_clip_manifest(const fs::path& path, std::span<const ClipMetadata> clips) {
  std::vector<Json> rows;
  rows.reserve(clips.size());
  for (const auto& c : clips) rows.push_back(to_json(c));
  write_jsonl(path, rows);
}

std::vector<std::pair<double, double>> layout_segments(std::span<const double> durations_s,
                                                       std::span<const BoundaryMode> modes,
                                                       std::span<const double> boundary_durations_s) {
  if (durations_s.empty() || modes.size() + 1 != durations_s.size() ||
      boundary_durations_s.size() != modes.size()) {
    throw Error(ErrorCode::kInvalidArgument, "layout_segments: inconsistent list lengths");
  }
  std::vector<std::pair<double, double>> spans;
  spans.reserve(durations_s.size());
  double start = 0.0;
  for (std::size_t i = 0; i < durations_s.size(); ++i) {
    if (i > 0) {
      const double prev_end = spans.back().second;
      start = modes[i - 1] == BoundaryMode::kGap ? prev_end + boundary_durations_s[i - 1]
                                                 : prev_end - boundary_durations_s[i - 1];
    }
    spans.emplace_back(start, start + durations_s[i]);
  }
  return spans;
}

ClipPlan plan_clip(const Manifest& pool, std::uint64_t rng_seed, const MixPolicy& policy) {
  policy.validate();
  // std::map keeps speaker order independent of manifest order.
  std::map<std::string, std::vector<const UtteranceRecord*>> by_speaker;
  for (const auto& r : pool.records) {
    if (r.duration_s < policy.max_utterance_s) by_speaker[r.speaker_id].push_back(&r);
  }
  const std::size_t needed = policy.speaker_count_weights[1] > 0 ? 3 : 2;
  if (by_speaker.size() < needed) {
    throw Error(ErrorCode::kPoolTooSmall, "pool has " + std::to_string(by_speaker.size()) +
                                              " eligible speakers, need " + std::to_string(needed));
  }

  Rng rng(rng_seed);
  const double w2 = policy.speaker_count_weights[0];
  const double w3 = policy.speaker_count_weights[1];
  const std::size_t n = rng.bernoulli(w2 / (w2 + w3)) ? 2 : 3;

  std::vector<const std::vector<const UtteranceRecord*>*> speakers;
  speakers.reserve(by_speaker.size());
  for (const auto& [id, recs] : by_speaker) speakers.push_back(&recs);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(speakers.size() - i));
    std::swap(speakers[i], speakers[j]);
  }

  ClipPlan plan;
  std::vector<double> durations;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& recs = *speakers[i];
    plan.sources.push_back(*recs[static_cast<std::size_t>(rng.below(recs.size()))]);
    durations.push_back(plan.sources.back().duration_s);
  }

  ClipMetadata& meta = plan.meta;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const bool overlap = rng.bernoulli(policy.overlap_probability);
    double d;
    if (!overlap) {
      d = rng.uniform(policy.gap_min_s, policy.gap_max_s);
    } else {
      d = rng.uniform(policy.overlap_min_s, policy.overlap_max_s);
      const double shorter = std::min(durations[i], durations[i + 1]);
      if (policy.clamp_overlap) {
        const double limit = shorter - policy.clamp_margin_s;
        if (limit < policy.overlap_min_s) {
          throw Error(ErrorCode::kUtteranceTooShort,
                      "overlap cannot be clamped inside the overlap range for utterances '" +
                          plan.sources[i].id + "' and '" + plan.sources[i + 1].id + "'");
        }
        d = std::min(d, limit);
      } else if (d >= durations[i]) {
        throw Error(ErrorCode::kUtteranceTooShort,
                    "overlap swallows utterance '" + plan.sources[i].id + "'");
      }
    }
    meta.boundary_modes.push_back(overlap ? BoundaryMode::kOverlap : BoundaryMode::kGap);
    meta.boundary_durations_s.push_back(d);
  }

  const auto spans = layout_segments(durations, meta.boundary_modes, meta.boundary_durations_s);
  for (std::size_t i = 0; i < n; ++i) {
    const UtteranceRecord& r = plan.sources[i];
    SpeakerSegment s;
    s.order_index = static_cast<int>(i) + 1;
    s.utterance_id = r.id;
    s.speaker_id = r.speaker_id;
    s.gender = r.gender;
    s.emotion = r.emotion;
    s.pitch = r.pitch_label;
    s.speed = r.speed_label;
    s.energy = r.energy_label;
    s.start_s = spans[i].first;
    s.end_s = spans[i].second;
    meta.total_duration_s = std::max(meta.total_duration_s, s.end_s);
    meta.segments.push_back(std::move(s));
  }
  char id[32];
  std::snprintf(id, sizeof id, "clip-%016llx", static_cast<unsigned long long>(rng_seed));
  meta.clip_id = id;
  meta.seed = rng_seed;
  meta.sample_rate_hz = policy.target_rate_hz;
  meta.off_paper_bounds = !policy.within_paper_bounds();
  return plan;
}

RenderedClip render_clip(const ClipPlan& plan, const MixPolicy& policy, const AudioSource& audio) {
  const int rate = policy.target_rate_hz;
  RenderedClip out;
  out.meta = plan.meta;
  std::vector<Signal<float>> sources;
  Eigen::Index length = 0;
  for (std::size_t i = 0; i < plan.sources.size(); ++i) {
    Waveform w = audio(plan.sources[i]);
    sources.push_back(resample_linear(w.samples, w.sample_rate_hz, rate));
    const auto offset =
        static_cast<Eigen::Index>(std::llround(plan.meta.segments[i].start_s * rate));
    out.spans.emplace_back(offset, offset + sources.back().size());
    length = std::max(length, out.spans.back().second);
  }
  out.wave.sample_rate_hz = rate;
  out.wave.samples = Signal<float>::Zero(length);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    out.wave.samples.segment(out.spans[i].first, sources[i].size()) += sources[i];
  }
  const float peak = peak_abs(out.wave.samples);
  if (peak > policy.peak_limit) {
    out.meta.scale_factor = policy.peak_limit / peak;
    out.wave.samples *= static_cast<float>(out.meta.scale_factor);
  } else {
    out.meta.scale_factor = 1.0;
  }
  out.meta.num_samples = length;
  out.meta.sample_rate_hz = rate;
  return out;
}

GenerateResult generate_set(const Manifest& pool, std::size_t count, std::uint64_t master_seed,
                            const MixPolicy& policy, const fs::path& out_dir,
                            const GenerateOptions& options, const AudioSource& audio) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "count must be >= 1");
  policy.validate();
  GenerateResult result;
  result.clips.resize(count);
  std::atomic<std::size_t> retries{0};
  fs::create_directories(out_dir / options.audio_subdir);
  const int width = std::max<int>(6, static_cast<int>(std::to_string(count - 1).size()));

  parallel_for(count, static_cast<std::size_t>(policy.workers), [&](std::size_t i) {
    char name[64];
    std::snprintf(name, sizeof name, "clip_%0*zu", width, i);
    for (int attempt = 0;; ++attempt) {
      const std::uint64_t seed = derive_seed(master_seed, i, static_cast<std::uint64_t>(attempt));
      try {
        ClipPlan plan = plan_clip(pool, seed, policy);
        plan.meta.clip_id = name;
        const std::string rel = options.audio_subdir + "/" + name + ".wav";
        ClipMetadata meta;
        if (options.write_audio) {
          RenderedClip rendered = render_clip(plan, policy, audio);
          write_wav_pcm16(out_dir / rel, rendered.wave);
          meta = std::move(rendered.meta);
        } else {
          meta = std::move(plan.meta);
          meta.num_samples = std::llround(meta.total_duration_s * policy.target_rate_hz);
        }
        meta.audio_path = rel;
        result.clips[i] = std::move(meta);
        return;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kPoolTooSmall || e.code() == ErrorCode::kInvalidArgument ||
            attempt >= policy.max_retries) {
          throw Error(e.code(), std::string(name) + " failed after " + std::to_string(attempt + 1) +
                                    " attempt(s): " + e.what());
        }
        ++retries;
        spdlog::warn("{} attempt {} failed ({}); retrying with salted seed", name, attempt, e.what());
      }
    }
  });

  result.retries = retries;
  result.manifest_path = out_dir / options.manifest_name;
  save_clip_manifest(result.manifest_path, result.clips);
  return result;
}

}  // namespace speechcaps

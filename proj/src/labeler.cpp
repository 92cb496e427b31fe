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

#include "speechcaps/labeler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "speechcaps/error.hpp"

namespace speechcaps {

std::string_view to_string(GenderScope s) {
  switch (s) {
    case GenderScope::kAll: return "all";
    case GenderScope::kMale: return "male";
    case GenderScope::kFemale: return "female";
  }
  return "";
}

GenderScope scope_of(Gender g) { return g == Gender::kMale ? GenderScope::kMale : GenderScope::kFemale; }

std::optional<Level> BandThresholds::classify(double v) const {
  if (v <= low_max) return Level::kLow;
  if (v >= mid_min && v <= mid_max) return Level::kMedium;
  if (v >= high_min) return Level::kHigh;
  return std::nullopt;
}

std::optional<Level> LabeledUtterance::label(ProsodicAttribute a) const {
  switch (a) {
    case ProsodicAttribute::kPitch: return pitch_label;
    case ProsodicAttribute::kSpeed: return speed_label;
    case ProsodicAttribute::kEnergy: return energy_label;
  }
  return std::nullopt;
}

BandRanks band_ranks(std::size_t n, double w) {
  // The small epsilon keeps products like 0.425 * 200 from rounding up past an
  // exact integer.
  auto rank = [n](double p) {
    return static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-9));
  };
  BandRanks r;
  r.low_last = rank(w);
  r.mid_first = rank(0.5 - w / 2);
  r.mid_last = rank(0.5 + w / 2) - 1;
  r.high_first = rank(1.0 - w) + 1;
  return r;
}

BandThresholds compute_thresholds(std::vector<ScopedValue> population, ProsodicAttribute attribute,
                                  GenderScope scope, double band_width) {
  if (!(band_width > 0.0 && band_width < 1.0 / 3.0)) {
    throw Error(ErrorCode::kInvalidArgument, "band width must be in (0, 1/3)");
  }
  const std::size_t n = population.size();
  if (n < kMinBandPopulation) {
    throw Error(ErrorCode::kPopulationTooSmall,
                fmt::format("{} population ({}) has {} values, need {}", to_string(attribute),
                            to_string(scope), n, kMinBandPopulation));
  }
  std::stable_sort(population.begin(), population.end(), [](const ScopedValue& a, const ScopedValue& b) {
    return a.value < b.value || (a.value == b.value && a.id < b.id);
  });
  const BandRanks r = band_ranks(n, band_width);
  BandThresholds t;
  t.attribute = attribute;
  t.gender_scope = scope;
  t.population_size = n;
  t.band_width = band_width;
  t.low_max = population[r.low_last - 1].value;
  t.mid_min = population[r.mid_first - 1].value;
  t.mid_max = population[r.mid_last - 1].value;
  t.high_min = population[r.high_first - 1].value;
  if (!(r.mid_first <= r.mid_last && t.low_max < t.mid_min && t.mid_min <= t.mid_max &&
        t.mid_max < t.high_min)) {
    throw Error(ErrorCode::kDegenerateDistribution,
                fmt::format("{} ({}) bands overlap: low_max={} mid=[{}, {}] high_min={}",
                            to_string(attribute), to_string(scope), t.low_max, t.mid_min, t.mid_max,
                            t.high_min));
  }
  return t;
}

namespace {

bool in_scope(const ProsodyMeasurement& m, GenderScope scope) {
  return scope == GenderScope::kAll || scope == scope_of(m.gender);
}

std::vector<ScopedValue> population_of(std::span<const ProsodyMeasurement> ms, ProsodicAttribute a,
                                       GenderScope scope, const std::string* speaker = nullptr) {
  std::vector<ScopedValue> pop;
  for (const auto& m : ms) {
    if (!in_scope(m, scope)) continue;
    if (speaker != nullptr && m.speaker_id != *speaker) continue;
    if (auto v = m.value(a)) pop.push_back({m.utterance_id, *v});
  }
  return pop;
}

constexpr ProsodicAttribute kAllProsodic[] = {ProsodicAttribute::kPitch, ProsodicAttribute::kSpeed,
                                              ProsodicAttribute::kEnergy};

}  // namespace

BandThresholds compute_thresholds(std::span<const ProsodyMeasurement> measurements,
                                  ProsodicAttribute attribute, GenderScope scope,
                                  double band_width) {
  return compute_thresholds(population_of(measurements, attribute, scope), attribute, scope,
                            band_width);
}

std::vector<BandThresholds> compute_all_thresholds(std::span<const ProsodyMeasurement> measurements,
                                                   const LabelingOptions& options) {
  std::vector<BandThresholds> out;
  if (!options.per_speaker) {
    std::set<GenderScope> genders;
    for (const auto& m : measurements) genders.insert(scope_of(m.gender));
    for (GenderScope g : genders) {
      out.push_back(compute_thresholds(measurements, ProsodicAttribute::kPitch, g, options.band_width));
    }
    out.push_back(compute_thresholds(measurements, ProsodicAttribute::kSpeed, GenderScope::kAll,
                                     options.band_width));
    out.push_back(compute_thresholds(measurements, ProsodicAttribute::kEnergy, GenderScope::kAll,
                                     options.band_width));
    return out;
  }
  std::map<std::string, Gender> speakers;
  for (const auto& m : measurements) speakers.emplace(m.speaker_id, m.gender);
  for (const auto& [speaker, gender] : speakers) {
    for (auto a : kAllProsodic) {
      const GenderScope scope = a == ProsodicAttribute::kPitch ? scope_of(gender) : GenderScope::kAll;
      BandThresholds t = compute_thresholds(population_of(measurements, a, scope, &speaker), a,
                                            scope, options.band_width);
      t.speaker_id = speaker;
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<LabeledUtterance> assign_labels(std::span<const ProsodyMeasurement> measurements,
                                            std::span<const BandThresholds> thresholds) {
  const bool per_speaker = std::any_of(thresholds.begin(), thresholds.end(),
                                       [](const BandThresholds& t) { return t.speaker_id.has_value(); });
  auto find = [&](const ProsodyMeasurement& m, ProsodicAttribute a) -> const BandThresholds& {
    const GenderScope scope =
        a == ProsodicAttribute::kPitch ? scope_of(m.gender) : GenderScope::kAll;
    for (const auto& t : thresholds) {
      if (t.attribute != a || t.gender_scope != scope) continue;
      if (per_speaker ? t.speaker_id != m.speaker_id : t.speaker_id.has_value()) continue;
      return t;
    }
    throw Error(ErrorCode::kMissingThresholds,
                fmt::format("no {} thresholds for scope '{}'{}", to_string(a), to_string(scope),
                            per_speaker ? " and speaker '" + m.speaker_id + "'" : std::string()));
  };

  std::vector<LabeledUtterance> out;
  out.reserve(measurements.size());
  for (const auto& m : measurements) {
    LabeledUtterance u;
    u.utterance_id = m.utterance_id;
    for (auto a : kAllProsodic) {
      const auto v = m.value(a);
      if (!v) continue;
      const auto level = find(m, a).classify(*v);
      switch (a) {
        case ProsodicAttribute::kPitch: u.pitch_label = level; break;
        case ProsodicAttribute::kSpeed: u.speed_label = level; break;
        case ProsodicAttribute::kEnergy: u.energy_label = level; break;
      }
    }
    u.in_test_set = u.pitch_label && u.speed_label && u.energy_label;
    out.push_back(std::move(u));
  }
  return out;
}

Manifest apply_labels(const Manifest& manifest, std::span<const LabeledUtterance> labels,
                      bool test_only) {
  std::map<std::string, const LabeledUtterance*> by_id;
  for (const auto& l : labels) by_id[l.utterance_id] = &l;
  Manifest out;
  out.source_tag = manifest.source_tag;
  for (const auto& r : manifest.records) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kSchema, "no measurement for utterance '" + r.id + "'");
    }
    if (test_only && !it->second->in_test_set) continue;
    UtteranceRecord labeled = r;
    for (auto a : kAllProsodic) labeled.set_label(a, it->second->label(a));
    out.records.push_back(std::move(labeled));
  }
  return out;
}

Json to_json(const BandThresholds& t) {
  Json j;
  j["attribute"] = to_string(t.attribute);
  j["gender_scope"] = to_string(t.gender_scope);
  if (t.speaker_id) j["speaker_id"] = *t.speaker_id;
  j["low_max"] = t.low_max;
  j["mid_min"] = t.mid_min;
  j["mid_max"] = t.mid_max;
  j["high_min"] = t.high_min;
  j["population_size"] = t.population_size;
  j["band_width"] = t.band_width;
  return j;
}

BandThresholds thresholds_from_json(const Json& j) {
  try {
    BandThresholds t;
    auto a = parse_prosodic_attribute(j.at("attribute").get<std::string>());
    if (!a) throw Error(ErrorCode::kSchema, "invalid threshold attribute");
    t.attribute = *a;
    const auto scope = j.at("gender_scope").get<std::string>();
    if (scope == "all") {
      t.gender_scope = GenderScope::kAll;
    } else if (auto g = parse_gender(scope)) {
      t.gender_scope = scope_of(*g);
    } else {
      throw Error(ErrorCode::kSchema, "invalid gender scope '" + scope + "'");
    }
    if (j.contains("speaker_id")) t.speaker_id = j.at("speaker_id").get<std::string>();
    t.low_max = j.at("low_max").get<double>();
    t.mid_min = j.at("mid_min").get<double>();
    t.mid_max = j.at("mid_max").get<double>();
    t.high_min = j.at("high_min").get<double>();
    t.population_size = j.value("population_size", std::size_t{0});
    t.band_width = j.value("band_width", 0.15);
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("thresholds: ") + e.what());
  }
}

std::optional<GroupBy> parse_group_by(std::string_view s) {
  if (s == "none") return GroupBy::kNone;
  if (s == "speaker") return GroupBy::kSpeaker;
  if (s == "gender") return GroupBy::kGender;
  return std::nullopt;
}

std::vector<HistogramBin> export_distribution(std::span<const ProsodyMeasurement> measurements,
                                              ProsodicAttribute attribute, GroupBy group_by,
                                              std::size_t bins) {
  if (bins == 0) throw Error(ErrorCode::kInvalidArgument, "bin count must be positive");
  std::map<std::string, std::vector<double>> groups;
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& m : measurements) {
    const auto v = m.value(attribute);
    if (!v) continue;
    std::string key;
    if (group_by == GroupBy::kSpeaker) key = m.speaker_id;
    if (group_by == GroupBy::kGender) key = std::string(to_string(m.gender));
    groups[key].push_back(*v);
    lo = any ? std::min(lo, *v) : *v;
    hi = any ? std::max(hi, *v) : *v;
    any = true;
  }
  std::vector<HistogramBin> out;
  if (!any) return out;
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0 / static_cast<double>(bins);
  for (const auto& [key, values] : groups) {
    std::vector<std::size_t> counts(bins, 0);
    for (double v : values) {
      auto idx = static_cast<std::size_t>(std::floor((v - lo) / width));
      ++counts[std::min(idx, bins - 1)];
    }
    for (std::size_t b = 0; b < bins; ++b) {
      out.push_back({key, lo + width * static_cast<double>(b), lo + width * static_cast<double>(b + 1),
                     counts[b]});
    }
  }
  return out;
}

std::string histogram_csv(std::span<const HistogramBin> bins, bool grouped) {
  std::string out = grouped ? "bin_start,bin_end,count,group\n" : "bin_start,bin_end,count\n";
  for (const auto& b : bins) {
    out += fmt::format("{},{},{}", b.bin_start, b.bin_end, b.count);
    if (grouped) out += "," + b.group;
    out += '\n';
  }
  return out;
}

}  // namespace speechcaps

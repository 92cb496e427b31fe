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

#ifndef SPEECHCAPS_LABELER_HPP_
#define SPEECHCAPS_LABELER_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "speechcaps/attributes.hpp"
#include "speechcaps/corpus.hpp"
#include "speechcaps/prosody.hpp"

namespace speechcaps {

enum class GenderScope { kAll, kMale, kFemale };

std::string_view to_string(GenderScope s);
GenderScope scope_of(Gender g);

/// Value cut points for one (attribute, population) pair. Labels are assigned
/// by value: low <= low_max, mid_min <= medium <= mid_max, high >= high_min.
struct BandThresholds {
  ProsodicAttribute attribute = ProsodicAttribute::kSpeed;
  GenderScope gender_scope = GenderScope::kAll;
  std::optional<std::string> speaker_id;  // set for per-speaker banding
  double low_max = 0.0;
  double mid_min = 0.0;
  double mid_max = 0.0;
  double high_min = 0.0;
  std::size_t population_size = 0;
  double band_width = 0.15;

  std::optional<Level> classify(double value) const;
  bool operator==(const BandThresholds&) const = default;
};

/// Nearest-rank positions (1-based) for a population of n values and a band
/// width w: low = ranks [1, ceil(w n)], medium = ranks
/// [ceil((0.5 - w/2) n), ceil((0.5 + w/2) n)), high = ranks (ceil((1 - w) n), n].
struct BandRanks {
  std::size_t low_last = 0;
  std::size_t mid_first = 0;
  std::size_t mid_last = 0;
  std::size_t high_first = 0;
};
BandRanks band_ranks(std::size_t n, double band_width = 0.15);

inline constexpr std::size_t kMinBandPopulation = 20;

struct ScopedValue {
  std::string id;
  double value = 0.0;
};

/// Thresholds over an explicit population. Values are ordered by (value, id).
/// Throws kPopulationTooSmall below 20 values and kDegenerateDistribution when
/// the bands cannot be strictly ordered.
BandThresholds compute_thresholds(std::vector<ScopedValue> population, ProsodicAttribute attribute,
                                  GenderScope scope, double band_width = 0.15);

/// Selects the population from measurements: pitch is restricted to the given
/// gender (and to voiced utterances); speed and energy use every measurement.
BandThresholds compute_thresholds(std::span<const ProsodyMeasurement> measurements,
                                  ProsodicAttribute attribute, GenderScope scope,
                                  double band_width = 0.15);

struct LabelingOptions {
  double band_width = 0.15;
  bool per_speaker = false;
};

/// Gender-split pitch thresholds plus corpus-wide speed/energy thresholds
/// (or one set per speaker when per_speaker is set).
std::vector<BandThresholds> compute_all_thresholds(std::span<const ProsodyMeasurement> measurements,
                                                   const LabelingOptions& options = {});

struct LabeledUtterance {
  std::string utterance_id;
  std::optional<Level> pitch_label;
  std::optional<Level> speed_label;
  std::optional<Level> energy_label;
  bool in_test_set = false;

  std::optional<Level> label(ProsodicAttribute a) const;
  bool operator==(const LabeledUtterance&) const = default;
};

/// Labels each measurement against the matching thresholds. Values outside
/// every band get no label; in_test_set iff all three labels are present.
/// Throws kMissingThresholds when a needed (attribute, scope) is absent.
std::vector<LabeledUtterance> assign_labels(std::span<const ProsodyMeasurement> measurements,
                                            std::span<const BandThresholds> thresholds);

/// Copies labels into manifest records; records without a measurement are an
/// error (kMissingThresholds is not used here: kSchema).
Manifest apply_labels(const Manifest& manifest, std::span<const LabeledUtterance> labels,
                      bool test_only);

Json to_json(const BandThresholds& t);
BandThresholds thresholds_from_json(const Json& j);

enum class GroupBy { kNone, kSpeaker, kGender };
std::optional<GroupBy> parse_group_by(std::string_view s);

struct HistogramBin {
  std::string group;
  double bin_start = 0.0;
  double bin_end = 0.0;
  std::size_t count = 0;
};

/// Equal-width histogram over the observed range (bins per group share the
/// global range). Rendered as CSV with columns bin_start,bin_end,count[,group].
std::vector<HistogramBin> export_distribution(std::span<const ProsodyMeasurement> measurements,
                                              ProsodicAttribute attribute, GroupBy group_by,
                                              std::size_t bins = 50);

std::string histogram_csv(std::span<const HistogramBin> bins, bool grouped);

}  // namespace speechcaps

#endif  // SPEECHCAPS_LABELER_HPP_

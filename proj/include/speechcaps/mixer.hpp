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

#ifndef SPEECHCAPS_MIXER_HPP_
#define SPEECHCAPS_MIXER_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "speechcaps/corpus.hpp"

namespace speechcaps {

enum class BoundaryMode { kGap, kOverlap };

std::string_view to_string(BoundaryMode m);
std::optional<BoundaryMode> parse_boundary_mode(std::string_view s);

// Sampling ranges of the reference recipe.
inline constexpr double kPaperGapMin_s = 0.0;
inline constexpr double kPaperGapMax_s = 1.0;
inline constexpr double kPaperOverlapMin_s = 0.8;
inline constexpr double kPaperOverlapMax_s = 2.4;

struct MixPolicy {
  int target_rate_hz = 16000;
  // Relative weights for 2 and 3 speakers.
  std::array<double, 2> speaker_count_weights = {0.5, 0.5};
  double overlap_probability = 0.5;
  double gap_min_s = kPaperGapMin_s;
  double gap_max_s = kPaperGapMax_s;
  double overlap_min_s = kPaperOverlapMin_s;
  double overlap_max_s = kPaperOverlapMax_s;
  bool clamp_overlap = true;
  // Overlap never exceeds the shorter neighbour minus this margin.
  double clamp_margin_s = 0.05;
  double max_utterance_s = 30.0;
  double peak_limit = 0.99;
  int max_retries = 3;
  int workers = 1;

  /// True when the gap/overlap ranges lie inside the reference ranges.
  bool within_paper_bounds() const;
  /// Throws Error(kInvalidArgument) on malformed settings.
  void validate() const;
};

struct SpeakerSegment {
  int order_index = 0;  // 1-based, ascending start time
  std::string utterance_id;
  std::string speaker_id;
  Gender gender = Gender::kFemale;
  std::string emotion;
  std::optional<Level> pitch;
  std::optional<Level> speed;
  std::optional<Level> energy;
  double start_s = 0.0;
  double end_s = 0.0;

  std::optional<Level> level(ProsodicAttribute a) const;
  bool operator==(const SpeakerSegment&) const = default;
};

struct ClipMetadata {
  std::string clip_id;
  std::vector<SpeakerSegment> segments;
  std::vector<BoundaryMode> boundary_modes;
  std::vector<double> boundary_durations_s;
  double total_duration_s = 0.0;
  std::uint64_t seed = 0;
  double scale_factor = 1.0;
  int sample_rate_hz = 0;
  std::int64_t num_samples = 0;
  std::string audio_path;
  bool off_paper_bounds = false;

  bool operator==(const ClipMetadata&) const = default;
};

Json to_json(const ClipMetadata& meta);
ClipMetadata clip_from_json(const Json& obj);

std::vector<ClipMetadata> load_clip_manifest(const std::filesystem::path& path);
void save_clip_manifest(const std::filesystem::path& path, std::span<const ClipMetadata> clips);

/// Metadata plus the source utterances, in segment order.
struct ClipPlan {
  ClipMetadata meta;
  std::vector<UtteranceRecord> sources;
};

/// Start/end times for utterances laid end to end. A gap boundary inserts
/// `boundary_durations_s[i]` of silence, an overlap boundary starts the next
/// utterance that long before the current one ends. Values are not range
/// checked here.
std::vector<std::pair<double, double>> layout_segments(std::span<const double> durations_s,
                                                       std::span<const BoundaryMode> modes,
                                                       std::span<const double> boundary_durations_s);

/// Samples speaker count, speakers, utterances and boundaries. A pure
/// function of its arguments. Throws kPoolTooSmall or kUtteranceTooShort.
ClipPlan plan_clip(const Manifest& pool, std::uint64_t rng_seed, const MixPolicy& policy);

using AudioSource = std::function<Waveform(const UtteranceRecord&)>;

struct RenderedClip {
  Waveform wave;
  ClipMetadata meta;
  // [begin, end) sample offsets of each segment in the rendered clip.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> spans;
};

/// Resamples every source to the policy rate, places it at
/// round(start_s * rate), sums, and scales the whole clip down if its peak
/// exceeds policy.peak_limit.
RenderedClip render_clip(const ClipPlan& plan, const MixPolicy& policy,
                         const AudioSource& audio = load_audio);

struct GenerateOptions {
  bool write_audio = true;
  std::string manifest_name = "clips.jsonl";
  std::string audio_subdir = "clips";
};

struct GenerateResult {
  std::vector<ClipMetadata> clips;
  std::filesystem::path manifest_path;
  std::size_t retries = 0;
};

/// Clip i is planned with derive_seed(master_seed, i, attempt), so the set is
/// reproducible and independent of worker scheduling. Failed clips are retried
/// with a salted seed up to policy.max_retries times, then the run aborts.
GenerateResult generate_set(const Manifest& pool, std::size_t count, std::uint64_t master_seed,
                            const MixPolicy& policy, const std::filesystem::path& out_dir,
                            const GenerateOptions& options = {},
                            const AudioSource& audio = load_audio);

}  // namespace speechcaps

#endif  // SPEECHCAPS_MIXER_HPP_

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

#ifndef SPEECHCAPS_STAGES_HPP_
#define SPEECHCAPS_STAGES_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "speechcaps/config.hpp"
#include "speechcaps/metrics.hpp"
#include "speechcaps/provenance.hpp"

namespace speechcaps {

struct StageContext {
  RunConfig config = RunConfig::defaults();
  bool force = false;
};

/// Re-serializes a validated manifest.
StageOutcome run_validate(const StageContext& ctx, const std::filesystem::path& manifest,
                          const std::filesystem::path& out);

/// Writes <out_dir>/clips.jsonl and <out_dir>/clips/*.wav.
StageOutcome run_mix(const StageContext& ctx, const std::filesystem::path& pool, std::size_t count,
                     const std::filesystem::path& out_dir);

StageOutcome run_measure(const StageContext& ctx, const std::filesystem::path& manifest,
                         const std::filesystem::path& out);

/// Writes the labeled manifest plus "<out>.thresholds.json". With
/// keep_all=false only test-set utterances are kept.
StageOutcome run_label(const StageContext& ctx, const std::filesystem::path& measurements,
                       const std::filesystem::path& manifest, const std::filesystem::path& out,
                       bool keep_all = false);

StageOutcome run_dist(const StageContext& ctx, const std::filesystem::path& measurements,
                      ProsodicAttribute attribute, GroupBy group_by, const std::filesystem::path& out);

StageOutcome run_qa(const StageContext& ctx, const std::filesystem::path& clips,
                    const std::filesystem::path& out);

StageOutcome run_caption_prompts(const StageContext& ctx, const std::filesystem::path& clips,
                                 const std::filesystem::path& out);

StageOutcome run_judge(const StageContext& ctx, const std::filesystem::path& records,
                       const std::filesystem::path& out);

StageOutcome run_report(const StageContext& ctx, const std::filesystem::path& verdicts,
                        const std::filesystem::path& qa, ReportFormat format,
                        const std::filesystem::path& out);

struct IdentityRow {
  TableRow row;
  IdentityCheck check;
};

/// Audits an external (model, if_rate, overall_acc, cond_acc) table.
std::vector<IdentityRow> run_check_identity(const std::filesystem::path& table, double tolerance = 0.0015);

}  // namespace speechcaps

#endif  // SPEECHCAPS_STAGES_HPP_

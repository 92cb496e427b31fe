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

#include "speechcaps/stages.hpp"

#include <set>

#include <spdlog/spdlog.h>

#include "speechcaps/corpus.hpp"
#include "speechcaps/error.hpp"
#include "speechcaps/judge.hpp"
#include "speechcaps/lexicon.hpp"
#include "speechcaps/prosody.hpp"

namespace speechcaps {

namespace fs = std::filesystem;

namespace {

Artifact audio_group(const std::string& name, const Manifest& m) {
  std::vector<fs::path> files;
  std::set<std::string> seen;
  for (const auto& r : m.records) {
    if (seen.insert(r.audio_path).second) files.emplace_back(r.audio_path);
  }
  return Artifact::group_of(name, std::move(files));
}

}  // namespace

StageOutcome run_validate(const StageContext& ctx, const fs::path& manifest, const fs::path& out) {
  if (!fs::exists(manifest)) throw Error(ErrorCode::kMissingUpstream, "no manifest at " + manifest.string());
  const Manifest m = load_manifest(manifest);
  StageSpec spec;
  spec.stage = "validate";
  spec.params = Json::object();
  spec.inputs = {Artifact::file(manifest), audio_group("audio", m)};
  spec.outputs = {Artifact::file(out)};
  return run_stage(spec, ctx.force, [&] {
    save_manifest(out, m);
    spdlog::info("validate: {} records OK", m.records.size());
  });
}

StageOutcome run_mix(const StageContext& ctx, const fs::path& pool, std::size_t count, const fs::path& out_dir) {
  ctx.config.validate();
  if (!fs::exists(pool)) throw Error(ErrorCode::kMissingUpstream, "no pool manifest at " + pool.string());
  const Manifest m = load_manifest(pool);
  MixPolicy policy = ctx.config.mix;
  policy.workers = static_cast<int>(ctx.config.workers);
  const fs::path manifest_path = out_dir / GenerateOptions{}.manifest_name;

  StageSpec spec;
  spec.stage = "mix";
  spec.seed = ctx.config.master_seed;
  spec.params = {{"count", count}, {"mix", ctx.config.to_json()["mix"]}};
  spec.inputs = {Artifact::file(pool), audio_group("pool_audio", m)};
  spec.outputs = {Artifact::file(manifest_path)};
  spec.late_outputs = [&] {
    std::vector<fs::path> wavs;
    for (const auto& c : load_clip_manifest(manifest_path)) wavs.push_back(out_dir / c.audio_path);
    return std::vector<Artifact>{Artifact::group_of("clip_audio", std::move(wavs))};
  };
  return run_stage(spec, ctx.force, [&] {
    if (!policy.within_paper_bounds()) {
      spdlog::warn("mix: running with off-reference gap/overlap ranges; clips are marked off_paper_bounds");
    }
    const auto result = generate_set(m, count, ctx.config.master_seed, policy, out_dir);
    spdlog::info("mix: wrote {} clips to {} ({} retries)", result.clips.size(), out_dir.string(),
                 result.retries);
  });
}

StageOutcome run_measure(const StageContext& ctx, const fs::path& manifest, const fs::path& out) {
  if (!fs::exists(manifest)) throw Error(ErrorCode::kMissingUpstream, "no manifest at " + manifest.string());
  const Manifest m = load_manifest(manifest);
  StageSpec spec;
  spec.stage = "measure";
  spec.params = Json::object();
  spec.inputs = {Artifact::file(manifest), audio_group("audio", m), Artifact::file(ctx.config.lexicon_path)};
  spec.outputs = {Artifact::file(out)};
  return run_stage(spec, ctx.force, [&] {
    const auto lexicon = PhonemeLexicon::load(ctx.config.lexicon_path);
    const auto ms = measure_batch(m, lexicon, ctx.config.workers);
    save_measurements(out, ms);
    std::size_t unvoiced = 0;
    for (const auto& x : ms) unvoiced += x.pitch_hz ? 0 : 1;
    spdlog::info("measure: {} utterances measured, {} without a pitch estimate", ms.size(), unvoiced);
  });
}

StageOutcome run_label(const StageContext& ctx, const fs::path& measurements, const fs::path& manifest,
                       const fs::path& out, bool keep_all) {
  fs::path thresholds_path = out;
  thresholds_path += ".thresholds.json";
  StageSpec spec;
  spec.stage = "label";
  spec.params = {{"band_width", ctx.config.labeling.band_width},
                 {"per_speaker", ctx.config.labeling.per_speaker},
                 {"keep_all", keep_all}};
  spec.inputs = {Artifact::file(measurements), Artifact::file(manifest)};
  spec.outputs = {Artifact::file(out), Artifact::file(thresholds_path)};
  return run_stage(spec, ctx.force, [&] {
    const auto ms = load_measurements(measurements);
    const Manifest m = load_manifest(manifest);
    const auto thresholds = compute_all_thresholds(ms, ctx.config.labeling);
    const auto labels = assign_labels(ms, thresholds);
    const Manifest labeled = apply_labels(m, labels, !keep_all);
    save_manifest(out, labeled);
    Json t = Json::array();
    for (const auto& th : thresholds) t.push_back(to_json(th));
    write_text(thresholds_path, t.dump(2) + "\n");
    std::size_t kept = 0;
    for (const auto& l : labels) kept += l.in_test_set ? 1 : 0;
    spdlog::info("label: {} of {} utterances carry all three labels", kept, labels.size());
  });
}

StageOutcome run_dist(const StageContext& ctx, const fs::path& measurements, ProsodicAttribute attribute,
                      GroupBy group_by, const fs::path& out) {
  StageSpec spec;
  spec.stage = "dist";
  spec.params = {{"attribute", to_string(attribute)},
                 {"group_by", group_by == GroupBy::kNone      ? "none"
                              : group_by == GroupBy::kSpeaker ? "speaker"
                                                              : "gender"}};
  spec.inputs = {Artifact::file(measurements)};
  spec.outputs = {Artifact::file(out)};
  return run_stage(spec, ctx.force, [&] {
    const auto ms = load_measurements(measurements);
    const auto bins = export_distribution(ms, attribute, group_by);
    write_text(out, histogram_csv(bins, group_by != GroupBy::kNone));
  });
}

StageOutcome run_qa(const StageContext& ctx, const fs::path& clips, const fs::path& out) {
  StageSpec spec;
  spec.stage = "qa";
  spec.seed = ctx.config.master_seed;
  spec.params = ctx.config.to_json()["qa"];
  spec.inputs = {Artifact::file(clips)};
  spec.outputs = {Artifact::file(out)};
  return run_stage(spec, ctx.force, [&] {
    const auto metas = load_clip_manifest(clips);
    const auto items = generate_qa_set(metas, ctx.config.master_seed, ctx.config.qa, ctx.config.workers);
    save_qa(out, items);
    spdlog::info("qa: {} questions for {} clips", items.size(), metas.size());
  });
}

StageOutcome run_caption_prompts(const StageContext& ctx, const fs::path& clips, const fs::path& out) {
  StageSpec spec;
  spec.stage = "caption-prompts";
  spec.params = {{"caption_backends", ctx.config.to_json()["caption_backends"]}};
  spec.inputs = {Artifact::file(clips)};
  if (ctx.config.template_path) spec.inputs.push_back(Artifact::file(*ctx.config.template_path));
  spec.outputs = {Artifact::file(out)};
  return run_stage(spec, ctx.force, [&] {
    const auto metas = load_clip_manifest(clips);
    const PromptTemplate tmpl =
        ctx.config.template_path ? PromptTemplate::load(*ctx.config.template_path) : PromptTemplate::builtin();
    const auto routes = assign_backends(metas.size(), ctx.config.caption_backends);
    TemplateCaptioner offline;
    std::vector<Json> rows;
    rows.reserve(metas.size());
    for (std::size_t i = 0; i < metas.size(); ++i) {
      CaptionPrompt p = build_caption_prompt(metas[i], tmpl);
      p.backend = routes[i];
      Json j = to_json(p);
      // Remote describers are external; the offline one is filled in here.
      if (p.backend == offline.name()) j["caption"] = offline.describe(p, metas[i]);
      rows.push_back(std::move(j));
    }
    write_jsonl(out, rows);
  });
}

StageOutcome run_judge(const StageContext& ctx, const fs::path& records, const fs::path& out) {
  ctx.config.validate();
  const auto& js = ctx.config.judge;
  StageSpec spec;
  spec.stage = "judge";
  spec.params = {{"backend", js.backend}, {"max_failure_fraction", js.max_failure_fraction}};
  spec.inputs = {Artifact::file(records)};
  if (js.backend == "rule") {
    spec.inputs.push_back(Artifact::file(js.vocabulary_path));
  } else {
    spec.params["endpoint"] = js.endpoint;
    spec.params["model"] = js.model;
  }
  spec.outputs = {Artifact::file(out)};
  return run_stage(spec, ctx.force, [&] {
    const auto recs = load_model_outputs(records);
    std::unique_ptr<JudgeBackend> backend;
    if (js.backend == "rule") {
      backend = std::make_unique<RuleJudge>(JudgeVocabulary::load(js.vocabulary_path));
    } else {
      if (js.endpoint.empty() || js.model.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "llm judge needs judge.endpoint and judge.model in the config");
      }
      if (js.api_key.empty()) {
        throw Error(ErrorCode::kBackendUnavailable, std::string("set ") + kApiKeyEnv + " for the llm judge");
      }
      ChatClientConfig cc;
      cc.endpoint = js.endpoint;
      cc.model = js.model;
      cc.api_key = js.api_key;
      cc.max_attempts = js.max_attempts;
      cc.timeout_s = js.timeout_s;
      cc.audit_path = js.audit_path;
      backend = std::make_unique<LlmJudge>(std::make_shared<const ChatClient>(cc));
    }
    JudgeBatchOptions opt;
    opt.concurrency = js.concurrency;
    opt.max_failure_fraction = js.max_failure_fraction;
    const auto result = judge_batch(recs, *backend, opt);
    save_verdicts(out, result.verdicts);
    spdlog::info("judge: {} verdicts ({} failed, {} conflicts)", result.verdicts.size(), result.failed,
                 result.conflicts);
  });
}

StageOutcome run_report(const StageContext& ctx, const fs::path& verdicts, const fs::path& qa,
                        ReportFormat format, const fs::path& out) {
  StageSpec spec;
  spec.stage = "report";
  spec.params = {{"format", format == ReportFormat::kJson ? "json"
                            : format == ReportFormat::kCsv ? "csv"
                                                           : "markdown"}};
  spec.inputs = {Artifact::file(verdicts), Artifact::file(qa)};
  spec.outputs = {Artifact::file(out)};
  return run_stage(spec, ctx.force, [&] {
    const auto vs = load_verdicts(verdicts);
    const auto items = load_qa(qa);
    const auto reports = compute_report(vs, items);
    for (const auto& r : reports) {
      if (r.n_failed > 0) spdlog::warn("report: {} verdicts for {} failed and are excluded", r.n_failed, r.model_tag);
    }
    write_text(out, render_report(reports, format));
  });
}

std::vector<IdentityRow> run_check_identity(const fs::path& table, double tolerance) {
  if (!fs::exists(table)) throw Error(ErrorCode::kMissingUpstream, "no table at " + table.string());
  std::vector<IdentityRow> out;
  for (const auto& row : parse_result_table(read_text(table))) {
    out.push_back({row, verify_identity(row.if_rate, row.overall_acc, row.cond_acc, tolerance)});
  }
  return out;
}

}  // namespace speechcaps

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

// speechcaps-forge: builds multi-talker speaking-style captioning data and
// scores model answers on it.
//
//   speechcaps-forge mix --pool pool.jsonl --count 1000 --seed 7 --out run/mix
//   speechcaps-forge qa --clips run/mix/clips.jsonl --seed 7 --out run/qa.jsonl
//   speechcaps-forge judge --records outputs.jsonl --backend rule --out run/verdicts.jsonl
//   speechcaps-forge report --verdicts run/verdicts.jsonl --qa run/qa.jsonl --format markdown --out run/report.md

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "speechcaps/error.hpp"
#include "speechcaps/stages.hpp"

namespace fs = std::filesystem;
using namespace speechcaps;

namespace {

struct Common {
  std::string config_path;
  bool force = false;
  bool allow_nonpaper = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string log_level = "info";
};

StageContext make_context(const Common& c) {
  StageContext ctx;
  ctx.config = c.config_path.empty() ? RunConfig::defaults() : RunConfig::load(c.config_path);
  ctx.config.apply_environment();
  if (c.allow_nonpaper) ctx.config.allow_nonpaper_bounds = true;
  if (c.seed) ctx.config.master_seed = *c.seed;
  if (c.workers) ctx.config.workers = *c.workers;
  ctx.force = c.force;
  return ctx;
}

void report_outcome(const char* stage, StageOutcome o) {
  if (o == StageOutcome::kUpToDate) std::fprintf(stderr, "%s: up to date\n", stage);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-talker speaking-style captioning data and evaluation toolchain"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, "Run configuration JSON")->check(CLI::ExistingFile);
  app.add_flag("--force", common.force, "Re-run a stage even if its outputs are up to date");
  app.add_flag("--allow-nonpaper-bounds", common.allow_nonpaper,
               "Permit gap/overlap ranges outside the reference ranges (outputs are watermarked)");
  app.add_option("--log-level", common.log_level, "trace|debug|info|warn|error");

  std::string in_path, out_path, aux_path;

  auto* validate = app.add_subcommand("validate", "Validate an utterance manifest and echo it");
  validate->add_option("--manifest", in_path)->required();
  validate->add_option("--out", out_path)->required();

  std::size_t count = 0;
  std::optional<int> rate;
  std::optional<double> gap_min, gap_max, overlap_min, overlap_max;
  auto* mix = app.add_subcommand("mix", "Mix single-talker utterances into multi-talker clips");
  mix->add_option("--pool", in_path, "Utterance manifest")->required();
  mix->add_option("--count", count, "Number of clips")->required();
  mix->add_option("--seed", common.seed);
  mix->add_option("--out", out_path, "Output directory")->required();
  mix->add_option("--rate", rate, "Output sample rate (Hz)");
  mix->add_option("--gap-min", gap_min);
  mix->add_option("--gap-max", gap_max);
  mix->add_option("--overlap-min", overlap_min);
  mix->add_option("--overlap-max", overlap_max);
  mix->add_option("--workers", common.workers);

  std::optional<std::string> lexicon;
  auto* measure = app.add_subcommand("measure", "Measure pitch, energy and speaking rate");
  measure->add_option("--manifest", in_path)->required();
  measure->add_option("--lexicon", lexicon);
  measure->add_option("--out", out_path)->required();
  measure->add_option("--workers", common.workers);

  bool keep_all = false;
  std::optional<double> band_width;
  bool per_speaker = false;
  auto* label = app.add_subcommand("label", "Band measurements into low/medium/high labels");
  label->add_option("--measurements", in_path)->required();
  label->add_option("--manifest", aux_path)->required();
  label->add_option("--out", out_path)->required();
  label->add_option("--band-width", band_width);
  label->add_flag("--per-speaker", per_speaker, "Band each speaker separately");
  label->add_flag("--keep-all", keep_all, "Keep utterances outside the test set");

  std::string attribute = "speed", group_by = "none";
  auto* dist = app.add_subcommand("dist", "Export a histogram of one measured attribute");
  dist->add_option("--measurements", in_path)->required();
  dist->add_option("--attribute", attribute)->check(CLI::IsMember({"pitch", "speed", "energy"}));
  dist->add_option("--group-by", group_by)->check(CLI::IsMember({"none", "speaker", "gender"}));
  dist->add_option("--out", out_path)->required();

  auto* qa = app.add_subcommand("qa", "Generate question-answer pairs from clip metadata");
  qa->add_option("--clips", in_path)->required();
  qa->add_option("--seed", common.seed);
  qa->add_option("--out", out_path)->required();

  std::optional<std::string> template_path;
  auto* prompts = app.add_subcommand("caption-prompts", "Build caption requests from clip metadata");
  prompts->add_option("--clips", in_path)->required();
  prompts->add_option("--template", template_path);
  prompts->add_option("--out", out_path)->required();

  std::optional<std::string> backend, audit;
  std::optional<std::size_t> concurrency;
  auto* judge = app.add_subcommand("judge", "Judge model outputs for relevance and alignment");
  judge->add_option("--records", in_path)->required();
  judge->add_option("--backend", backend)->check(CLI::IsMember({"rule", "llm"}));
  judge->add_option("--out", out_path)->required();
  judge->add_option("--concurrency", concurrency);
  judge->add_option("--audit", audit, "Log request/response bodies to this JSONL file");

  std::string format = "markdown";
  auto* report = app.add_subcommand("report", "Aggregate verdicts into IF rate and accuracies");
  report->add_option("--verdicts", in_path)->required();
  report->add_option("--qa", aux_path)->required();
  report->add_option("--format", format)->check(CLI::IsMember({"json", "markdown", "csv"}));
  report->add_option("--out", out_path)->required();

  double tolerance = 0.0015;
  auto* identity = app.add_subcommand("check-identity", "Audit overall = IF x cond in a result table");
  identity->add_option("--table", in_path, "CSV with model,if_rate,overall_acc,cond_acc")->required();
  identity->add_option("--tolerance", tolerance);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("forge"));
  spdlog::set_level(spdlog::level::from_str(common.log_level));

  try {
    StageContext ctx = make_context(common);
    auto& cfg = ctx.config;
    if (*validate) {
      report_outcome("validate", run_validate(ctx, in_path, out_path));
    } else if (*mix) {
      if (rate) cfg.mix.target_rate_hz = *rate;
      if (gap_min) cfg.mix.gap_min_s = *gap_min;
      if (gap_max) cfg.mix.gap_max_s = *gap_max;
      if (overlap_min) cfg.mix.overlap_min_s = *overlap_min;
      if (overlap_max) cfg.mix.overlap_max_s = *overlap_max;
      report_outcome("mix", run_mix(ctx, in_path, count, out_path));
    } else if (*measure) {
      if (lexicon) cfg.lexicon_path = *lexicon;
      report_outcome("measure", run_measure(ctx, in_path, out_path));
    } else if (*label) {
      if (band_width) cfg.labeling.band_width = *band_width;
      if (per_speaker) cfg.labeling.per_speaker = true;
      report_outcome("label", run_label(ctx, in_path, aux_path, out_path, keep_all));
    } else if (*dist) {
      report_outcome("dist", run_dist(ctx, in_path, *parse_prosodic_attribute(attribute),
                                      *parse_group_by(group_by), out_path));
    } else if (*qa) {
      report_outcome("qa", run_qa(ctx, in_path, out_path));
    } else if (*prompts) {
      if (template_path) cfg.template_path = fs::path(*template_path);
      report_outcome("caption-prompts", run_caption_prompts(ctx, in_path, out_path));
    } else if (*judge) {
      if (backend) cfg.judge.backend = *backend;
      if (concurrency) cfg.judge.concurrency = *concurrency;
      if (audit) cfg.judge.audit_path = fs::path(*audit);
      report_outcome("judge", run_judge(ctx, in_path, out_path));
    } else if (*report) {
      report_outcome("report", run_report(ctx, in_path, aux_path, *parse_report_format(format), out_path));
    } else if (*identity) {
      int failing = 0;
      std::cout << "model,if_rate,overall_acc,cond_acc,if_x_cond,residual,status\n";
      for (const auto& r : run_check_identity(in_path, tolerance)) {
        std::cout << fmt::format("{},{:.3f},{:.3f},{:.3f},{:.4f},{:.4f},{}\n", r.row.model, r.row.if_rate,
                                 r.row.overall_acc, r.row.cond_acc, r.row.if_rate * r.row.cond_acc,
                                 r.check.residual, r.check.holds ? "ok" : "INCONSISTENT");
        failing += r.check.holds ? 0 : 1;
      }
      return failing == 0 ? 0 : 1;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

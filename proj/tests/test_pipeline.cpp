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

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <gtest/gtest.h>
#include <sys/wait.h>

#include "speechcaps/corpus.hpp"
#include "speechcaps/metrics.hpp"
#include "speechcaps/mixer.hpp"
#include "speechcaps/promptgen.hpp"
#include "support/toy_data.hpp"

namespace speechcaps {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

struct Invocation {
  int status = -1;
  std::string output;
};

Invocation forge(const std::string& args) {
  const std::string cmd = std::string(SPEECHCAPS_FORGE_EXE) + " " + args + " 2>&1";
  Invocation r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// validate -> mix -> qa -> caption-prompts, then scripted models -> judge -> report.
class Toy {
 public:
  explicit Toy(std::size_t clips = 30) : dir_("pipeline") {
    pool_ = testing::make_toy_pool(dir_ / "pool");
    expect_ok(fmt::format("validate --manifest {} --out {}", pool_.string(), path("valid.jsonl")));
    expect_ok(fmt::format("mix --pool {} --count {} --seed 7 --out {}", path("valid.jsonl"), clips, path("clips")));
    expect_ok(fmt::format("qa --clips {} --seed 3 --out {}", path("clips/clips.jsonl"), path("qa.jsonl")));
    expect_ok(fmt::format("caption-prompts --clips {} --out {}", path("clips/clips.jsonl"), path("prompts.jsonl")));
    const auto qa = load_qa(dir_ / "qa.jsonl");
    auto models = testing::perfect_model(qa);
    const auto bad = testing::irrelevant_model(qa);
    models.insert(models.end(), bad.begin(), bad.end());
    testing::save_model_outputs(dir_ / "outputs.jsonl", models);
    expect_ok(fmt::format("judge --records {} --out {}", path("outputs.jsonl"), path("verdicts.jsonl")));
  }

  Invocation report(const std::string& format = "csv", const std::string& out = "report.csv") const {
    return forge(fmt::format("report --verdicts {} --qa {} --format {} --out {}", path("verdicts.jsonl"),
                             path("qa.jsonl"), format, path(out)));
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  const fs::path& dir() const { return dir_.path(); }
  const fs::path& pool() const { return pool_; }

 private:
  static void expect_ok(const std::string& args) {
    const Invocation r = forge(args);
    ASSERT_EQ(r.status, 0) << args << "\n" << r.output;
  }

  TempDir dir_;
  fs::path pool_;
};

TEST(Pipeline, PerfectAndIrrelevantModels) {
  Toy toy;
  ASSERT_EQ(toy.report().status, 0);
  const auto reports = parse_report_csv(slurp(toy.path("report.csv")));
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].model_tag, "irrelevant");
  EXPECT_EQ(reports[1].model_tag, "perfect");
  const auto& bad = reports[0].counts;
  const auto& good = reports[1].counts;
  EXPECT_GT(good.n_total, 0);
  EXPECT_EQ(good.n_relevant, good.n_total);
  EXPECT_EQ(good.n_aligned, good.n_total);
  EXPECT_EQ(bad.n_relevant, 0);
  EXPECT_EQ(*bad.if_rate(), Ratio(0));
  EXPECT_FALSE(bad.cond_acc());

  ASSERT_EQ(toy.report("markdown", "report.md").status, 0);
  const std::string md = slurp(toy.path("report.md"));
  EXPECT_NE(md.find("| (a) IF Rate | 0.000 | 1.000 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| (c) Cond. Acc. | — | 1.000 |"), std::string::npos) << md;

  // Every caption request carries the per-speaker attribute text.
  const std::string prompts = slurp(toy.path("prompts.jsonl"));
  EXPECT_NE(prompts.find("\"caption\""), std::string::npos);
}

TEST(Pipeline, UpToDateStagesAreSkipped) {
  Toy toy(10);
  ASSERT_EQ(toy.report().status, 0);
  const auto before = fs::last_write_time(toy.path("report.csv"));
  const Invocation again = toy.report();
  EXPECT_EQ(again.status, 0);
  EXPECT_NE(again.output.find("up to date"), std::string::npos) << again.output;
  EXPECT_EQ(fs::last_write_time(toy.path("report.csv")), before);

  const Invocation forced = forge("--force " + fmt::format("report --verdicts {} --qa {} --format csv --out {}",
                                                    toy.path("verdicts.jsonl"), toy.path("qa.jsonl"),
                                                    toy.path("report.csv")));
  EXPECT_EQ(forced.status, 0);
  EXPECT_EQ(forced.output.find("up to date"), std::string::npos) << forced.output;

  // A changed parameter is not a no-op.
  const Invocation reseeded = forge(fmt::format("qa --clips {} --seed 4 --out {}", toy.path("clips/clips.jsonl"),
                                         toy.path("qa.jsonl")));
  EXPECT_EQ(reseeded.status, 0);
  EXPECT_EQ(reseeded.output.find("up to date"), std::string::npos);
}

TEST(Pipeline, EditedPoolMakesDownstreamStale) {
  Toy toy(10);
  ASSERT_EQ(toy.report().status, 0);
  {
    std::ofstream out(toy.pool(), std::ios::app);
    out << "\n";
  }
  const Invocation r = toy.report();
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("StaleUpstream:"), std::string::npos) << r.output;
}

TEST(Pipeline, DeletedAudioIsMissingUpstream) {
  Toy toy(10);
  fs::remove(toy.pool().parent_path() / "wav" / "utt0.wav");
  const Invocation r = toy.report();
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("MissingUpstream:"), std::string::npos) << r.output;

  const Invocation qa = forge(fmt::format("qa --clips {} --out {}", toy.path("nope.jsonl"), toy.path("qa2.jsonl")));
  EXPECT_EQ(qa.status, 2);
  EXPECT_NE(qa.output.find("MissingUpstream:"), std::string::npos) << qa.output;
}

TEST(Pipeline, OffReferenceBoundsNeedOptIn) {
  TempDir dir("bounds");
  const auto pool = testing::make_toy_pool(dir / "pool");
  const std::string args =
      fmt::format("mix --pool {} --count 5 --gap-max 3 --out {}", pool.string(), (dir / "clips").string());
  const Invocation refused = forge(args);
  EXPECT_EQ(refused.status, 2);
  EXPECT_NE(refused.output.find("OffPaperBounds:"), std::string::npos) << refused.output;
  EXPECT_FALSE(fs::exists(dir / "clips" / "clips.jsonl"));

  const Invocation allowed = forge("--allow-nonpaper-bounds " + args);
  ASSERT_EQ(allowed.status, 0) << allowed.output;
  const auto clips = load_clip_manifest(dir / "clips" / "clips.jsonl");
  ASSERT_EQ(clips.size(), 5u);
  for (const auto& c : clips) EXPECT_TRUE(c.off_paper_bounds);
}

TEST(Pipeline, ConfigMayNotCarryApiKey) {
  TempDir dir("config");
  const auto pool = testing::make_toy_pool(dir / "pool");
  testing::write_file(dir / "cfg.json", R"({"judge": {"backend": "llm", "api_key": "secret"}})");
  const Invocation r = forge(fmt::format("--config {} validate --manifest {} --out {}", (dir / "cfg.json").string(),
                                  pool.string(), (dir / "v.jsonl").string()));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("SchemaError:"), std::string::npos) << r.output;
  EXPECT_EQ(r.output.find("secret"), std::string::npos);

  testing::write_file(dir / "cfg2.json", R"({"master_seed": 5, "mixx": {}})");
  const Invocation typo = forge(fmt::format("--config {} validate --manifest {} --out {}", (dir / "cfg2.json").string(),
                                     pool.string(), (dir / "v.jsonl").string()));
  EXPECT_EQ(typo.status, 2);
  EXPECT_NE(typo.output.find("mixx"), std::string::npos) << typo.output;
}

TEST(Pipeline, RunsAreByteIdentical) {
  Toy a(20), b(20);
  ASSERT_EQ(a.report().status, 0);
  ASSERT_EQ(b.report().status, 0);
  for (const char* name : {"valid.jsonl", "clips/clips.jsonl", "qa.jsonl", "prompts.jsonl", "verdicts.jsonl",
                           "report.csv", "clips/clips.jsonl.prov.json", "report.csv.prov.json"}) {
    EXPECT_EQ(slurp(a.path(name)), slurp(b.path(name))) << name;
  }
  for (const auto& e : fs::directory_iterator(a.dir() / "clips")) {
    if (e.path().extension() != ".wav") continue;
    EXPECT_EQ(slurp(e.path()), slurp(b.dir() / "clips" / e.path().filename())) << e.path();
  }
}

TEST(Pipeline, MeasureLabelDist) {
  TempDir dir("label");
  const auto pool = testing::make_toy_pool(dir / "pool", {.speakers = 8, .utterances_per_speaker = 6, .labeled = false});
  auto p = [&](const char* name) { return (dir / name).string(); };
  const Invocation m = forge(fmt::format("measure --manifest {} --out {}", pool.string(), p("m.jsonl")));
  ASSERT_EQ(m.status, 0) << m.output;
  const Invocation l =
      forge(fmt::format("label --measurements {} --manifest {} --out {}", p("m.jsonl"), pool.string(), p("l.jsonl")));
  ASSERT_EQ(l.status, 0) << l.output;
  EXPECT_TRUE(fs::exists(p("l.jsonl.thresholds.json")));
  const Manifest test_set = load_manifest(p("l.jsonl"));
  EXPECT_LT(test_set.records.size(), 48u);
  for (const auto& r : test_set.records) {
    EXPECT_TRUE(r.pitch_label && r.speed_label && r.energy_label) << r.id;
  }
  const Invocation all = forge(fmt::format("label --keep-all --measurements {} --manifest {} --out {}", p("m.jsonl"),
                                           pool.string(), p("all.jsonl")));
  ASSERT_EQ(all.status, 0) << all.output;
  EXPECT_EQ(load_manifest(p("all.jsonl")).records.size(), 48u);

  const Invocation d = forge(fmt::format("dist --measurements {} --attribute pitch --group-by gender --out {}",
                                         p("m.jsonl"), p("pitch.csv")));
  ASSERT_EQ(d.status, 0) << d.output;
  const std::string csv = slurp(p("pitch.csv"));
  EXPECT_NE(csv.find(",male"), std::string::npos);
  EXPECT_NE(csv.find(",female"), std::string::npos);
}

TEST(Pipeline, CheckIdentityExitCodes) {
  TempDir dir("identity");
  testing::write_file(dir / "ok.csv", "model,if_rate,overall_acc,cond_acc\nA,0.938,0.658,0.701\n");
  const Invocation ok = forge("check-identity --table " + (dir / "ok.csv").string());
  EXPECT_EQ(ok.status, 0) << ok.output;
  EXPECT_NE(ok.output.find("A,0.938,0.658,0.701"), std::string::npos);

  testing::write_file(dir / "bad.csv",
                      "model,if_rate,overall_acc,cond_acc\nA,0.938,0.658,0.701\nB,0.607,0.159,0.315\n");
  const Invocation bad = forge("check-identity --table " + (dir / "bad.csv").string());
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.output.find("B,0.607,0.159,0.315"), std::string::npos);
  EXPECT_NE(bad.output.find("INCONSISTENT"), std::string::npos);
}

TEST(Pipeline, UnknownStageIsRejected) {
  EXPECT_NE(forge("transmogrify").status, 0);
  EXPECT_NE(forge("").status, 0);
}

}  // namespace
}  // namespace speechcaps

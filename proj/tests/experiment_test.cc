// Copyright 2026 The latentnav Authors
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

#include "latentnav/experiment.h"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "latentnav/errors.h"
#include "test_util.h"

namespace latentnav {
namespace {

namespace fs = std::filesystem;

const fs::path kData = fs::path(LATENTNAV_SOURCE_DIR) / "tests" / "data";

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("latentnav_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(Sha256Hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(Sha256Hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(DeriveSeed, DeterministicAndSeparated) {
  EXPECT_EQ(DeriveSeed(1000, 3, 1), DeriveSeed(1000, 3, 1));
  std::set<uint64_t> seen;
  for (uint64_t m : {0ull, 1ull, 1000ull}) {
    for (uint64_t i = 0; i < 20; ++i) {
      for (uint64_t s = 0; s < 4; ++s) seen.insert(DeriveSeed(m, i, s));
    }
  }
  EXPECT_EQ(seen.size(), 3u * 20u * 4u);
}

TEST(ParallelFor, VisitsEachIndexOnceAndRethrows) {
  std::vector<std::atomic<int>> hits(50);
  ParallelFor(50, 4, [&](int i) { ++hits[static_cast<size_t>(i)]; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(ParallelFor(20, 3, [](int i) {
                 if (i == 7) throw NumericError("boom");
               }),
               NumericError);
  ParallelFor(0, 4, [](int) { FAIL(); });
}

TEST(WorkerCount, ReadsEnvironment) {
  setenv(kWorkersEnv, "3", 1);
  EXPECT_EQ(WorkerCount(), 3);
  setenv(kWorkersEnv, "zero", 1);
  EXPECT_THROW(WorkerCount(), ConfigError);
  setenv(kWorkersEnv, "0", 1);
  EXPECT_THROW(WorkerCount(), ConfigError);
  unsetenv(kWorkersEnv);
  EXPECT_GE(WorkerCount(), 1);
}

TEST(FitLine, ExactAndNoisy) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{3, 5, 7, 9};
  const LinearFit f = FitLine(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  const std::vector<double> flat{1, 3, 1, 3};
  EXPECT_LT(FitLine(x, flat).r_squared, 0.5);
}

class EvaluationTest : public ::testing::Test {
 protected:
  static EpisodeConfig Config() {
    EpisodeConfig c;
    c.max_steps = 6;
    c.planner.candidates = 8;
    c.planner.iterations = 2;
    c.planner.elites = 2;
    return c;
  }
  WorldSpec world = testing::TestWorld();
  WorldModel model = testing::TinyModel(2);
  std::vector<PlanMode> all{PlanMode::kPolicyOnly, PlanMode::kUninformedMppi,
                            PlanMode::kPolicyScoring, PlanMode::kWarmStartMppi};
};

TEST_F(EvaluationTest, WorkerCountDoesNotChangeResults) {
  const EvaluationResult a = RunEvaluation(world, model, Config(), all, 5, 77, 1);
  const EvaluationResult b = RunEvaluation(world, model, Config(), all, 5, 77, 3);
  EXPECT_EQ(EpisodesCsv(a), EpisodesCsv(b));
  EXPECT_EQ(PerEpisodeMetricsCsv(a), PerEpisodeMetricsCsv(b));
  EXPECT_EQ(TrajectoriesCsv(a), TrajectoriesCsv(b));
  EXPECT_EQ(a.table.ToCsv(), b.table.ToCsv());
}

TEST_F(EvaluationTest, MethodsShareEpisodeSetups) {
  const EvaluationResult r = RunEvaluation(world, model, Config(), all, 4, 5, 1);
  ASSERT_EQ(r.records.size(), 4u);
  for (size_t e = 0; e < 4; ++e) {
    for (size_t m = 1; m < 4; ++m) {
      EXPECT_EQ(r.records[m][e].setup.start, r.records[0][e].setup.start);
      EXPECT_EQ(r.records[m][e].setup.goal, r.records[0][e].setup.goal);
      EXPECT_EQ(r.records[m][e].setup.instruction, r.records[0][e].setup.instruction);
      EXPECT_EQ(r.records[m][e].ground_truth, r.records[0][e].ground_truth);
    }
    // Goal heading is where the reference trajectory ends up.
    EXPECT_EQ(r.setups[e].goal.heading, r.records[0][e].ground_truth.back().heading);
  }
  // A method's results do not depend on which other methods ran.
  const std::vector<PlanMode> just_warm{PlanMode::kWarmStartMppi};
  const EvaluationResult alone = RunEvaluation(world, model, Config(), just_warm, 4, 5, 1);
  for (size_t e = 0; e < 4; ++e) {
    EXPECT_EQ(alone.records[0][e].executed, r.Records(PlanMode::kWarmStartMppi)[e].executed);
  }
  EXPECT_EQ(alone.table.rows.size(), 1u);
  EXPECT_THROW(alone.Records(PlanMode::kPolicyOnly), ConfigError);
}

TEST_F(EvaluationTest, ProbeUsesIdenticalSamplingStreams) {
  const EpisodeConfig c = Config();
  const auto setups = MakeEpisodeSetups(world, 6, 9, c);
  const WarmStartProbe p = ProbeIterationZero(world, model, c, setups, 9);
  ASSERT_EQ(p.warm_best.size(), 6u);
  int not_worse = 0;
  for (size_t i = 0; i < 6; ++i) not_worse += p.warm_best[i] <= p.uninformed_best[i];
  EXPECT_EQ(p.warm_not_worse, not_worse);
  EXPECT_DOUBLE_EQ(p.fraction, not_worse / 6.0);
  const WarmStartProbe again = ProbeIterationZero(world, model, c, setups, 9);
  EXPECT_EQ(again.warm_best, p.warm_best);
}

TEST_F(EvaluationTest, LatencySweepCoversGrid) {
  const std::vector<int> js{1, 2};
  const std::vector<int> ns{4, 8};
  const LatencySweep s = RunLatencySweep(world, model, Config(), js, ns, 1, 3, 2);
  ASSERT_EQ(s.points.size(), 4u);
  for (const LatencyPoint& p : s.points) EXPECT_GT(p.plan_ms, 0.0);
  EXPECT_NE(LatencyCsv(s).find("iterations"), std::string::npos);
}

TEST(Manifest, DetectsTampering) {
  ExperimentConfig cfg = LoadConfig(fs::path(LATENTNAV_SOURCE_DIR) / "configs" / "smoke.toml");
  CommandOptions opts;
  opts.out = FreshDir("manifest");
  cfg.output_dir = opts.out.string();
  const RunManifest m = CmdGenerate(cfg, opts);
  EXPECT_NO_THROW(VerifyManifest(m, opts.out));
  const RunManifest back = ManifestFromJson(ReadJsonFile(opts.out / "manifest_generate.json"));
  ASSERT_EQ(back.artifacts.size(), m.artifacts.size());
  EXPECT_EQ(back.config_hash, Sha256Hex(ConfigToToml(cfg)));
  std::ofstream(opts.out / "dataset.json", std::ios::app) << " ";
  EXPECT_THROW(VerifyManifest(back, opts.out), IoError);
  fs::remove(opts.out / "dataset.json");
  EXPECT_THROW(VerifyManifest(back, opts.out), IoError);
  fs::remove_all(opts.out);
}

TEST(ApplyOverrides, SeedTargetsTheStage) {
  const ExperimentConfig base;
  CommandOptions o;
  o.seed_override = 123;
  EXPECT_EQ(ApplyOverrides(base, o, "generate").dataset.seed, 123u);
  EXPECT_EQ(ApplyOverrides(base, o, "train").training.seed, 123u);
  EXPECT_EQ(ApplyOverrides(base, o, "evaluate").evaluation.seed, 123u);
  EXPECT_EQ(ApplyOverrides(base, o, "evaluate").dataset.seed, base.dataset.seed);
  o.seed_override.reset();
  o.methods = std::vector<PlanMode>{PlanMode::kPolicyOnly};
  o.greedy_elite = true;
  o.out = "elsewhere";
  const ExperimentConfig c = ApplyOverrides(base, o, "evaluate");
  EXPECT_EQ(c.evaluation.methods.size(), 1u);
  EXPECT_TRUE(c.planner.greedy_elite);
  EXPECT_EQ(c.output_dir, "elsewhere");
}

Json Fixture(const std::string& name) { return ReadJsonFile(kData / (name + ".json")); }

TEST(CmdPlan, MatchesGoldenOutputs) {
  for (const char* name : {"plan_uninformed", "plan_warm_start", "plan_identity", "plan_scoring"}) {
    const Json out = CmdPlan(Fixture(name), kData, CommandOptions{});
    EXPECT_EQ(out.dump(2) + "\n", ReadTextFile(kData / (std::string(name) + ".golden.json")))
        << name;
  }
}

TEST(CmdPlan, UninformedRunRecordsInitialDistribution) {
  const Json r = CmdPlan(Fixture("plan_uninformed"), kData, CommandOptions{})["result"];
  EXPECT_EQ(r["mode"], "uninformed_mppi");
  for (const Json& row : r["initial"]["mu"]) {
    for (const Json& v : row) EXPECT_EQ(v.get<double>(), 0.0);
  }
  for (const Json& row : r["initial"]["sigma"]) {
    for (const Json& v : row) EXPECT_EQ(v.get<double>(), 0.05);
  }
  EXPECT_EQ(r["iterations"].size(), 3u);
}

TEST(CmdPlan, WarmStartClampsInitialSpread) {
  const Json r = CmdPlan(Fixture("plan_warm_start"), kData, CommandOptions{})["result"];
  const Json& row = r["initial"]["sigma"][0];
  EXPECT_EQ(row[0].get<double>(), 0.01);
  EXPECT_EQ(row[1].get<double>(), 0.03);
  EXPECT_EQ(row[2].get<double>(), 0.05);
}

TEST(CmdPlan, IdentityModelGivesUniformWeights) {
  const Json r = CmdPlan(Fixture("plan_identity"), kData, CommandOptions{})["result"];
  for (const Json& it : r["iterations"]) {
    for (const Json& w : it["elite_weights"]) EXPECT_DOUBLE_EQ(w.get<double>(), 0.25);
    const double c0 = it["elite_costs"][0].get<double>();
    for (const Json& c : it["elite_costs"]) EXPECT_EQ(c.get<double>(), c0);
  }
}

TEST(CmdPlan, ScoringPicksLowestCandidateCost) {
  const Json r = CmdPlan(Fixture("plan_scoring"), kData, CommandOptions{})["result"];
  const auto costs = r["candidate_costs"].get<std::vector<double>>();
  const auto best = std::min_element(costs.begin(), costs.end()) - costs.begin();
  EXPECT_EQ(r["chosen_index"].get<long>(), best);
  EXPECT_EQ(r["chosen"], Fixture("plan_scoring")["candidates"][static_cast<size_t>(best)]);
}

TEST(CmdPlan, OverridesAndErrors) {
  CommandOptions greedy;
  greedy.greedy_elite = true;
  const Json g = CmdPlan(Fixture("plan_warm_start"), kData, greedy)["result"];
  EXPECT_EQ(g["chosen_index"], 0);
  CommandOptions seeded;
  seeded.seed_override = 99;
  const Json s = CmdPlan(Fixture("plan_warm_start"), kData, seeded);
  EXPECT_EQ(s["planner"]["seed"], 99);
  EXPECT_NE(s["result"]["iterations"][0]["elite_costs"],
            CmdPlan(Fixture("plan_warm_start"), kData, {})["result"]["iterations"][0]["elite_costs"]);

  Json bad = Fixture("plan_uninformed");
  bad["mode"] = "policy_only";
  EXPECT_THROW(CmdPlan(bad, kData, {}), ConfigError);
  bad = Fixture("plan_uninformed");
  bad["start_latent"] = Json::array({Json::array({1.0, 2.0})});
  EXPECT_THROW(CmdPlan(bad, kData, {}), ConfigError);
  bad = Fixture("plan_uninformed");
  bad.erase("goal_latent");
  EXPECT_THROW(CmdPlan(bad, kData, {}), ConfigError);
  bad = Fixture("plan_uninformed");
  bad["model"] = Json{{"checkpoint", "missing.json"}};
  EXPECT_THROW(CmdPlan(bad, kData, {}), IoError);
}

}  // namespace
}  // namespace latentnav

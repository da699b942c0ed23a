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

#include "latentnav/sim_env.h"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "latentnav/episode.h"
#include "latentnav/errors.h"
#include "test_util.h"

namespace latentnav {
namespace {

constexpr double kPi = std::numbers::pi;

WorldSpec SquareWorld() {
  WorldSpec w;
  w.landmarks = {{1, 0}, {0, 5}, {-5, 0}, {0, -5}};
  return w;
}

TEST(WrapAngle, HalfOpenInterval) {
  EXPECT_DOUBLE_EQ(WrapAngle(kPi), kPi);
  EXPECT_DOUBLE_EQ(WrapAngle(-kPi), kPi);
  EXPECT_NEAR(WrapAngle(3 * kPi / 2), -kPi / 2, 1e-15);
  EXPECT_NEAR(WrapAngle(0.25 + 8 * kPi), 0.25, 1e-12);
}

TEST(StepDynamics, HandCases) {
  const Pose p{2.0, -1.0, 0.7};
  EXPECT_EQ(StepDynamics(p, Action{}), p);

  const Pose a = StepDynamics({0, 0, 0}, {1, 0, 0, 1});
  EXPECT_DOUBLE_EQ(a.x, 1.0);
  EXPECT_DOUBLE_EQ(a.y, 0.0);
  EXPECT_DOUBLE_EQ(a.heading, 0.0);

  const Pose b = StepDynamics({0, 0, kPi / 2}, {1, 0, 0, 1});
  EXPECT_NEAR(b.x, 0.0, 1e-15);
  EXPECT_NEAR(b.y, 1.0, 1e-15);
}

TEST(Observe, BodyFrameOffsetsAndClamp) {
  const WorldSpec w = SquareWorld();
  const Observation o = Observe({0, 0, 0}, w);
  ASSERT_EQ(o.features.size(), 12);
  EXPECT_DOUBLE_EQ(o.features[0], 1.0);
  EXPECT_DOUBLE_EQ(o.features[1], 0.0);
  EXPECT_DOUBLE_EQ(o.features[2], 1.0);

  const Observation r = Observe({0, 0, kPi / 2}, w);
  EXPECT_NEAR(r.features[0], 0.0, 1e-15);
  EXPECT_NEAR(r.features[1], -1.0, 1e-15);

  const Observation on = Observe({1, 0, 0.3}, w);
  EXPECT_DOUBLE_EQ(on.features[2], 1.0 / kMinObservationRange);
}

TEST(WorldSpec, Validation) {
  WorldSpec w = SquareWorld();
  EXPECT_NO_THROW(w.Validate());
  w.landmarks.pop_back();
  EXPECT_THROW(w.Validate(), ConfigError);
  w = SquareWorld();
  w.landmarks[1] = w.landmarks[0];
  EXPECT_THROW(w.Validate(), ConfigError);
  w = SquareWorld();
  w.landmarks[0] = {20, 0};
  EXPECT_THROW(w.Validate(), ConfigError);
}

TEST(ExpertPolicy, GoalAheadStraight) {
  Rng rng(1);
  const ActionChunk c =
      ExpertPolicy({0, 0, 0}, {5, 0, 0}, {}, 8, 0.0, ExpertConfig{}, rng);
  for (int t = 0; t < 8; ++t) {
    EXPECT_NEAR(c.at(t).HeadingChange(), 0.0, 1e-12);
    EXPECT_GT(c.at(t).dx, 0.0);
    EXPECT_NEAR(c.at(t).dy, 0.0, 1e-12);
  }
  EXPECT_EQ(c.frame(), Frame::kGlobal);
}

TEST(ExpertPolicy, CurveLeftTurnsAtLeastAsMuchAsStraight) {
  Rng rng(1);
  const Pose start{0, 0, 0.2};
  const Pose goal{4, 3, 0};
  const ActionChunk s = ExpertPolicy(start, goal, {}, 8, 0.0, ExpertConfig{}, rng);
  const ActionChunk l = ExpertPolicy(start, goal, {InstructionKind::kCurveLeft, 1.0}, 8, 0.0,
                                     ExpertConfig{}, rng);
  for (int t = 0; t < 8; ++t) EXPECT_GE(l.at(t).HeadingChange(), s.at(t).HeadingChange());
}

TEST(ExpertPolicy, NoiseFreeIsDeterministicAndNoisyRespectsLimits) {
  Rng a(1), b(99);
  const Pose start{1, 1, -0.4};
  const Pose goal{-2, 3, 0};
  EXPECT_EQ(ExpertPolicy(start, goal, {}, 8, 0.0, ExpertConfig{}, a),
            ExpertPolicy(start, goal, {}, 8, 0.0, ExpertConfig{}, b));
  ExpertConfig ex;
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const ActionChunk c = ExpertPolicy(start, goal, {}, 8, 0.5, ex, rng);
    for (int t = 0; t < 8; ++t) {
      EXPECT_NEAR(std::hypot(c.at(t).sin_dphi, c.at(t).cos_dphi), 1.0, 1e-12);
      EXPECT_LE(std::hypot(c.at(t).dx, c.at(t).dy), ex.v_max + 1e-12);
    }
  }
}

TEST(ExpertRollout, MonotoneApproachWhenGoalAhead) {
  const std::vector<Pose> poses = ExpertRollout({0, 0, 0}, {6, 0, 0}, {}, 20, ExpertConfig{});
  ASSERT_EQ(poses.size(), 21u);
  for (size_t t = 1; t < poses.size(); ++t) {
    EXPECT_LT(std::hypot(6 - poses[t].x, poses[t].y), std::hypot(6 - poses[t - 1].x, poses[t - 1].y));
  }
}

TEST(RunEpisode, PolicyOnlyNoiseFreeApproachesGoalAhead) {
  const WorldModel model = testing::TinyModel();
  EpisodeConfig cfg;
  cfg.noise_scale = 0.0;
  cfg.max_steps = 16;
  Rng rng(4);
  const EpisodeSetup setup{{0, 0, 0}, {6, 0, 0}, {}};
  const EpisodeRecord r =
      RunEpisode(PlanMode::kPolicyOnly, testing::TestWorld(), model, setup, cfg, rng);
  for (size_t t = 1; t < r.executed.size(); ++t) {
    EXPECT_LT(std::hypot(6 - r.executed[t].x, r.executed[t].y),
              std::hypot(6 - r.executed[t - 1].x, r.executed[t - 1].y));
  }
}

TEST(RunEpisode, ReplanCountAndDeterminism) {
  const WorldModel model = testing::TinyModel();
  EpisodeConfig cfg;
  cfg.max_steps = 20;
  cfg.replan_interval = cfg.planner.horizon;
  const EpisodeSetup setup{{0, 0, 0}, {3, 2, 0}, {InstructionKind::kCurveRight, 0.5}};
  for (PlanMode m : {PlanMode::kPolicyOnly, PlanMode::kWarmStartMppi}) {
    Rng r1(8), r2(8);
    const EpisodeRecord a = RunEpisode(m, testing::TestWorld(), model, setup, cfg, r1);
    const EpisodeRecord b = RunEpisode(m, testing::TestWorld(), model, setup, cfg, r2);
    EXPECT_EQ(a.replans.size(), 3u);  // ceil(20 / 8)
    EXPECT_EQ(a.executed, b.executed);
    EXPECT_EQ(a.executed.size(), 21u);
    EXPECT_EQ(a.ground_truth.size(), 21u);
  }
}

TEST(GenerateDataset, LengthsAndDeterminism) {
  DatasetConfig cfg;
  cfg.episodes = 1;
  cfg.steps_per_episode = 8;
  const Dataset one = GenerateDataset(testing::TestWorld(), cfg);
  ASSERT_EQ(one.episodes.size(), 1u);
  EXPECT_EQ(one.episodes[0].observations.size(), 9u);
  EXPECT_EQ(one.episodes[0].actions.size(), 8u);

  cfg.episodes = 5;
  cfg.steps_per_episode = 24;
  const Dataset a = GenerateDataset(testing::TestWorld(), cfg);
  const Dataset b = GenerateDataset(testing::TestWorld(), cfg);
  ASSERT_EQ(a.episodes.size(), b.episodes.size());
  for (size_t e = 0; e < a.episodes.size(); ++e) {
    EXPECT_EQ(a.episodes[e].poses, b.episodes[e].poses);
    EXPECT_EQ(a.episodes[e].normalized_actions, b.episodes[e].normalized_actions);
  }
  EXPECT_EQ(a.bounds, b.bounds);
}

TEST(GenerateDataset, TransitionsAreConsistent) {
  DatasetConfig cfg;
  cfg.episodes = 4;
  const Dataset ds = GenerateDataset(testing::TestWorld(), cfg);
  EXPECT_NO_THROW(ds.CheckConsistency());
  for (const DatasetEpisode& ep : ds.episodes) {
    for (size_t t = 0; t < ep.actions.size(); ++t) {
      const Observation next = Observe(StepDynamics(ep.poses[t], ep.actions[t]), ds.world);
      EXPECT_LT((next.features - ep.observations[t + 1].features).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE(ep.normalized_actions[t].cwiseAbs().maxCoeff(), 1.0);
    }
  }
  Dataset broken = ds;
  broken.episodes[0].poses[3].x += 0.5;
  EXPECT_THROW(broken.CheckConsistency(), ConfigError);
}

TEST(GenerateDataset, RejectsZeroEpisodes) {
  DatasetConfig cfg;
  cfg.episodes = 0;
  EXPECT_THROW(GenerateDataset(testing::TestWorld(), cfg), ConfigError);
}

}  // namespace
}  // namespace latentnav

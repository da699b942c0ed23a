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

#include "latentnav/policy_prior.h"

#include <cmath>

#include <gtest/gtest.h>

#include "latentnav/errors.h"
#include "test_util.h"

namespace latentnav {
namespace {

ActionChunk StraightChunk(std::initializer_list<double> dx) {
  std::vector<Action> actions;
  for (double v : dx) actions.push_back(Action::FromHeading(v, 0.0, 0.0));
  return ActionChunk(actions, Frame::kGlobal, false);
}

TEST(ComputePrior, HandMeanAndClampedStd) {
  PolicySamples samples;
  samples.chunks = {StraightChunk({0.1}), StraightChunk({0.3})};
  const ActionBounds unit;
  const PriorStats p = ComputePrior(samples, unit);
  EXPECT_NEAR(p.mu(0, 0), 0.2, 1e-12);
  EXPECT_EQ(p.sigma(0, 0), 0.05);  // std 0.1 clamped
  EXPECT_EQ(p.sigma(0, 1), 0.01);  // std 0 clamped
  const PriorStats wide = ComputePrior(samples, unit, 0.01, 0.5);
  EXPECT_NEAR(wide.sigma(0, 0), 0.1, 1e-12);
}

TEST(ComputePrior, NoiseFreeSamplesCollapseToSigmaMin) {
  Rng a(1), b(2);
  const ExpertConfig expert;
  const Instruction straight{InstructionKind::kStraight, 0.0};
  const PolicySamples s = DrawPolicySamples({0, 0, 0}, {5, 0, 0}, straight, 4, 8, 0.0, expert, a);
  for (const ActionChunk& c : s.chunks) EXPECT_EQ(c.values(), s.chunks[0].values());
  EXPECT_EQ(s.chunks[0].values(),
            DrawPolicySamples({0, 0, 0}, {5, 0, 0}, straight, 1, 8, 0.0, expert, b).chunks[0].values());
  const PriorStats p = ComputePrior(s, ActionBounds{});
  EXPECT_EQ(p.sigma, ChunkMatrix::Constant(8, kActionDim, kDefaultSigmaMin));
  // Goal dead ahead: mean heading change stays near zero.
  for (int t = 0; t < 8; ++t) {
    const Eigen::Vector4d v = DenormalizeValue(p.mu.row(t).transpose(), ActionBounds{});
    EXPECT_LT(std::abs(std::atan2(v[2], v[3])), 0.01);
    EXPECT_GT(v[0], 0.0);
  }
}

TEST(DrawPolicySamples, DistinctStreamsGiveDistinctSamples) {
  Rng a(1), b(2);
  const ExpertConfig expert;
  const Instruction curve{InstructionKind::kCurveLeft, 0.5};
  const auto sa = DrawPolicySamples({0, 0, 0.3}, {4, 2, 0}, curve, 2, 8, 0.1, expert, a);
  const auto sb = DrawPolicySamples({0, 0, 0.3}, {4, 2, 0}, curve, 2, 8, 0.1, expert, b);
  EXPECT_NE(sa.chunks[0].values(), sb.chunks[0].values());
  EXPECT_NE(sa.chunks[0].values(), sa.chunks[1].values());
  EXPECT_EQ(sa.instruction.kind, InstructionKind::kCurveLeft);
  EXPECT_THROW(DrawPolicySamples({0, 0, 0}, {1, 0, 0}, curve, 0, 8, 0.1, expert, a), ConfigError);
}

TEST(ComputePrior, TransformsEachSampleBeforeAveraging) {
  // Two chunks turning in opposite directions: averaging in the global frame
  // first loses the rotation that each local transform undoes.
  std::vector<Action> left, right;
  for (int t = 0; t < 4; ++t) {
    left.push_back(Action::FromHeading(0.5, 0.0, 0.6));
    right.push_back(Action::FromHeading(0.5, 0.0, -0.6));
  }
  PolicySamples samples;
  samples.chunks = {ActionChunk(left, Frame::kGlobal, false),
                    ActionChunk(right, Frame::kGlobal, false)};
  const ActionBounds unit;
  const PriorStats p = ComputePrior(samples, unit);
  ChunkMatrix expected = (TransformToPlanner(samples.chunks[0], unit).values() +
                          TransformToPlanner(samples.chunks[1], unit).values()) / 2.0;
  EXPECT_LT((p.mu - expected).cwiseAbs().maxCoeff(), 1e-12);

  const ChunkMatrix global_mean = (samples.chunks[0].values() + samples.chunks[1].values()) / 2.0;
  const ChunkMatrix swapped =
      Normalize(GlobalToLocal(ActionChunk(global_mean, Frame::kGlobal, false)), unit).values();
  EXPECT_GT((p.mu - swapped).cwiseAbs().maxCoeff(), 1e-2);
}

TEST(ComputePrior, RejectsBadInput) {
  EXPECT_THROW(ComputePrior(PolicySamples{}, ActionBounds{}), ConfigError);
  PolicySamples mixed;
  mixed.chunks = {StraightChunk({0.1}), StraightChunk({0.1, 0.2})};
  EXPECT_THROW(ComputePrior(mixed, ActionBounds{}), ConfigError);
  PolicySamples ok;
  ok.chunks = {StraightChunk({0.1})};
  EXPECT_THROW(ComputePrior(ok, ActionBounds{}, 0.1, 0.05), ConfigError);
  ActionBounds broken;
  broken.upper[0] = broken.lower[0];
  EXPECT_THROW(ComputePrior(ok, broken), ConfigError);
}

TEST(UninformedPrior, ZeroMeanMaximalSpread) {
  const PriorStats p = UninformedPrior(8);
  EXPECT_EQ(p.horizon(), 8);
  EXPECT_EQ(p.mu, ChunkMatrix::Zero(8, kActionDim));
  EXPECT_EQ(p.sigma, ChunkMatrix::Constant(8, kActionDim, kDefaultSigmaMax));
  EXPECT_THROW(UninformedPrior(0), ConfigError);
}

}  // namespace
}  // namespace latentnav

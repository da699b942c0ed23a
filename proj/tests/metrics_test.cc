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

#include "latentnav/metrics.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "latentnav/errors.h"

namespace latentnav {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<Pose> Line(int n, double step, double heading = 0.0) {
  std::vector<Pose> out;
  for (int t = 0; t < n; ++t) out.push_back({step * t, 0.0, heading});
  return out;
}

TrajectoryPair Offset(const std::vector<Pose>& ref, double dx, double dy) {
  TrajectoryPair p{ref, ref};
  for (Pose& q : p.predicted) {
    q.x += dx;
    q.y += dy;
  }
  return p;
}

TEST(Ate, ConstantOffsetAndHandErrors) {
  const TrajectoryPair shifted = Offset(Line(6, 1.0), 0.6, 0.8);
  const AbsoluteError a = AteXy(shifted);
  EXPECT_NEAR(a.rmse, 1.0, 1e-12);
  EXPECT_NEAR(a.mean, 1.0, 1e-12);
  EXPECT_NEAR(a.final, 1.0, 1e-12);

  // Errors 9 (start, excluded), 0, 3, 4.
  TrajectoryPair p{Line(4, 1.0), Line(4, 1.0)};
  p.predicted[0].x += 9.0;
  p.predicted[2].y += 3.0;
  p.predicted[3].x += 4.0;
  const AbsoluteError b = AteXy(p);
  EXPECT_NEAR(b.mean, 7.0 / 3.0, 1e-12);
  EXPECT_NEAR(b.rmse, std::sqrt(25.0 / 3.0), 1e-12);
  EXPECT_NEAR(b.final, 4.0, 1e-12);
  EXPECT_LE(b.mean, b.rmse);
}

TEST(Ate, HeadingWrapsAndAverages) {
  TrajectoryPair wrap{Line(2, 1.0), Line(2, 1.0)};
  wrap.predicted[1].heading = 350.0 * kDeg;
  EXPECT_NEAR(AteHeading(wrap).final, 10.0, 1e-9);

  TrajectoryPair p{Line(3, 1.0), Line(3, 1.0)};
  p.predicted[1].heading = 10.0 * kDeg;
  p.predicted[2].heading = -20.0 * kDeg;
  const AbsoluteError h = AteHeading(p);
  EXPECT_NEAR(h.mean, 15.0, 1e-9);
  EXPECT_NEAR(h.rmse, 15.811388, 1e-6);
  EXPECT_NEAR(h.final, 20.0, 1e-9);
}

TEST(Rpe, HandCasesAndOffsetInvariance) {
  const std::vector<Pose> ref = Line(5, 1.0);
  const TrajectoryPair shifted = Offset(ref, 3.0, -2.0);
  EXPECT_EQ(RpeXy(shifted).rmse, 0.0);
  EXPECT_EQ(RpeXy(shifted).mean, 0.0);
  EXPECT_GT(AteXy(shifted).mean, 3.0);

  const TrajectoryPair faster{Line(5, 1.1), ref};
  EXPECT_NEAR(RpeXy(faster).mean, 0.1, 1e-12);
  EXPECT_NEAR(RpeXy(faster).rmse, 0.1, 1e-12);

  TrajectoryPair turning{ref, ref};
  for (int t = 0; t < 5; ++t) {
    turning.predicted[static_cast<size_t>(t)].heading = 5.0 * kDeg * t;
    turning.reference[static_cast<size_t>(t)].heading = 3.0 * kDeg * t;
  }
  EXPECT_NEAR(RpeHeading(turning).mean, 2.0, 1e-9);

  const TrajectoryPair biased{Line(5, 1.0, 0.4), Line(5, 1.0, 0.1)};
  EXPECT_NEAR(RpeHeading(biased).rmse, 0.0, 1e-12);
  EXPECT_GT(AteHeading(biased).mean, 17.0);
}

TEST(Metrics, RejectsMismatchedTrajectories) {
  EXPECT_THROW(AteXy(TrajectoryPair{Line(3, 1.0), Line(4, 1.0)}), ConfigError);
  EXPECT_THROW(RpeXy(TrajectoryPair{Line(1, 1.0), Line(1, 1.0)}), ConfigError);
}

TEST(Metrics, ColumnsRoundTrip) {
  TrajectoryPair p{Line(6, 1.1), Line(6, 1.0)};
  p.predicted[3].heading = 0.2;
  const EpisodeMetrics m = ComputeEpisodeMetrics(p);
  EXPECT_EQ(EpisodeMetrics::FromColumns(m.Columns()).Columns(), m.Columns());
  EXPECT_EQ(MetricColumnIndex("ate_xy_final"), 2);
  EXPECT_THROW(MetricColumnIndex("ate"), ConfigError);
  const auto c = m.Columns();
  EXPECT_LE(c[1], c[0]);
  EXPECT_LE(c[4], c[3]);
  EXPECT_LE(c[7], c[6]);
  EXPECT_LE(c[9], c[8]);
}

TEST(SignTest, OneSidedTail) {
  EXPECT_LT(SignTestPValue(50, 50), 1e-9);
  EXPECT_NEAR(SignTestPValue(50, 50), std::pow(0.5, 50), 1e-25);
  EXPECT_NEAR(SignTestPValue(0, 10), 1.0, 1e-12);
  EXPECT_NEAR(SignTestPValue(9, 10), 11.0 / 1024.0, 1e-12);
  EXPECT_NEAR(SignTestPValue(5, 10), 638.0 / 1024.0, 1e-12);
  EXPECT_EQ(SignTestPValue(0, 0), 1.0);
  EXPECT_THROW(SignTestPValue(11, 10), ConfigError);
}

MethodEpisodes Group(const std::string& name, const std::vector<double>& ate_final) {
  MethodEpisodes g{name, {}};
  for (double v : ate_final) {
    EpisodeMetrics m;
    m.ate_xy = {v, v, v};
    g.episodes.push_back(m);
  }
  return g;
}

TEST(Aggregate, MeansBestRowsAndComparisons) {
  const std::vector<MethodEpisodes> groups{Group("a", {1.0, 2.0, 3.0, 4.0}),
                                           Group("b", {2.0, 2.0, 5.0, 6.0})};
  const MetricTable t = Aggregate(groups);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(t.Row("a").mean.ate_xy.final, 2.5);
  EXPECT_DOUBLE_EQ(t.Row("b").mean.ate_xy.final, 3.75);
  EXPECT_EQ(t.best_row[2], 0);
  EXPECT_EQ(t.comparisons.size(), 2u * kMetricColumns);
  const auto it = std::find_if(t.comparisons.begin(), t.comparisons.end(), [](const auto& c) {
    return c.better == "a" && c.worse == "b" && c.column == "ate_xy_final";
  });
  ASSERT_NE(it, t.comparisons.end());
  EXPECT_EQ(it->wins, 3);
  EXPECT_EQ(it->ties, 1);
  EXPECT_DOUBLE_EQ(it->mean_delta, 1.25);
  EXPECT_NEAR(it->p_value, 1.0 / 8.0, 1e-12);
  EXPECT_THROW(t.Row("c"), ConfigError);
}

TEST(Aggregate, SingleMethodSingleEpisodeAndDuplicates) {
  const std::vector<MethodEpisodes> one{Group("only", {0.7})};
  const MetricTable t = Aggregate(one);
  EXPECT_EQ(t.rows.size(), 1u);
  EXPECT_TRUE(t.comparisons.empty());
  EXPECT_EQ(t.rows[0].episodes, 1);
  EXPECT_DOUBLE_EQ(t.rows[0].mean.ate_xy.final, 0.7);
  EXPECT_NE(t.ToText().find("only"), std::string::npos);
  const std::string csv = t.ToCsv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);

  const MetricTable dup = Aggregate(std::vector<MethodEpisodes>{Group("x", {0.7, 0.7, 0.7})});
  EXPECT_DOUBLE_EQ(dup.rows[0].mean.ate_xy.final, 0.7);
  const std::vector<MethodEpisodes> same{Group("p", {1.0, 2.0}), Group("q", {1.0, 2.0})};
  const MetricTable tie = Aggregate(same);
  EXPECT_EQ(tie.comparisons[0].ties, 2);
  EXPECT_EQ(tie.comparisons[0].p_value, 1.0);
  EXPECT_THROW(Aggregate(std::vector<MethodEpisodes>{}), ConfigError);
}

TEST(Aggregate, EpisodeOrderDoesNotMatter) {
  const std::vector<double> v{0.3, 1.7, 0.2, 0.9, 2.5};
  std::vector<double> r(v.rbegin(), v.rend());
  const std::vector<double> other{0.5, 0.4, 0.1, 1.0, 2.0};
  std::vector<double> other_r(other.rbegin(), other.rend());
  const MetricTable a = Aggregate(std::vector<MethodEpisodes>{Group("m", v), Group("n", other)});
  const MetricTable b =
      Aggregate(std::vector<MethodEpisodes>{Group("m", r), Group("n", other_r)});
  EXPECT_NEAR(a.rows[0].mean.ate_xy.final, b.rows[0].mean.ate_xy.final, 1e-15);
  EXPECT_EQ(a.comparisons[2].wins, b.comparisons[2].wins);
  EXPECT_EQ(a.comparisons[2].p_value, b.comparisons[2].p_value);
}

TEST(CurvatureSign, NetTurnDirection) {
  std::vector<Pose> left = Line(4, 1.0), straight = Line(4, 1.0);
  for (int t = 0; t < 4; ++t) left[static_cast<size_t>(t)].heading = 0.1 * t;
  EXPECT_EQ(CurvatureSign(left, 0.05), 1);
  for (Pose& p : left) p.heading = -p.heading;
  EXPECT_EQ(CurvatureSign(left, 0.05), -1);
  EXPECT_EQ(CurvatureSign(straight, 0.05), 0);
  // Wrap across the branch cut counts as a small left turn.
  const std::vector<Pose> wrap{{0, 0, 3.1}, {0, 0, -3.1}};
  EXPECT_EQ(CurvatureSign(wrap, 0.05), 1);
}

}  // namespace
}  // namespace latentnav

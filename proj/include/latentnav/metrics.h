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

#ifndef LATENTNAV_METRICS_H_
#define LATENTNAV_METRICS_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "latentnav/sim_env.h"

namespace latentnav {

struct TrajectoryPair {
  std::vector<Pose> predicted;
  std::vector<Pose> reference;

  // Throws ConfigError unless lengths match and there are >= 2 poses.
  void Validate() const;
};

struct AbsoluteError {
  double rmse = 0.0;
  double mean = 0.0;
  double final = 0.0;
};

struct RelativeError {
  double rmse = 0.0;
  double mean = 0.0;
};

// Position error over t = 1..T; the shared start pose is excluded. No alignment.
AbsoluteError AteXy(const TrajectoryPair& pair);
// Wrapped absolute heading error in degrees over t = 1..T.
AbsoluteError AteHeading(const TrajectoryPair& pair);
// Error between consecutive-frame displacements.
RelativeError RpeXy(const TrajectoryPair& pair);
// Error between consecutive-frame heading increments, in degrees.
RelativeError RpeHeading(const TrajectoryPair& pair);

inline constexpr int kMetricColumns = 10;
extern const std::array<const char*, kMetricColumns> kMetricColumnNames;

struct EpisodeMetrics {
  AbsoluteError ate_xy;
  AbsoluteError ate_hdg;
  RelativeError rpe_xy;
  RelativeError rpe_hdg;

  std::array<double, kMetricColumns> Columns() const;
  static EpisodeMetrics FromColumns(const std::array<double, kMetricColumns>& c);
};

EpisodeMetrics ComputeEpisodeMetrics(const TrajectoryPair& pair);

int MetricColumnIndex(const std::string& name);

// Per-episode metrics of one method; index i is the i-th paired episode.
struct MethodEpisodes {
  std::string method;
  std::vector<EpisodeMetrics> episodes;
};

// One-sided exact sign test: P(X >= positives) for X ~ Binomial(n, 1/2),
// zero deltas dropped.
double SignTestPValue(int positives, int n);

struct PairedComparison {
  std::string better;  // hypothesis: this method has the lower metric
  std::string worse;
  std::string column;
  int pairs = 0;
  int wins = 0;   // episodes where `better` is strictly lower
  int ties = 0;
  double mean_delta = 0.0;  // mean(worse - better)
  double p_value = 1.0;
};

PairedComparison ComparePaired(const MethodEpisodes& better, const MethodEpisodes& worse,
                               const std::string& column);

struct MetricRow {
  std::string method;
  int episodes = 0;
  EpisodeMetrics mean;
};

struct MetricTable {
  std::vector<MetricRow> rows;
  std::array<int, kMetricColumns> best_row{};  // argmin row per column
  std::vector<PairedComparison> comparisons;   // every ordered method pair

  const MetricRow& Row(const std::string& method) const;
  std::string ToCsv() const;
  std::string ToText() const;
  std::string ComparisonsCsv() const;
};

// Episode-level metrics averaged per method (each episode weighs equally).
MetricTable Aggregate(std::span<const MethodEpisodes> groups);

// Sign of the summed heading change; +1 left, -1 right, 0 straight within
// `tolerance` radians.
int CurvatureSign(std::span<const Pose> poses, double tolerance);

}  // namespace latentnav

#endif  // LATENTNAV_METRICS_H_

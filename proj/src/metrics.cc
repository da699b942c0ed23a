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
#include <iomanip>
#include <numbers>
#include <sstream>

#include "latentnav/errors.h"

namespace latentnav {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

AbsoluteError SummarizeAbsolute(const std::vector<double>& errors) {
  AbsoluteError out;
  double sq = 0.0;
  for (double e : errors) {
    out.mean += e;
    sq += e * e;
  }
  const double n = static_cast<double>(errors.size());
  out.mean /= n;
  out.rmse = std::sqrt(sq / n);
  out.final = errors.back();
  return out;
}

RelativeError SummarizeRelative(const std::vector<double>& errors) {
  const AbsoluteError a = SummarizeAbsolute(errors);
  return {a.rmse, a.mean};
}

double HeadingErrorDeg(double radians) { return std::abs(WrapAngle(radians)) * kRadToDeg; }

}  // namespace

void TrajectoryPair::Validate() const {
  if (predicted.size() != reference.size()) {
    throw ConfigError("trajectory pair: length mismatch (" + std::to_string(predicted.size()) +
                      " vs " + std::to_string(reference.size()) + ")");
  }
  if (predicted.size() < 2) throw ConfigError("trajectory pair: need at least 2 poses");
}

AbsoluteError AteXy(const TrajectoryPair& pair) {
  pair.Validate();
  std::vector<double> e;
  for (size_t t = 1; t < pair.predicted.size(); ++t) {
    e.push_back(std::hypot(pair.predicted[t].x - pair.reference[t].x,
                           pair.predicted[t].y - pair.reference[t].y));
  }
  return SummarizeAbsolute(e);
}

AbsoluteError AteHeading(const TrajectoryPair& pair) {
  pair.Validate();
  std::vector<double> e;
  for (size_t t = 1; t < pair.predicted.size(); ++t) {
    e.push_back(HeadingErrorDeg(pair.predicted[t].heading - pair.reference[t].heading));
  }
  return SummarizeAbsolute(e);
}

RelativeError RpeXy(const TrajectoryPair& pair) {
  pair.Validate();
  std::vector<double> e;
  for (size_t t = 0; t + 1 < pair.predicted.size(); ++t) {
    const double pdx = pair.predicted[t + 1].x - pair.predicted[t].x;
    const double pdy = pair.predicted[t + 1].y - pair.predicted[t].y;
    const double rdx = pair.reference[t + 1].x - pair.reference[t].x;
    const double rdy = pair.reference[t + 1].y - pair.reference[t].y;
    e.push_back(std::hypot(pdx - rdx, pdy - rdy));
  }
  return SummarizeRelative(e);
}

RelativeError RpeHeading(const TrajectoryPair& pair) {
  pair.Validate();
  std::vector<double> e;
  for (size_t t = 0; t + 1 < pair.predicted.size(); ++t) {
    const double pd = pair.predicted[t + 1].heading - pair.predicted[t].heading;
    const double rd = pair.reference[t + 1].heading - pair.reference[t].heading;
    e.push_back(HeadingErrorDeg(pd - rd));
  }
  return SummarizeRelative(e);
}

const std::array<const char*, kMetricColumns> kMetricColumnNames = {
    "ate_xy_rmse",  "ate_xy_mean",  "ate_xy_final", "ate_hdg_rmse", "ate_hdg_mean",
    "ate_hdg_final", "rpe_xy_rmse", "rpe_xy_mean",  "rpe_hdg_rmse", "rpe_hdg_mean"};

std::array<double, kMetricColumns> EpisodeMetrics::Columns() const {
  return {ate_xy.rmse,  ate_xy.mean,  ate_xy.final, ate_hdg.rmse, ate_hdg.mean,
          ate_hdg.final, rpe_xy.rmse, rpe_xy.mean,  rpe_hdg.rmse, rpe_hdg.mean};
}

EpisodeMetrics EpisodeMetrics::FromColumns(const std::array<double, kMetricColumns>& c) {
  EpisodeMetrics m;
  m.ate_xy = {c[0], c[1], c[2]};
  m.ate_hdg = {c[3], c[4], c[5]};
  m.rpe_xy = {c[6], c[7]};
  m.rpe_hdg = {c[8], c[9]};
  return m;
}

EpisodeMetrics ComputeEpisodeMetrics(const TrajectoryPair& pair) {
  return {AteXy(pair), AteHeading(pair), RpeXy(pair), RpeHeading(pair)};
}

int MetricColumnIndex(const std::string& name) {
  for (int i = 0; i < kMetricColumns; ++i) {
    if (name == kMetricColumnNames[static_cast<size_t>(i)]) return i;
  }
  throw ConfigError("unknown metric column '" + name + "'");
}

double SignTestPValue(int positives, int n) {
  if (n <= 0) return 1.0;
  if (positives < 0 || positives > n) throw ConfigError("sign test: invalid counts");
  // Sum the upper tail in log space to stay accurate for large n.
  const double log_half_n = n * std::log(0.5);
  double tail = 0.0;
  for (int i = positives; i <= n; ++i) {
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
    tail += std::exp(log_c + log_half_n);
  }
  return std::min(1.0, tail);
}

PairedComparison ComparePaired(const MethodEpisodes& better, const MethodEpisodes& worse,
                               const std::string& column) {
  if (better.episodes.size() != worse.episodes.size() || better.episodes.empty()) {
    throw ConfigError("paired comparison: methods must cover the same nonempty episode list");
  }
  const auto col = static_cast<size_t>(MetricColumnIndex(column));
  PairedComparison out;
  out.better = better.method;
  out.worse = worse.method;
  out.column = column;
  out.pairs = static_cast<int>(better.episodes.size());
  double sum = 0.0;
  for (size_t i = 0; i < better.episodes.size(); ++i) {
    const double delta = worse.episodes[i].Columns()[col] - better.episodes[i].Columns()[col];
    sum += delta;
    if (delta > 0.0) {
      ++out.wins;
    } else if (delta == 0.0) {
      ++out.ties;
    }
  }
  out.mean_delta = sum / out.pairs;
  out.p_value = SignTestPValue(out.wins, out.pairs - out.ties);
  return out;
}

MetricTable Aggregate(std::span<const MethodEpisodes> groups) {
  if (groups.empty()) throw ConfigError("aggregate: no methods");
  MetricTable table;
  for (const MethodEpisodes& g : groups) {
    if (g.episodes.empty()) throw ConfigError("aggregate: method '" + g.method + "' has no episodes");
    std::array<double, kMetricColumns> sum{};
    for (const EpisodeMetrics& m : g.episodes) {
      const auto c = m.Columns();
      for (int i = 0; i < kMetricColumns; ++i) sum[static_cast<size_t>(i)] += c[static_cast<size_t>(i)];
    }
    for (double& v : sum) v /= static_cast<double>(g.episodes.size());
    table.rows.push_back({g.method, static_cast<int>(g.episodes.size()),
                          EpisodeMetrics::FromColumns(sum)});
  }
  for (int c = 0; c < kMetricColumns; ++c) {
    int best = 0;
    for (size_t r = 1; r < table.rows.size(); ++r) {
      if (table.rows[r].mean.Columns()[static_cast<size_t>(c)] <
          table.rows[static_cast<size_t>(best)].mean.Columns()[static_cast<size_t>(c)]) {
        best = static_cast<int>(r);
      }
    }
    table.best_row[static_cast<size_t>(c)] = best;
  }
  for (const MethodEpisodes& a : groups) {
    for (const MethodEpisodes& b : groups) {
      if (&a == &b || a.episodes.size() != b.episodes.size()) continue;
      for (const char* column : kMetricColumnNames) {
        table.comparisons.push_back(ComparePaired(a, b, column));
      }
    }
  }
  return table;
}

const MetricRow& MetricTable::Row(const std::string& method) const {
  for (const MetricRow& r : rows) {
    if (r.method == method) return r;
  }
  throw ConfigError("metric table: no row for method '" + method + "'");
}

std::string MetricTable::ToCsv() const {
  std::ostringstream out;
  out << "method,episodes";
  for (const char* name : kMetricColumnNames) out << ',' << name;
  out << '\n' << std::setprecision(10);
  for (const MetricRow& r : rows) {
    out << r.method << ',' << r.episodes;
    for (double v : r.mean.Columns()) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

std::string MetricTable::ToText() const {
  std::ostringstream out;
  out << "Per-episode metrics averaged per method; ATE excludes t = 0; no alignment.\n";
  out << std::left << std::setw(18) << "method";
  for (const char* name : kMetricColumnNames) out << std::right << std::setw(15) << name;
  out << '\n';
  for (size_t r = 0; r < rows.size(); ++r) {
    out << std::left << std::setw(18) << rows[r].method;
    const auto cols = rows[r].mean.Columns();
    for (int c = 0; c < kMetricColumns; ++c) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(4) << cols[static_cast<size_t>(c)];
      if (best_row[static_cast<size_t>(c)] == static_cast<int>(r)) cell << '*';
      out << std::right << std::setw(15) << cell.str();
    }
    out << '\n';
  }
  out << "(* = best in column)\n";
  return out.str();
}

std::string MetricTable::ComparisonsCsv() const {
  std::ostringstream out;
  out << "better,worse,column,pairs,wins,ties,mean_delta,p_value\n" << std::setprecision(10);
  for (const PairedComparison& c : comparisons) {
    out << c.better << ',' << c.worse << ',' << c.column << ',' << c.pairs << ',' << c.wins
        << ',' << c.ties << ',' << c.mean_delta << ',' << c.p_value << '\n';
  }
  return out.str();
}

int CurvatureSign(std::span<const Pose> poses, double tolerance) {
  double net = 0.0;
  for (size_t t = 1; t < poses.size(); ++t) {
    net += WrapAngle(poses[t].heading - poses[t - 1].heading);
  }
  if (net > tolerance) return 1;
  if (net < -tolerance) return -1;
  return 0;
}

}  // namespace latentnav

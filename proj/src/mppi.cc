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

#include "latentnav/mppi.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "latentnav/errors.h"

namespace latentnav {

const char* PlanModeName(PlanMode mode) {
  switch (mode) {
    case PlanMode::kPolicyOnly: return "policy_only";
    case PlanMode::kUninformedMppi: return "uninformed_mppi";
    case PlanMode::kPolicyScoring: return "policy_scoring";
    case PlanMode::kWarmStartMppi: return "warm_start_mppi";
  }
  return "warm_start_mppi";
}

PlanMode ParsePlanMode(const std::string& name) {
  for (PlanMode m : {PlanMode::kPolicyOnly, PlanMode::kUninformedMppi,
                     PlanMode::kPolicyScoring, PlanMode::kWarmStartMppi}) {
    if (name == PlanModeName(m)) return m;
  }
  throw ConfigError("unknown planning method '" + name + "'");
}

void PlannerConfig::Validate() const {
  if (iterations < 1) throw ConfigError("planner: iterations (J) must be >= 1");
  if (candidates < 1) throw ConfigError("planner: candidates (N) must be >= 1");
  if (elites < 1 || elites > candidates) {
    throw ConfigError("planner: elites (K) must be in [1, N]");
  }
  if (!(lambda > 0.0)) throw ConfigError("planner: lambda must be > 0");
  if (!(sigma_min > 0.0 && sigma_min <= sigma_max)) {
    throw ConfigError("planner: need 0 < sigma_min <= sigma_max");
  }
  if (horizon < 1) throw ConfigError("planner: horizon must be >= 1");
}

namespace {

void CheckLatents(const LatentState& start, const LatentState& goal,
                  const PredictorParams& params) {
  const PredictorShape& shape = params.shape();
  if (start.tokens() != shape.tokens || start.dim() != shape.dim ||
      goal.tokens() != shape.tokens || goal.dim() != shape.dim) {
    throw ConfigError("planner: latent dimensions do not match the world model");
  }
}

}  // namespace

std::vector<double> ScoreCandidates(const LatentState& start,
                                    std::span<const ChunkMatrix> chunks,
                                    const LatentState& goal, const PredictorParams& params) {
  CheckLatents(start, goal, params);
  if (chunks.empty()) return {};
  const Eigen::Index horizon = chunks[0].rows();
  const auto batch = static_cast<Eigen::Index>(chunks.size());
  std::vector<Eigen::MatrixXd> steps(static_cast<size_t>(horizon),
                                     Eigen::MatrixXd(kActionDim, batch));
  for (Eigen::Index b = 0; b < batch; ++b) {
    const ChunkMatrix& c = chunks[static_cast<size_t>(b)];
    if (c.rows() != horizon) throw ConfigError("planner: candidates differ in horizon");
    for (Eigen::Index t = 0; t < horizon; ++t) {
      steps[static_cast<size_t>(t)].col(b) = c.row(t).transpose();
    }
  }
  const std::vector<Eigen::MatrixXd> rolled = RolloutBatch(params, start.values(), steps);
  const Eigen::MatrixXd& terminal = rolled.back();
  std::vector<double> costs(static_cast<size_t>(batch));
  for (Eigen::Index b = 0; b < batch; ++b) {
    costs[static_cast<size_t>(b)] =
        (terminal.col(b) - goal.values()).squaredNorm() / start.tokens();
  }
  return costs;
}

double ScoreCandidate(const LatentState& start, const ActionChunk& chunk,
                      const LatentState& goal, const PredictorParams& params) {
  if (!chunk.normalized() || chunk.frame() != Frame::kLocalBody) {
    throw ConfigError("score_candidate: chunk must be normalized and in the local frame");
  }
  const ChunkMatrix values = chunk.values();
  return ScoreCandidates(start, std::span<const ChunkMatrix>(&values, 1), goal, params)[0];
}

std::vector<double> EliteWeights(std::span<const double> costs, double lambda) {
  if (costs.empty()) throw ConfigError("elite weights: no costs");
  if (!(lambda > 0.0)) throw ConfigError("elite weights: lambda must be > 0");
  for (double c : costs) {
    if (!std::isfinite(c)) throw NumericError("elite weights: non-finite cost");
  }
  const double c_min = *std::min_element(costs.begin(), costs.end());
  std::vector<double> logits(costs.size());
  for (size_t k = 0; k < costs.size(); ++k) logits[k] = lambda * (c_min - costs[k]);
  // Max logit is exactly 0, so the sum is in [1, K].
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l);
  const double log_z = std::log(sum);
  std::vector<double> weights(costs.size());
  for (size_t k = 0; k < costs.size(); ++k) weights[k] = std::exp(logits[k] - log_z);
  return weights;
}

PriorStats UpdateDistribution(const EliteSet& elites, double sigma_min, double sigma_max) {
  if (elites.chunks.empty() || elites.chunks.size() != elites.weights.size()) {
    throw ConfigError("update_distribution: malformed elite set");
  }
  const int horizon = elites.chunks[0].horizon();
  PriorStats out;
  out.mu = ChunkMatrix::Zero(horizon, kActionDim);
  for (size_t k = 0; k < elites.chunks.size(); ++k) {
    out.mu += elites.weights[k] * elites.chunks[k].values();
  }
  ChunkMatrix var = ChunkMatrix::Zero(horizon, kActionDim);
  for (size_t k = 0; k < elites.chunks.size(); ++k) {
    var.array() += elites.weights[k] * (elites.chunks[k].values() - out.mu).array().square();
  }
  out.sigma = var.array().sqrt().max(sigma_min).min(sigma_max).matrix();
  return out;
}

std::vector<ChunkMatrix> SampleCandidates(const PriorStats& dist, int count, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<ChunkMatrix> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    ChunkMatrix c(dist.horizon(), kActionDim);
    for (int t = 0; t < dist.horizon(); ++t) {
      for (int d = 0; d < kActionDim; ++d) {
        c(t, d) = std::clamp(dist.mu(t, d) + dist.sigma(t, d) * normal(rng), -1.0, 1.0);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

std::vector<int> StableArgsort(std::span<const double> costs) {
  std::vector<int> order(costs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return costs[static_cast<size_t>(a)] < costs[static_cast<size_t>(b)];
  });
  return order;
}

void RejectNaN(std::span<const double> costs) {
  for (size_t i = 0; i < costs.size(); ++i) {
    if (std::isnan(costs[i])) {
      throw NumericError("planner: NaN cost for candidate " + std::to_string(i));
    }
  }
}

}  // namespace

PlanResult Plan(const LatentState& start, const LatentState& goal, const PriorStats& init,
                const PlannerConfig& cfg, const PredictorParams& params, Rng& rng,
                PlanMode mode) {
  cfg.Validate();
  CheckLatents(start, goal, params);
  if (init.mu.rows() != cfg.horizon || init.sigma.rows() != cfg.horizon) {
    throw ConfigError("planner: initial distribution horizon " +
                      std::to_string(init.mu.rows()) + " does not match H = " +
                      std::to_string(cfg.horizon));
  }
  PlanResult result;
  result.mode = mode;
  result.initial = init;
  result.elite_reinjection = cfg.reinject_elite;
  PriorStats dist = init;
  ChunkMatrix best_prev;
  for (int j = 0; j < cfg.iterations; ++j) {
    std::vector<ChunkMatrix> candidates = SampleCandidates(dist, cfg.candidates, rng);
    if (cfg.reinject_elite && j > 0) candidates[0] = best_prev;
    const std::vector<double> costs = ScoreCandidates(start, candidates, goal, params);
    RejectNaN(costs);
    const std::vector<int> order = StableArgsort(costs);

    IterationRecord rec;
    for (int k = 0; k < cfg.elites; ++k) {
      const int idx = order[static_cast<size_t>(k)];
      rec.elites.chunks.emplace_back(candidates[static_cast<size_t>(idx)], Frame::kLocalBody,
                                     true);
      rec.elites.costs.push_back(costs[static_cast<size_t>(idx)]);
      rec.elites.candidate_index.push_back(idx);
    }
    rec.elites.weights = EliteWeights(rec.elites.costs, cfg.lambda);
    rec.best_cost = rec.elites.costs.front();
    rec.mean_elite_cost =
        std::accumulate(rec.elites.costs.begin(), rec.elites.costs.end(), 0.0) / cfg.elites;
    dist = UpdateDistribution(rec.elites, cfg.sigma_min, cfg.sigma_max);
    best_prev = rec.elites.chunks.front().values();
    result.iterations.push_back(std::move(rec));
  }
  result.final_distribution = dist;

  const EliteSet& last = result.iterations.back().elites;
  int pick = 0;
  if (!cfg.greedy_elite) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0.0;
    pick = static_cast<int>(last.weights.size()) - 1;
    for (size_t k = 0; k < last.weights.size(); ++k) {
      acc += last.weights[k];
      if (u < acc) {
        pick = static_cast<int>(k);
        break;
      }
    }
  }
  result.chosen_index = pick;
  result.chosen = last.chunks[static_cast<size_t>(pick)];
  result.chosen_cost = last.costs[static_cast<size_t>(pick)];
  return result;
}

PlanResult PolicyScoringPlan(std::span<const ActionChunk> candidates, const LatentState& start,
                             const LatentState& goal, const PredictorParams& params) {
  if (candidates.empty()) throw ConfigError("policy scoring: no candidates");
  std::vector<ChunkMatrix> values;
  for (const ActionChunk& c : candidates) {
    if (!c.normalized() || c.frame() != Frame::kLocalBody) {
      throw ConfigError("policy scoring: candidates must be normalized local chunks");
    }
    values.push_back(c.values());
  }
  PlanResult result;
  result.mode = PlanMode::kPolicyScoring;
  result.candidate_costs = ScoreCandidates(start, values, goal, params);
  RejectNaN(result.candidate_costs);
  const std::vector<int> order = StableArgsort(result.candidate_costs);
  result.chosen_index = order.front();
  result.chosen = candidates[static_cast<size_t>(result.chosen_index)];
  result.chosen_cost = result.candidate_costs[static_cast<size_t>(result.chosen_index)];
  return result;
}

}  // namespace latentnav

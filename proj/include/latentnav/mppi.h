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

#ifndef LATENTNAV_MPPI_H_
#define LATENTNAV_MPPI_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latentnav/action_space.h"
#include "latentnav/policy_prior.h"
#include "latentnav/sim_env.h"
#include "latentnav/world_model.h"

namespace latentnav {

enum class PlanMode { kPolicyOnly, kUninformedMppi, kPolicyScoring, kWarmStartMppi };

const char* PlanModeName(PlanMode mode);
PlanMode ParsePlanMode(const std::string& name);

struct PlannerConfig {
  int iterations = 4;   // J
  int candidates = 32;  // N
  int elites = 4;       // K
  double lambda = 0.8;  // inverse temperature
  double sigma_min = kDefaultSigmaMin;
  double sigma_max = kDefaultSigmaMax;
  int horizon = 8;
  uint64_t seed = 5;
  // Sample the executed chunk from the final elites by weight (false) or
  // take the lowest-cost elite (true).
  bool greedy_elite = false;
  // Carry the best elite of iteration j into iteration j + 1 as candidate 0.
  bool reinject_elite = true;

  void Validate() const;
  bool operator==(const PlannerConfig&) const = default;
};

struct EliteSet {
  std::vector<ActionChunk> chunks;  // normalized, local frame
  std::vector<double> costs;        // ascending
  std::vector<double> weights;      // sum to 1
  std::vector<int> candidate_index;
};

struct IterationRecord {
  double best_cost = 0.0;
  double mean_elite_cost = 0.0;
  EliteSet elites;
};

struct PlanResult {
  PlanMode mode = PlanMode::kWarmStartMppi;
  ActionChunk chosen;  // normalized, local frame
  double chosen_cost = 0.0;
  int chosen_index = 0;  // into the final elite set, or the candidate list
  PriorStats initial;
  PriorStats final_distribution;
  std::vector<IterationRecord> iterations;
  std::vector<double> candidate_costs;  // policy scoring only
  bool elite_reinjection = false;
};

// Terminal latent distance after rolling the chunk out for its horizon.
double ScoreCandidate(const LatentState& start, const ActionChunk& chunk,
                      const LatentState& goal, const PredictorParams& params);

// Batched version over normalized local chunk matrices.
std::vector<double> ScoreCandidates(const LatentState& start,
                                    std::span<const ChunkMatrix> chunks,
                                    const LatentState& goal, const PredictorParams& params);

// exp(lambda (c_min - c_k)) normalized over k, evaluated in log space.
std::vector<double> EliteWeights(std::span<const double> costs, double lambda);

// Weighted mean and std over elites, std clamped to [sigma_min, sigma_max].
PriorStats UpdateDistribution(const EliteSet& elites, double sigma_min, double sigma_max);

// clamp(mu + sigma * eps, -1, 1) for N draws; eps drawn step-major per candidate.
std::vector<ChunkMatrix> SampleCandidates(const PriorStats& dist, int count, Rng& rng);

// Iterative MPPI from `init` (warm start or UninformedPrior).
PlanResult Plan(const LatentState& start, const LatentState& goal, const PriorStats& init,
                const PlannerConfig& cfg, const PredictorParams& params, Rng& rng,
                PlanMode mode = PlanMode::kWarmStartMppi);

// Scores each transformed policy sample and returns the cheapest (ties to the
// lowest index); no distribution update.
PlanResult PolicyScoringPlan(std::span<const ActionChunk> candidates, const LatentState& start,
                             const LatentState& goal, const PredictorParams& params);

}  // namespace latentnav

#endif  // LATENTNAV_MPPI_H_

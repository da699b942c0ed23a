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

#ifndef LATENTNAV_EPISODE_H_
#define LATENTNAV_EPISODE_H_

#include <optional>
#include <vector>

#include "latentnav/mppi.h"
#include "latentnav/policy_prior.h"
#include "latentnav/sim_env.h"
#include "latentnav/world_model.h"

namespace latentnav {

// Frozen encoder, trained predictor and the action bounds it was trained with.
struct WorldModel {
  Encoder encoder;
  PredictorParams params;
  ActionBounds bounds;
};

struct EpisodeConfig {
  int max_steps = 24;
  int replan_interval = 1;  // r, in [1, H]
  int policy_samples = 4;   // N_pi
  double noise_scale = 0.03;
  PlannerConfig planner;
  ExpertConfig expert;

  void Validate() const;
};

struct ReplanRecord {
  int step = 0;
  double chosen_cost = 0.0;
  std::vector<double> best_cost;        // per MPPI iteration
  std::vector<double> mean_elite_cost;  // per MPPI iteration
  std::vector<double> candidate_costs;  // policy scoring
  std::optional<PriorStats> prior;      // initial distribution handed to MPPI
  double policy_ms = 0.0;
  double plan_ms = 0.0;
};

struct EpisodeRecord {
  PlanMode method = PlanMode::kPolicyOnly;
  int episode_index = 0;
  EpisodeSetup setup;
  std::vector<Pose> executed;      // max_steps + 1
  std::vector<Pose> ground_truth;  // noise-free expert from the same start/goal/instruction
  std::vector<ReplanRecord> replans;
};

// Observe -> plan -> denormalize -> execute the first r actions, repeated
// until max_steps actions have been executed.
EpisodeRecord RunEpisode(PlanMode method, const WorldSpec& world, const WorldModel& model,
                         const EpisodeSetup& setup, const EpisodeConfig& config, Rng& rng,
                         int episode_index = 0);

// Throws ConfigError if the model cannot be used with this world and config.
void CheckModelCompatibility(const WorldSpec& world, const WorldModel& model,
                             const EpisodeConfig& config);

}  // namespace latentnav

#endif  // LATENTNAV_EPISODE_H_

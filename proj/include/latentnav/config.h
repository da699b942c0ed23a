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

#ifndef LATENTNAV_CONFIG_H_
#define LATENTNAV_CONFIG_H_

#include <filesystem>
#include <string>
#include <vector>

#include "latentnav/episode.h"
#include "latentnav/mppi.h"
#include "latentnav/sim_env.h"
#include "latentnav/world_model.h"

namespace latentnav {

struct WorldSection {
  int landmarks = 6;
  double arena_half_width = 10.0;
  uint64_t seed = 42;
};

struct ModelSection {
  int tokens = 4;
  int dim = 16;
  double encoder_gain = 0.25;
  uint64_t encoder_seed = 7;
  int action_embed = 32;
  int hidden = 128;
  int layers = 3;
};

struct EvaluationSection {
  std::vector<PlanMode> methods = {PlanMode::kPolicyOnly, PlanMode::kUninformedMppi,
                                   PlanMode::kPolicyScoring, PlanMode::kWarmStartMppi};
  int episodes = 100;
  int policy_samples = 4;
  double noise_scale = 0.03;
  int replan_interval = 1;
  int max_steps = 24;
  uint64_t seed = 1000;
  double curvature_tolerance = 0.05;  // rad, below this the net turn counts as straight
  std::vector<int> sweep_iterations = {1, 2, 4, 8};
  std::vector<int> sweep_candidates = {16, 32, 64};
  int sweep_problems = 4;
};

// Everything a run needs. The planner horizon is the single source for the
// chunk length used by the dataset, the training segments and the planner.
struct ExperimentConfig {
  WorldSection world;
  DatasetConfig dataset;
  ModelSection model;
  RolloutConfig training;
  PlannerConfig planner;
  EvaluationSection evaluation;
  std::string output_dir = "run";

  // Throws ConfigError naming the offending key.
  void Validate() const;

  WorldSpec MakeWorld() const;
  Encoder::Spec EncoderSpec() const;
  PredictorShape Shape() const;
  EpisodeConfig MakeEpisodeConfig() const;
};

ExperimentConfig ParseConfig(const std::string& text, const std::string& source = "config");
ExperimentConfig LoadConfig(const std::filesystem::path& path);
std::string ConfigToToml(const ExperimentConfig& config);

}  // namespace latentnav

#endif  // LATENTNAV_CONFIG_H_

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

#include "latentnav/episode.h"

#include <algorithm>
#include <chrono>

#include "latentnav/errors.h"

namespace latentnav {

namespace {

double MillisecondsSince(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

void EpisodeConfig::Validate() const {
  planner.Validate();
  if (max_steps < 1) throw ConfigError("episode: max_steps must be >= 1");
  if (replan_interval < 1 || replan_interval > planner.horizon) {
    throw ConfigError("episode: replan_interval must be in [1, H]");
  }
  if (policy_samples < 1) throw ConfigError("episode: policy_samples must be >= 1");
  if (!(noise_scale >= 0.0)) throw ConfigError("episode: noise_scale must be >= 0");
}

void CheckModelCompatibility(const WorldSpec& world, const WorldModel& model,
                             const EpisodeConfig& config) {
  config.Validate();
  const Encoder::Spec& enc = model.encoder.spec();
  const PredictorShape& shape = model.params.shape();
  if (enc.input_dim != 3 * static_cast<int>(world.landmarks.size())) {
    throw ConfigError("model/world mismatch: encoder expects " + std::to_string(enc.input_dim) +
                      " features, world produces " +
                      std::to_string(3 * world.landmarks.size()));
  }
  if (enc.tokens != shape.tokens || enc.dim != shape.dim) {
    throw ConfigError("model mismatch: encoder latent is " + std::to_string(enc.tokens) + "x" +
                      std::to_string(enc.dim) + ", predictor expects " +
                      std::to_string(shape.tokens) + "x" + std::to_string(shape.dim));
  }
  model.bounds.Validate();
}

EpisodeRecord RunEpisode(PlanMode method, const WorldSpec& world, const WorldModel& model,
                         const EpisodeSetup& setup, const EpisodeConfig& config, Rng& rng,
                         int episode_index) {
  CheckModelCompatibility(world, model, config);
  const PlannerConfig& pc = config.planner;
  const int horizon = pc.horizon;

  EpisodeRecord record;
  record.method = method;
  record.episode_index = episode_index;
  record.setup = setup;
  record.ground_truth = ExpertRollout(setup.start, setup.goal, setup.instruction,
                                      config.max_steps, config.expert);
  record.executed.push_back(setup.start);
  const LatentState goal_latent = model.encoder.Encode(Observe(setup.goal, world));

  int step = 0;
  while (step < config.max_steps) {
    const Pose pose = record.executed.back();
    const LatentState latent = model.encoder.Encode(Observe(pose, world));
    ReplanRecord replan;
    replan.step = step;

    auto clock = std::chrono::steady_clock::now();
    PolicySamples samples;
    if (method != PlanMode::kUninformedMppi) {
      samples = DrawPolicySamples(pose, setup.goal, setup.instruction, config.policy_samples,
                                  horizon, config.noise_scale, config.expert, rng);
    }
    replan.policy_ms = MillisecondsSince(clock);

    clock = std::chrono::steady_clock::now();
    ActionChunk local;
    switch (method) {
      case PlanMode::kPolicyOnly:
        local = GlobalToLocal(samples.chunks.front());
        break;
      case PlanMode::kPolicyScoring: {
        std::vector<ActionChunk> candidates;
        for (const ActionChunk& c : samples.chunks) {
          candidates.push_back(TransformToPlanner(c, model.bounds));
        }
        const PlanResult result = PolicyScoringPlan(candidates, latent, goal_latent, model.params);
        replan.chosen_cost = result.chosen_cost;
        replan.candidate_costs = result.candidate_costs;
        local = Denormalize(result.chosen, model.bounds);
        break;
      }
      case PlanMode::kUninformedMppi:
      case PlanMode::kWarmStartMppi: {
        const PriorStats init =
            method == PlanMode::kWarmStartMppi
                ? ComputePrior(samples, model.bounds, pc.sigma_min, pc.sigma_max)
                : UninformedPrior(horizon, pc.sigma_max);
        const PlanResult result = Plan(latent, goal_latent, init, pc, model.params, rng, method);
        replan.chosen_cost = result.chosen_cost;
        for (const IterationRecord& it : result.iterations) {
          replan.best_cost.push_back(it.best_cost);
          replan.mean_elite_cost.push_back(it.mean_elite_cost);
        }
        replan.prior = init;
        local = Denormalize(result.chosen, model.bounds);
        break;
      }
    }
    replan.plan_ms = MillisecondsSince(clock);

    const int execute = std::min({config.replan_interval, config.max_steps - step, horizon});
    for (int k = 0; k < execute; ++k) {
      record.executed.push_back(StepDynamics(record.executed.back(), local.at(k)));
    }
    step += execute;
    record.replans.push_back(std::move(replan));
  }
  return record;
}

}  // namespace latentnav

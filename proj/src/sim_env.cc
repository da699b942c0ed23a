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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "latentnav/errors.h"

namespace latentnav {

double WrapAngle(double angle) {
  if (angle > -std::numbers::pi && angle <= std::numbers::pi) return angle;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle + std::numbers::pi, kTwoPi);
  if (a <= 0.0) a += kTwoPi;
  return a - std::numbers::pi;
}

void WorldSpec::Validate() const {
  if (landmarks.size() < 4) throw ConfigError("world: need at least 4 landmarks");
  if (!(arena_half_width > 0.0)) throw ConfigError("world: arena_half_width must be > 0");
  for (size_t i = 0; i < landmarks.size(); ++i) {
    if (landmarks[i].cwiseAbs().maxCoeff() > arena_half_width) {
      throw ConfigError("world: landmark " + std::to_string(i) + " outside the arena");
    }
    for (size_t j = 0; j < i; ++j) {
      if (landmarks[i] == landmarks[j]) {
        throw ConfigError("world: duplicate landmarks " + std::to_string(j) +
                          " and " + std::to_string(i));
      }
    }
  }
}

WorldSpec WorldSpec::Random(int num_landmarks, double arena_half_width,
                            uint64_t seed) {
  WorldSpec world;
  world.arena_half_width = arena_half_width;
  world.seed = seed;
  Rng rng(seed);
  std::uniform_real_distribution<double> coord(-0.9 * arena_half_width,
                                               0.9 * arena_half_width);
  for (int i = 0; i < num_landmarks; ++i) {
    const double x = coord(rng);
    const double y = coord(rng);
    world.landmarks.emplace_back(x, y);
  }
  world.Validate();
  return world;
}

const char* InstructionName(InstructionKind kind) {
  switch (kind) {
    case InstructionKind::kStraight: return "straight";
    case InstructionKind::kCurveLeft: return "curve_left";
    case InstructionKind::kCurveRight: return "curve_right";
  }
  return "straight";
}

InstructionKind ParseInstructionKind(const std::string& name) {
  if (name == "straight") return InstructionKind::kStraight;
  if (name == "curve_left") return InstructionKind::kCurveLeft;
  if (name == "curve_right") return InstructionKind::kCurveRight;
  throw ConfigError("unknown instruction kind '" + name + "'");
}

double Instruction::CurvatureSign() const {
  switch (kind) {
    case InstructionKind::kCurveLeft: return strength;
    case InstructionKind::kCurveRight: return -strength;
    case InstructionKind::kStraight: return 0.0;
  }
  return 0.0;
}

Pose StepDynamics(const Pose& pose, const Action& local_action) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  Pose next;
  next.x = pose.x + c * local_action.dx - s * local_action.dy;
  next.y = pose.y + s * local_action.dx + c * local_action.dy;
  next.heading = WrapAngle(pose.heading + local_action.HeadingChange());
  return next;
}

Observation Observe(const Pose& pose, const WorldSpec& world) {
  Observation obs;
  obs.features.resize(3 * static_cast<Eigen::Index>(world.landmarks.size()));
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  for (size_t i = 0; i < world.landmarks.size(); ++i) {
    const double ox = world.landmarks[i].x() - pose.x;
    const double oy = world.landmarks[i].y() - pose.y;
    const auto k = static_cast<Eigen::Index>(3 * i);
    obs.features[k] = c * ox + s * oy;
    obs.features[k + 1] = -s * ox + c * oy;
    obs.features[k + 2] = 1.0 / std::max(std::hypot(ox, oy), kMinObservationRange);
  }
  return obs;
}

namespace {

// One controller step from `pose`; returns the body-frame action.
Action ControllerAction(const Pose& pose, const Pose& goal,
                        const Instruction& instruction,
                        const ExpertConfig& expert) {
  const double gx = goal.x - pose.x;
  const double gy = goal.y - pose.y;
  const double dist = std::hypot(gx, gy);
  const double bearing = dist > 1e-12 ? WrapAngle(std::atan2(gy, gx) - pose.heading) : 0.0;
  const double bias = instruction.CurvatureSign() * expert.phi_max;
  const double fade = expert.arrive_radius > 0.0 ? std::min(1.0, dist / expert.arrive_radius) : 1.0;
  const double turn =
      fade * std::clamp(expert.heading_gain * bearing + bias, -expert.phi_max, expert.phi_max);
  const double speed = std::min(expert.v_max, expert.speed_gain * dist) *
                       std::max(0.0, std::cos(bearing));
  // Move along the mid-step heading so that turning steps are arcs.
  return Action::FromHeading(speed * std::cos(0.5 * turn),
                             speed * std::sin(0.5 * turn), turn);
}

}  // namespace

ActionChunk ExpertPolicy(const Pose& pose, const Pose& goal,
                         const Instruction& instruction, int horizon,
                         double noise_scale, const ExpertConfig& expert, Rng& rng) {
  if (horizon < 1) throw ConfigError("expert_policy: horizon must be >= 1");
  if (!(noise_scale >= 0.0)) throw ConfigError("expert_policy: noise_scale must be >= 0");
  ChunkMatrix values(horizon, kActionDim);
  Pose internal = pose;
  // Goal feedback inside the chunk comes from the instruction-free rollout;
  // the instruction only adds its turn bias on top.
  Pose reference = pose;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < horizon; ++t) {
    const Action local = ControllerAction(reference, goal, instruction, expert);
    reference = StepDynamics(reference, ControllerAction(reference, goal, Instruction{}, expert));
    // Express the displacement in the chunk-start frame.
    const double rel = internal.heading - pose.heading;
    const double c = std::cos(rel);
    const double s = std::sin(rel);
    Eigen::Vector4d a(c * local.dx - s * local.dy, s * local.dx + c * local.dy,
                      local.sin_dphi, local.cos_dphi);
    internal = StepDynamics(internal, local);
    if (noise_scale > 0.0) {
      for (int d = 0; d < kActionDim; ++d) a[d] += noise_scale * normal(rng);
      const double norm = std::hypot(a[2], a[3]);
      if (norm > 1e-12) {
        a[2] /= norm;
        a[3] /= norm;
      } else {
        a[2] = 0.0;
        a[3] = 1.0;
      }
      const double step = std::hypot(a[0], a[1]);
      if (step > expert.v_max) {
        a[0] *= expert.v_max / step;
        a[1] *= expert.v_max / step;
      }
    }
    values.row(t) = a.transpose();
  }
  return ActionChunk(std::move(values), Frame::kGlobal, false);
}

std::vector<Pose> ExpertRollout(const Pose& start, const Pose& goal,
                                const Instruction& instruction, int steps,
                                const ExpertConfig& expert) {
  std::vector<Pose> poses{start};
  poses.reserve(static_cast<size_t>(steps) + 1);
  for (int t = 0; t < steps; ++t) {
    poses.push_back(
        StepDynamics(poses.back(), ControllerAction(poses.back(), goal, instruction, expert)));
  }
  return poses;
}

void DatasetConfig::Validate() const {
  if (episodes < 1) throw ConfigError("dataset: episodes must be >= 1");
  if (steps_per_episode < 1) throw ConfigError("dataset: steps_per_episode must be >= 1");
  if (horizon < 1) throw ConfigError("dataset: horizon must be >= 1");
  if (replan_interval < 1 || replan_interval > horizon) {
    throw ConfigError("dataset: replan_interval must be in [1, horizon]");
  }
  if (!(noise_scale >= 0.0)) throw ConfigError("dataset: noise_scale must be >= 0");
}

void Dataset::CheckConsistency() const {
  for (size_t e = 0; e < episodes.size(); ++e) {
    const DatasetEpisode& ep = episodes[e];
    if (ep.poses.size() != ep.actions.size() + 1 ||
        ep.observations.size() != ep.poses.size() ||
        ep.normalized_actions.size() != ep.actions.size()) {
      throw ConfigError("dataset: inconsistent lengths in episode " + std::to_string(e));
    }
    for (size_t t = 0; t < ep.actions.size(); ++t) {
      const Pose next = StepDynamics(ep.poses[t], ep.actions[t]);
      if (!(next == ep.poses[t + 1]) ||
          Observe(next, world).features != ep.observations[t + 1].features) {
        throw ConfigError("dataset: transition " + std::to_string(t) + " of episode " +
                          std::to_string(e) + " is not observe(step_dynamics(...))");
      }
    }
  }
}

EpisodeSetup RandomEpisodeSetup(const WorldSpec& world, Rng& rng) {
  const double inner = 0.6 * world.arena_half_width;
  std::uniform_real_distribution<double> coord(-inner, inner);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> range(2.0, 6.0);
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_real_distribution<double> strength(0.0, 1.0);

  EpisodeSetup setup;
  setup.start = {coord(rng), coord(rng), WrapAngle(angle(rng))};
  const double bearing = angle(rng);
  const double dist = range(rng);
  const double limit = 0.9 * world.arena_half_width;
  setup.goal.x = std::clamp(setup.start.x + dist * std::cos(bearing), -limit, limit);
  setup.goal.y = std::clamp(setup.start.y + dist * std::sin(bearing), -limit, limit);
  setup.goal.heading = WrapAngle(bearing);
  setup.instruction.kind = static_cast<InstructionKind>(kind(rng));
  setup.instruction.strength =
      setup.instruction.kind == InstructionKind::kStraight ? 0.0 : strength(rng);
  return setup;
}

Dataset GenerateDataset(const WorldSpec& world, const DatasetConfig& config) {
  world.Validate();
  config.Validate();
  Rng rng(config.seed);
  Dataset dataset;
  dataset.world = world;
  dataset.bounds_frame = config.bounds_frame;
  dataset.episodes.reserve(static_cast<size_t>(config.episodes));
  for (int e = 0; e < config.episodes; ++e) {
    const EpisodeSetup setup = RandomEpisodeSetup(world, rng);
    DatasetEpisode ep;
    ep.goal = setup.goal;
    ep.instruction = setup.instruction;
    ep.poses.push_back(setup.start);
    ep.observations.push_back(Observe(setup.start, world));
    while (static_cast<int>(ep.actions.size()) < config.steps_per_episode) {
      const ActionChunk global =
          ExpertPolicy(ep.poses.back(), setup.goal, setup.instruction, config.horizon,
                       config.noise_scale, config.expert, rng);
      const ActionChunk local = GlobalToLocal(global);
      for (int t = 0; t < config.replan_interval &&
                      static_cast<int>(ep.actions.size()) < config.steps_per_episode;
           ++t) {
        ep.actions.push_back(local.at(t));
        ep.global_actions.push_back(global.at(t));
        ep.poses.push_back(StepDynamics(ep.poses.back(), local.at(t)));
        ep.observations.push_back(Observe(ep.poses.back(), world));
      }
    }
    dataset.episodes.push_back(std::move(ep));
  }

  std::vector<Action> pool;
  for (const auto& ep : dataset.episodes) {
    const auto& src = config.bounds_frame == Frame::kLocalBody ? ep.actions : ep.global_actions;
    pool.insert(pool.end(), src.begin(), src.end());
  }
  dataset.bounds = ComputeBounds(pool);
  for (auto& ep : dataset.episodes) {
    for (const Action& a : ep.actions) {
      ep.normalized_actions.push_back(NormalizeValue(a.AsVector(), dataset.bounds));
    }
  }
  return dataset;
}

}  // namespace latentnav

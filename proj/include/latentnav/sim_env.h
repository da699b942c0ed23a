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

#ifndef LATENTNAV_SIM_ENV_H_
#define LATENTNAV_SIM_ENV_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "latentnav/action_space.h"

namespace latentnav {

using Rng = std::mt19937_64;

// Wraps an angle to (-pi, pi].
double WrapAngle(double angle);

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  bool operator==(const Pose&) const = default;
};

struct WorldSpec {
  std::vector<Eigen::Vector2d> landmarks;
  double arena_half_width = 10.0;
  uint64_t seed = 0;

  // Throws ConfigError on < 4 landmarks, duplicates or points outside the arena.
  void Validate() const;
  // Landmarks drawn uniformly inside 90% of the arena.
  static WorldSpec Random(int num_landmarks, double arena_half_width, uint64_t seed);
};

// Body-frame offset (dx, dy) and inverse distance per landmark.
struct Observation {
  Eigen::VectorXd features;
};

inline constexpr double kMinObservationRange = 0.1;

enum class InstructionKind { kStraight, kCurveLeft, kCurveRight };

const char* InstructionName(InstructionKind kind);
InstructionKind ParseInstructionKind(const std::string& name);

struct Instruction {
  InstructionKind kind = InstructionKind::kStraight;
  double strength = 0.0;  // [0, 1]

  // Signed per-step turn bias in units of the maximum turn rate.
  double CurvatureSign() const;
  bool operator==(const Instruction&) const = default;
};

struct ExpertConfig {
  double v_max = 0.5;        // m / step
  double phi_max = 0.3;      // rad / step
  double heading_gain = 1.0;
  double speed_gain = 0.5;   // 1 / step
  double arrive_radius = 0.5;  // turning fades out linearly inside this range
};

// Local-frame action applied at the current heading, then heading update.
Pose StepDynamics(const Pose& pose, const Action& local_action);

Observation Observe(const Pose& pose, const WorldSpec& world);

// Proportional goal-seeking controller rolled forward for `horizon` steps,
// expressed as a global (chunk-start frame) chunk, with i.i.d. Gaussian noise
// of `noise_scale` on every dimension. Goal feedback within the chunk follows
// the instruction-free rollout, so the instruction bias shifts every step's
// turn by the same amount before clamping.
ActionChunk ExpertPolicy(const Pose& pose, const Pose& goal,
                         const Instruction& instruction, int horizon,
                         double noise_scale, const ExpertConfig& expert, Rng& rng);

// Noise-free closed-loop expert trajectory of `steps` steps (steps + 1 poses).
std::vector<Pose> ExpertRollout(const Pose& start, const Pose& goal,
                                const Instruction& instruction, int steps,
                                const ExpertConfig& expert);

struct DatasetConfig {
  int episodes = 200;
  int steps_per_episode = 24;
  int horizon = 8;
  int replan_interval = 4;
  double noise_scale = 0.1;
  Frame bounds_frame = Frame::kLocalBody;
  uint64_t seed = 1;
  ExpertConfig expert;

  void Validate() const;
};

struct DatasetEpisode {
  Pose goal;
  Instruction instruction;
  std::vector<Pose> poses;                // steps + 1
  std::vector<Observation> observations;  // steps + 1
  std::vector<Action> actions;            // steps, physical local frame
  std::vector<Action> global_actions;     // steps, chunk-start frame
  std::vector<Eigen::Vector4d> normalized_actions;  // steps, in [-1, 1]
};

struct Dataset {
  WorldSpec world;
  ActionBounds bounds;
  Frame bounds_frame = Frame::kLocalBody;
  std::vector<DatasetEpisode> episodes;

  // Re-checks observe(step_dynamics(pose, a)) == next observation on every
  // transition. Throws ConfigError on the first mismatch.
  void CheckConsistency() const;
};

// Random start pose inside the inner part of the arena and a goal 2-6 m away.
struct EpisodeSetup {
  Pose start;
  Pose goal;
  Instruction instruction;
};
EpisodeSetup RandomEpisodeSetup(const WorldSpec& world, Rng& rng);

Dataset GenerateDataset(const WorldSpec& world, const DatasetConfig& config);

}  // namespace latentnav

#endif  // LATENTNAV_SIM_ENV_H_

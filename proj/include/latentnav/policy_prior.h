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

#ifndef LATENTNAV_POLICY_PRIOR_H_
#define LATENTNAV_POLICY_PRIOR_H_

#include <vector>

#include <Eigen/Core>

#include "latentnav/action_space.h"
#include "latentnav/sim_env.h"

namespace latentnav {

inline constexpr double kDefaultSigmaMin = 0.01;
inline constexpr double kDefaultSigmaMax = 0.05;

// Per-(step, dim) Gaussian over normalized local-frame action chunks.
struct PriorStats {
  ChunkMatrix mu;
  ChunkMatrix sigma;

  int horizon() const { return static_cast<int>(mu.rows()); }
  bool operator==(const PriorStats& other) const {
    return mu == other.mu && sigma == other.sigma;
  }
};

// Stochastic policy draws in the policy's (global) frame.
struct PolicySamples {
  std::vector<ActionChunk> chunks;
  Instruction instruction;
};

// N independent expert draws; the reference stochastic policy.
PolicySamples DrawPolicySamples(const Pose& pose, const Pose& goal,
                                const Instruction& instruction, int num_samples,
                                int horizon, double noise_scale,
                                const ExpertConfig& expert, Rng& rng);

// normalize(global_to_local(chunk)): maps a policy chunk into the planner's space.
ActionChunk TransformToPlanner(const ActionChunk& chunk, const ActionBounds& bounds);

// Elementwise mean and population std of the transformed samples, with std
// clamped to [sigma_min, sigma_max].
PriorStats ComputePrior(const PolicySamples& samples, const ActionBounds& bounds,
                        double sigma_min = kDefaultSigmaMin,
                        double sigma_max = kDefaultSigmaMax);

// mu = 0, sigma = sigma_max: the uninformed MPPI initialization.
PriorStats UninformedPrior(int horizon, double sigma_max = kDefaultSigmaMax);

}  // namespace latentnav

#endif  // LATENTNAV_POLICY_PRIOR_H_

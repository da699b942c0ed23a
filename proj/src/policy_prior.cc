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

#include "latentnav/policy_prior.h"

#include "latentnav/errors.h"

namespace latentnav {

PolicySamples DrawPolicySamples(const Pose& pose, const Pose& goal,
                                const Instruction& instruction, int num_samples,
                                int horizon, double noise_scale,
                                const ExpertConfig& expert, Rng& rng) {
  if (num_samples < 1) throw ConfigError("policy samples: N_pi must be >= 1");
  PolicySamples samples;
  samples.instruction = instruction;
  samples.chunks.reserve(static_cast<size_t>(num_samples));
  for (int i = 0; i < num_samples; ++i) {
    samples.chunks.push_back(
        ExpertPolicy(pose, goal, instruction, horizon, noise_scale, expert, rng));
  }
  return samples;
}

ActionChunk TransformToPlanner(const ActionChunk& chunk, const ActionBounds& bounds) {
  return Normalize(GlobalToLocal(chunk), bounds);
}

PriorStats ComputePrior(const PolicySamples& samples, const ActionBounds& bounds,
                        double sigma_min, double sigma_max) {
  if (samples.chunks.empty()) throw ConfigError("compute_prior: no policy samples");
  if (!(sigma_min > 0.0 && sigma_min <= sigma_max)) {
    throw ConfigError("compute_prior: need 0 < sigma_min <= sigma_max");
  }
  try {
    bounds.Validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("compute_prior: bounds mismatch: ") + e.what());
  }
  const int horizon = samples.chunks.front().horizon();
  const double n = static_cast<double>(samples.chunks.size());
  ChunkMatrix sum = ChunkMatrix::Zero(horizon, kActionDim);
  ChunkMatrix sum_sq = ChunkMatrix::Zero(horizon, kActionDim);
  std::vector<ChunkMatrix> transformed;
  for (const ActionChunk& chunk : samples.chunks) {
    if (chunk.horizon() != horizon) {
      throw ConfigError("compute_prior: policy samples have different horizons");
    }
    transformed.push_back(TransformToPlanner(chunk, bounds).values());
    sum += transformed.back();
  }
  PriorStats prior;
  prior.mu = sum / n;
  for (const ChunkMatrix& t : transformed) {
    sum_sq.array() += (t - prior.mu).array().square();
  }
  prior.sigma = (sum_sq / n).array().sqrt().max(sigma_min).min(sigma_max).matrix();
  return prior;
}

PriorStats UninformedPrior(int horizon, double sigma_max) {
  if (horizon < 1) throw ConfigError("uninformed prior: horizon must be >= 1");
  return {ChunkMatrix::Zero(horizon, kActionDim),
          ChunkMatrix::Constant(horizon, kActionDim, sigma_max)};
}

}  // namespace latentnav

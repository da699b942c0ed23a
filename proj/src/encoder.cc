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

#include <cmath>
#include <random>

#include "latentnav/errors.h"
#include "latentnav/world_model.h"

namespace latentnav {

LatentState::LatentState(int tokens, int dim)
    : tokens_(tokens), dim_(dim), values_(Eigen::VectorXd::Zero(tokens * dim)) {}

LatentState::LatentState(int tokens, int dim, Eigen::VectorXd values)
    : tokens_(tokens), dim_(dim), values_(std::move(values)) {
  if (values_.size() != static_cast<Eigen::Index>(tokens) * dim) {
    throw ConfigError("latent state: expected " + std::to_string(tokens * dim) +
                      " values, got " + std::to_string(values_.size()));
  }
}

double LatentDistance(const LatentState& a, const LatentState& b) {
  if (a.tokens() != b.tokens() || a.dim() != b.dim()) {
    throw ConfigError("latent distance: shape mismatch");
  }
  return (a.values() - b.values()).squaredNorm() / a.tokens();
}

void LayerNormTokens(Eigen::Ref<Eigen::VectorXd> values, int tokens, int dim) {
  for (int i = 0; i < tokens; ++i) {
    auto row = values.segment(static_cast<Eigen::Index>(i) * dim, dim);
    const double mean = row.mean();
    row.array() -= mean;
    const double var = row.squaredNorm() / dim;
    row /= std::sqrt(var + kLayerNormEps);
  }
}

Encoder::Encoder(const Spec& spec) : spec_(spec) {
  if (spec.input_dim < 1 || spec.tokens < 1 || spec.dim < 2) {
    throw ConfigError("encoder: invalid dimensions");
  }
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.gain / std::sqrt(spec.input_dim));
  projection_.resize(latent_size(), spec.input_dim);
  for (Eigen::Index r = 0; r < projection_.rows(); ++r) {
    for (Eigen::Index c = 0; c < projection_.cols(); ++c) projection_(r, c) = normal(rng);
  }
}

LatentState Encoder::Encode(const Observation& obs) const {
  if (obs.features.size() != spec_.input_dim) {
    throw ConfigError("encoder: observation has " + std::to_string(obs.features.size()) +
                      " features, expected " + std::to_string(spec_.input_dim));
  }
  Eigen::VectorXd values = (projection_ * obs.features).array().tanh().matrix();
  LayerNormTokens(values, spec_.tokens, spec_.dim);
  return LatentState(spec_.tokens, spec_.dim, std::move(values));
}

}  // namespace latentnav

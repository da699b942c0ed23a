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

#ifndef LATENTNAV_TESTS_TEST_UTIL_H_
#define LATENTNAV_TESTS_TEST_UTIL_H_

#include <cmath>
#include <random>

#include "latentnav/action_space.h"
#include "latentnav/episode.h"
#include "latentnav/sim_env.h"
#include "latentnav/world_model.h"

namespace latentnav::testing {

// Physical chunk with displacements in [-1, 1] and heading changes in [-1, 1] rad.
inline ActionChunk RandomChunk(Rng& rng, int horizon, Frame frame) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Action> actions;
  for (int t = 0; t < horizon; ++t) {
    actions.push_back(Action::FromHeading(u(rng), u(rng), u(rng)));
  }
  return ActionChunk(actions, frame, false);
}

inline ChunkMatrix RandomNormalized(Rng& rng, int horizon, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ChunkMatrix m(horizon, kActionDim);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

inline LatentState RandomLatent(Rng& rng, int tokens, int dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd v(tokens * dim);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = n(rng);
  return LatentState(tokens, dim, v);
}

inline PredictorShape SmallShape() {
  PredictorShape s;
  s.tokens = 2;
  s.dim = 4;
  s.action_embed = 6;
  s.hidden = 10;
  s.layers = 2;
  s.window = 3;
  return s;
}

inline WorldSpec TestWorld() { return WorldSpec::Random(6, 10.0, 42); }

// Small randomly initialized model over TestWorld(); bounds from a short dataset.
inline WorldModel TinyModel(uint64_t seed = 1) {
  const WorldSpec world = TestWorld();
  DatasetConfig dc;
  dc.episodes = 6;
  const Dataset ds = GenerateDataset(world, dc);
  Encoder::Spec es;
  es.input_dim = 3 * static_cast<int>(world.landmarks.size());
  es.tokens = 2;
  es.dim = 4;
  PredictorShape shape = SmallShape();
  return {Encoder(es), PredictorParams::Initialize(shape, seed), ds.bounds};
}

}  // namespace latentnav::testing

#endif  // LATENTNAV_TESTS_TEST_UTIL_H_

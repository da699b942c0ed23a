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

#ifndef LATENTNAV_TESTS_LINEAR_ORACLE_H_
#define LATENTNAV_TESTS_LINEAR_ORACLE_H_

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "latentnav/mppi.h"
#include "latentnav/world_model.h"

namespace latentnav::testing {

// Latent system z' = z + A z + B a + c, fitted by a predictor with no hidden
// layers and a one-step context.
struct LinearSystem {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::VectorXd c;

  Eigen::VectorXd Step(const Eigen::VectorXd& z, const Eigen::Vector4d& act) const {
    return z + a * z + b * act + c;
  }
};

inline PredictorShape LinearShape() {
  PredictorShape s;
  s.tokens = 2;
  s.dim = 3;
  s.layers = 0;
  s.window = 1;
  return s;
}

inline LinearSystem MakeLinearSystem(uint64_t seed) {
  const int d = LinearShape().latent_size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  LinearSystem sys;
  sys.a = -0.2 * Eigen::MatrixXd::Identity(d, d);
  sys.b.resize(d, 4);
  sys.c.resize(d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) sys.a(i, j) += 0.05 * n(rng);
    for (int j = 0; j < 4; ++j) sys.b(i, j) = 0.3 * n(rng);
    sys.c[i] = 0.02 * n(rng);
  }
  return sys;
}

inline std::vector<Segment> LinearSegments(const LinearSystem& sys, int count, int k_roll,
                                           uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto d = sys.a.rows();
  std::vector<Segment> out(static_cast<size_t>(count));
  for (Segment& s : out) {
    Eigen::VectorXd z(d);
    for (Eigen::Index i = 0; i < d; ++i) z[i] = n(rng);
    s.latents.push_back(z);
    for (int k = 0; k < k_roll; ++k) {
      const Eigen::Vector4d act(u(rng), u(rng), u(rng), u(rng));
      s.actions.push_back(act);
      s.latents.push_back(sys.Step(s.latents.back(), act));
    }
  }
  return out;
}

// Least squares over every one-step transition, solved with the normal
// equations. Columns: [latent | action | 1].
inline Eigen::MatrixXd NormalEquationsFit(const std::vector<Segment>& segments) {
  const auto d = segments.front().latents.front().size();
  const Eigen::Index cols = d + 5;
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(cols, cols);
  Eigen::MatrixXd xty = Eigen::MatrixXd::Zero(cols, d);
  for (const Segment& s : segments) {
    for (size_t k = 0; k < s.actions.size(); ++k) {
      Eigen::VectorXd x(cols);
      x << s.latents[k], s.actions[k], 1.0;
      const Eigen::VectorXd y = s.latents[k + 1] - s.latents[k];
      xtx += x * x.transpose();
      xty += x * y.transpose();
    }
  }
  return xtx.ldlt().solve(xty).transpose();  // d x cols
}

// Same layout as NormalEquationsFit, read out of trained parameters.
inline Eigen::MatrixXd PredictorAsMatrix(const PredictorParams& p) {
  const PredictorLayout& layout = p.layout();
  const auto d = p.shape().latent_size();
  Eigen::MatrixXd m(d, d + 5);
  m.leftCols(d) = p.tensor(layout.skip_latent);
  m.middleCols(d, 4) = p.tensor(layout.skip_action);
  m.col(d + 4) = p.tensor(layout.skip_bias);
  return m;
}

inline RolloutConfig LinearTrainingConfig() {
  RolloutConfig cfg;
  cfg.context_window = 1;
  cfg.learning_rate = 0.02;
  cfg.batch_size = 32;
  cfg.epochs = 100;
  return cfg;
}

inline PlannerConfig LinearPlannerConfig() {
  PlannerConfig pc;
  pc.iterations = 60;
  pc.candidates = 256;
  pc.elites = 16;
  pc.greedy_elite = true;
  return pc;
}

}  // namespace latentnav::testing

#endif  // LATENTNAV_TESTS_LINEAR_ORACLE_H_

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

#ifndef LATENTNAV_WORLD_MODEL_H_
#define LATENTNAV_WORLD_MODEL_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "latentnav/action_space.h"
#include "latentnav/sim_env.h"

namespace latentnav {

// n tokens x d dims, stored token-major in a flat vector.
class LatentState {
 public:
  LatentState() = default;
  LatentState(int tokens, int dim);
  LatentState(int tokens, int dim, Eigen::VectorXd values);

  int tokens() const { return tokens_; }
  int dim() const { return dim_; }
  int size() const { return tokens_ * dim_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& mutable_values() { return values_; }
  auto token(int i) const { return values_.segment(static_cast<Eigen::Index>(i) * dim_, dim_); }

  bool operator==(const LatentState& other) const {
    return tokens_ == other.tokens_ && dim_ == other.dim_ && values_ == other.values_;
  }

 private:
  int tokens_ = 0;
  int dim_ = 0;
  Eigen::VectorXd values_;
};

// (1/n) sum_i ||a_i - b_i||^2 over tokens.
double LatentDistance(const LatentState& a, const LatentState& b);

inline constexpr double kLayerNormEps = 1e-5;

// Standardizes each token row in place.
void LayerNormTokens(Eigen::Ref<Eigen::VectorXd> values, int tokens, int dim);

// Frozen random-feature encoder: tokens = layer_norm(tanh(P * features)).
class Encoder {
 public:
  struct Spec {
    int input_dim = 0;
    int tokens = 4;
    int dim = 16;
    double gain = 0.25;  // projection entries ~ N(0, gain^2 / input_dim)
    uint64_t seed = 7;
  };

  explicit Encoder(const Spec& spec);

  const Spec& spec() const { return spec_; }
  const Eigen::MatrixXd& projection() const { return projection_; }
  int latent_size() const { return spec_.tokens * spec_.dim; }

  LatentState Encode(const Observation& obs) const;

 private:
  Spec spec_;
  Eigen::MatrixXd projection_;
};

// Architecture of the latent predictor. layers == 0 gives a purely linear
// predictor z' = z + S_z z + S_a a + s.
struct PredictorShape {
  int tokens = 4;
  int dim = 16;
  int action_embed = 32;
  int hidden = 128;
  int layers = 3;
  int window = 3;

  int latent_size() const { return tokens * dim; }
  void Validate() const;
  bool operator==(const PredictorShape&) const = default;
};

struct TensorInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  Eigen::Index offset = 0;
  Eigen::Index size() const { return static_cast<Eigen::Index>(rows) * cols; }
};

// Offsets of every tensor inside the flat parameter vector.
struct PredictorLayout {
  explicit PredictorLayout(const PredictorShape& shape);

  std::vector<TensorInfo> tensors;
  Eigen::Index total = 0;

  // Indices into `tensors`; -1 when absent (linear predictor).
  std::vector<int> action_in;  // per context slot, most recent first
  int action_bias = -1;
  std::vector<int> latent_in;  // per context slot, most recent first
  int embed_in = -1;
  int bias_in = -1;
  std::vector<int> hidden_w;   // layers 2..L
  std::vector<int> hidden_b;
  std::vector<int> film_w;     // layers 1..L, rows = 2 * hidden (scale; shift)
  std::vector<int> film_b;
  int head_w = -1;
  int head_b = -1;
  int skip_latent = -1;
  int skip_action = -1;
  int skip_bias = -1;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// All trainable weights of the action encoder and predictor, stored as one
// flat row-major vector.
class PredictorParams {
 public:
  PredictorParams() : PredictorParams(PredictorShape{}) {}
  explicit PredictorParams(const PredictorShape& shape);

  // Scaled Gaussian initialization; skip path starts at zero.
  static PredictorParams Initialize(const PredictorShape& shape, uint64_t seed);

  const PredictorShape& shape() const { return shape_; }
  const PredictorLayout& layout() const { return layout_; }
  const Eigen::VectorXd& flat() const { return flat_; }
  Eigen::VectorXd& mutable_flat() { return flat_; }

  Eigen::Map<const RowMatrix> tensor(int index) const;
  Eigen::Map<RowMatrix> mutable_tensor(int index);

  bool operator==(const PredictorParams& other) const {
    return shape_ == other.shape_ && flat_ == other.flat_;
  }

 private:
  PredictorShape shape_;
  PredictorLayout layout_;
  Eigen::VectorXd flat_;
};

// Activations kept from a forward step for backprop.
struct StepCache {
  std::vector<Eigen::MatrixXd> latents;  // context, most recent first
  std::vector<Eigen::MatrixXd> actions;
  Eigen::MatrixXd embed;                 // tanh(action encoding)
  std::vector<Eigen::MatrixXd> pre;      // u_l
  std::vector<Eigen::MatrixXd> scale;    // 1 + gamma_l
  std::vector<Eigen::MatrixXd> act;      // h_l
};

// Batched single prediction step; columns are batch entries. Context
// vectors are ordered most recent first and must have equal nonzero length
// <= window.
Eigen::MatrixXd PredictBatch(const PredictorParams& params,
                             std::span<const Eigen::MatrixXd> latents,
                             std::span<const Eigen::MatrixXd> actions,
                             StepCache* cache = nullptr);

// Accumulates parameter gradients into `grad` (flat layout of params) and
// returns d loss / d context latent per slot (most recent first).
std::vector<Eigen::MatrixXd> BackwardStep(const PredictorParams& params,
                                          const StepCache& cache,
                                          const Eigen::MatrixXd& grad_out,
                                          Eigen::VectorXd& grad);

// Autoregressive unroll of a batch from a shared start latent; returns all
// predicted latents (one D x B matrix per step). `actions[h]` is 4 x B.
std::vector<Eigen::MatrixXd> RolloutBatch(const PredictorParams& params,
                                          const Eigen::MatrixXd& start,
                                          std::span<const Eigen::MatrixXd> actions);

// Next latent from context (chronological order, <= window entries) and the
// matching normalized local-frame actions.
LatentState PredictStep(std::span<const LatentState> context_latents,
                        const ActionChunk& context_actions,
                        const PredictorParams& params);

// H-step autoregressive rollout feeding each prediction back as context.
std::vector<LatentState> Rollout(const LatentState& start, const ActionChunk& actions,
                                 const PredictorParams& params);

struct RolloutConfig {
  int horizon = 8;
  int context_window = 3;
  int k_roll = 4;
  int tbptt_window = 4;
  double learning_rate = 0.05;
  int batch_size = 64;
  int epochs = 60;
  uint64_t seed = 3;
  bool mean_over_k = false;
  double grad_clip = 1.0;
  double validation_fraction = 0.1;

  void Validate() const;
  bool operator==(const RolloutConfig&) const = default;
};

// Training segment: K_roll + 1 latents and K_roll normalized local actions.
struct Segment {
  std::vector<Eigen::VectorXd> latents;
  std::vector<Eigen::Vector4d> actions;
};

// Column-stacked segments: latents[k] is D x B, actions[k] is 4 x B.
struct SegmentBatch {
  std::vector<Eigen::MatrixXd> latents;
  std::vector<Eigen::MatrixXd> actions;
  int size() const { return latents.empty() ? 0 : static_cast<int>(latents[0].cols()); }
};

SegmentBatch StackSegments(std::span<const Segment> segments, int k_roll,
                           std::span<const int> indices = {});

// sum_k (1/B) sum_b ||F(z_b, a_b[0:k]) - z_b[k]||^2 (divided by K when
// cfg.mean_over_k).
double RolloutLoss(const PredictorParams& params, const SegmentBatch& batch,
                   const RolloutConfig& cfg);

// Loss and its gradient; predicted latents more than cfg.tbptt_window
// predictor applications before a loss term are treated as constants.
double RolloutLossAndGradient(const PredictorParams& params, const SegmentBatch& batch,
                              const RolloutConfig& cfg, Eigen::VectorXd& grad);

// Reference gradient that always runs one truncated backward pass per loss
// term; used to cross-check the fused path.
double RolloutLossAndGradientPerTerm(const PredictorParams& params,
                                     const SegmentBatch& batch,
                                     const RolloutConfig& cfg, Eigen::VectorXd& grad);

// All windows of k_roll + 1 consecutive observations from the dataset,
// encoded. Episodes are split train/validation by a seeded shuffle.
struct SegmentSplit {
  std::vector<Segment> train;
  std::vector<Segment> validation;
};
SegmentSplit BuildSegments(const Dataset& dataset, const Encoder& encoder,
                           const RolloutConfig& cfg);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

struct TrainResult {
  PredictorParams params;
  double initial_train_loss = 0.0;
  std::vector<EpochStats> curve;
};

// Minibatch SGD with global-norm gradient clipping. Throws NumericError
// when the loss becomes non-finite.
TrainResult Train(std::span<const Segment> train, std::span<const Segment> validation,
                  const PredictorShape& shape, const RolloutConfig& cfg,
                  const PredictorParams* init = nullptr);

struct GradientCheckOptions {
  int num_weights = 100;
  double step = 1e-5;
  double abs_floor = 1e-8;
  uint64_t seed = 11;
  // Applied to the analytic gradient before comparison (test fixtures).
  std::function<void(const PredictorParams&, Eigen::VectorXd&)> tamper;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  int checked = 0;
  Eigen::Index worst_index = -1;
};

GradientCheckResult GradientCheck(const PredictorParams& params, const SegmentBatch& batch,
                                  const RolloutConfig& cfg,
                                  const GradientCheckOptions& options = {});

// Mean ||P(z, a) - P(z, 0)|| over the given latents and actions.
double ActionSensitivity(const PredictorParams& params, std::span<const Eigen::VectorXd> latents,
                         std::span<const Eigen::Vector4d> actions);

}  // namespace latentnav

#endif  // LATENTNAV_WORLD_MODEL_H_

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

#include <algorithm>
#include <cmath>
#include <random>

#include "latentnav/errors.h"
#include "latentnav/world_model.h"

namespace latentnav {

void PredictorShape::Validate() const {
  if (tokens < 1 || dim < 1) throw ConfigError("predictor: tokens and dim must be >= 1");
  if (layers < 0) throw ConfigError("predictor: layers must be >= 0");
  if (window < 1) throw ConfigError("predictor: window must be >= 1");
  if (layers > 0 && (hidden < 1 || action_embed < 1)) {
    throw ConfigError("predictor: hidden and action_embed must be >= 1");
  }
}

PredictorLayout::PredictorLayout(const PredictorShape& shape) {
  shape.Validate();
  const int D = shape.latent_size();
  const int h = shape.hidden;
  const int da = shape.action_embed;
  auto add = [this](std::string name, int rows, int cols) {
    tensors.push_back({std::move(name), rows, cols, total});
    total += static_cast<Eigen::Index>(rows) * cols;
    return static_cast<int>(tensors.size()) - 1;
  };
  if (shape.layers > 0) {
    for (int j = 0; j < shape.window; ++j) {
      action_in.push_back(add("action_in." + std::to_string(j), da, kActionDim));
    }
    action_bias = add("action_bias", da, 1);
    for (int j = 0; j < shape.window; ++j) {
      latent_in.push_back(add("latent_in." + std::to_string(j), h, D));
    }
    embed_in = add("embed_in", h, da);
    bias_in = add("bias_in", h, 1);
    for (int l = 1; l < shape.layers; ++l) {
      hidden_w.push_back(add("hidden." + std::to_string(l) + ".w", h, h));
      hidden_b.push_back(add("hidden." + std::to_string(l) + ".b", h, 1));
    }
    for (int l = 0; l < shape.layers; ++l) {
      film_w.push_back(add("film." + std::to_string(l) + ".w", 2 * h, da));
      film_b.push_back(add("film." + std::to_string(l) + ".b", 2 * h, 1));
    }
    head_w = add("head.w", D, h);
    head_b = add("head.b", D, 1);
  }
  skip_latent = add("skip.latent", D, D);
  skip_action = add("skip.action", D, kActionDim);
  skip_bias = add("skip.bias", D, 1);
}

PredictorParams::PredictorParams(const PredictorShape& shape)
    : shape_(shape), layout_(shape), flat_(Eigen::VectorXd::Zero(layout_.total)) {}

PredictorParams PredictorParams::Initialize(const PredictorShape& shape, uint64_t seed) {
  PredictorParams params(shape);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const PredictorLayout& lay = params.layout();
  auto fill = [&](int index, double stddev) {
    auto t = params.mutable_tensor(index);
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = stddev * normal(rng);
    }
  };
  if (shape.layers > 0) {
    const double w = shape.window;
    for (int idx : lay.action_in) fill(idx, 1.0 / std::sqrt(kActionDim * w));
    for (int idx : lay.latent_in) fill(idx, 1.0 / std::sqrt(shape.latent_size() * w));
    fill(lay.embed_in, 1.0 / std::sqrt(shape.action_embed));
    for (int idx : lay.hidden_w) fill(idx, 1.0 / std::sqrt(shape.hidden));
    for (int idx : lay.film_w) fill(idx, 0.5 / std::sqrt(shape.action_embed));
    fill(lay.head_w, 0.1 / std::sqrt(shape.hidden));
  }
  return params;
}

Eigen::Map<const RowMatrix> PredictorParams::tensor(int index) const {
  const TensorInfo& t = layout_.tensors[static_cast<size_t>(index)];
  return {flat_.data() + t.offset, t.rows, t.cols};
}

Eigen::Map<RowMatrix> PredictorParams::mutable_tensor(int index) {
  const TensorInfo& t = layout_.tensors[static_cast<size_t>(index)];
  return {flat_.data() + t.offset, t.rows, t.cols};
}

namespace {

Eigen::Map<RowMatrix> GradTensor(const PredictorLayout& layout, Eigen::VectorXd& grad,
                                 int index) {
  const TensorInfo& t = layout.tensors[static_cast<size_t>(index)];
  return {grad.data() + t.offset, t.rows, t.cols};
}

Eigen::Map<Eigen::VectorXd> GradBias(const PredictorLayout& layout, Eigen::VectorXd& grad,
                                     int index) {
  const TensorInfo& t = layout.tensors[static_cast<size_t>(index)];
  return {grad.data() + t.offset, t.rows};
}

Eigen::Map<const Eigen::VectorXd> Bias(const PredictorParams& params, int index) {
  const TensorInfo& t = params.layout().tensors[static_cast<size_t>(index)];
  return {params.flat().data() + t.offset, t.rows};
}

}  // namespace

Eigen::MatrixXd PredictBatch(const PredictorParams& params,
                             std::span<const Eigen::MatrixXd> latents,
                             std::span<const Eigen::MatrixXd> actions, StepCache* cache) {
  const PredictorShape& shape = params.shape();
  const PredictorLayout& lay = params.layout();
  const size_t c = latents.size();
  if (c == 0 || c > static_cast<size_t>(shape.window) || actions.size() != c) {
    throw ConfigError("predict: context must hold 1..window latents with matching actions");
  }
  const Eigen::Index batch = latents[0].cols();
  for (size_t j = 0; j < c; ++j) {
    if (latents[j].rows() != shape.latent_size() || actions[j].rows() != kActionDim ||
        latents[j].cols() != batch || actions[j].cols() != batch) {
      throw ConfigError("predict: context shape mismatch");
    }
  }

  Eigen::MatrixXd out = latents[0];
  out.noalias() += params.tensor(lay.skip_latent) * latents[0];
  out.noalias() += params.tensor(lay.skip_action) * actions[0];
  out.colwise() += Bias(params, lay.skip_bias);

  if (cache != nullptr) {
    cache->latents.assign(latents.begin(), latents.end());
    cache->actions.assign(actions.begin(), actions.end());
    cache->pre.clear();
    cache->scale.clear();
    cache->act.clear();
  }
  if (shape.layers == 0) return out;

  const int h = shape.hidden;
  Eigen::MatrixXd embed = Eigen::MatrixXd::Zero(shape.action_embed, batch);
  for (size_t j = 0; j < c; ++j) {
    embed.noalias() += params.tensor(lay.action_in[j]) * actions[j];
  }
  embed.colwise() += Bias(params, lay.action_bias);
  embed = embed.array().tanh().matrix();

  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(h, batch);
  for (size_t j = 0; j < c; ++j) u.noalias() += params.tensor(lay.latent_in[j]) * latents[j];
  u.noalias() += params.tensor(lay.embed_in) * embed;
  u.colwise() += Bias(params, lay.bias_in);

  Eigen::MatrixXd act;
  for (int l = 0; l < shape.layers; ++l) {
    if (l > 0) {
      u.noalias() = params.tensor(lay.hidden_w[static_cast<size_t>(l - 1)]) * act;
      u.colwise() += Bias(params, lay.hidden_b[static_cast<size_t>(l - 1)]);
    }
    Eigen::MatrixXd mod = params.tensor(lay.film_w[static_cast<size_t>(l)]) * embed;
    mod.colwise() += Bias(params, lay.film_b[static_cast<size_t>(l)]);
    Eigen::MatrixXd scale = mod.topRows(h).array() + 1.0;
    act = (u.array() * scale.array() + mod.bottomRows(h).array()).tanh().matrix();
    if (cache != nullptr) {
      cache->pre.push_back(u);
      cache->scale.push_back(std::move(scale));
      cache->act.push_back(act);
    }
  }
  out.noalias() += params.tensor(lay.head_w) * act;
  out.colwise() += Bias(params, lay.head_b);
  if (cache != nullptr) cache->embed = std::move(embed);
  return out;
}

std::vector<Eigen::MatrixXd> BackwardStep(const PredictorParams& params,
                                          const StepCache& cache,
                                          const Eigen::MatrixXd& grad_out,
                                          Eigen::VectorXd& grad) {
  const PredictorShape& shape = params.shape();
  const PredictorLayout& lay = params.layout();
  const size_t c = cache.latents.size();
  std::vector<Eigen::MatrixXd> grad_latents(c);

  GradTensor(lay, grad, lay.skip_latent).noalias() += grad_out * cache.latents[0].transpose();
  GradTensor(lay, grad, lay.skip_action).noalias() += grad_out * cache.actions[0].transpose();
  GradBias(lay, grad, lay.skip_bias) += grad_out.rowwise().sum();
  grad_latents[0] = grad_out;
  grad_latents[0].noalias() += params.tensor(lay.skip_latent).transpose() * grad_out;
  for (size_t j = 1; j < c; ++j) {
    grad_latents[j] = Eigen::MatrixXd::Zero(grad_out.rows(), grad_out.cols());
  }
  if (shape.layers == 0) return grad_latents;

  const int h = shape.hidden;
  const Eigen::MatrixXd& embed = cache.embed;
  GradTensor(lay, grad, lay.head_w).noalias() += grad_out * cache.act.back().transpose();
  GradBias(lay, grad, lay.head_b) += grad_out.rowwise().sum();
  Eigen::MatrixXd grad_act = params.tensor(lay.head_w).transpose() * grad_out;
  Eigen::MatrixXd grad_embed = Eigen::MatrixXd::Zero(embed.rows(), embed.cols());
  Eigen::MatrixXd grad_mod(2 * h, grad_out.cols());

  for (int l = shape.layers - 1; l >= 0; --l) {
    const auto ul = static_cast<size_t>(l);
    const Eigen::ArrayXXd grad_v =
        grad_act.array() * (1.0 - cache.act[ul].array().square());
    const Eigen::MatrixXd grad_u = (grad_v * cache.scale[ul].array()).matrix();
    grad_mod.topRows(h) = (grad_v * cache.pre[ul].array()).matrix();
    grad_mod.bottomRows(h) = grad_v.matrix();
    GradTensor(lay, grad, lay.film_w[ul]).noalias() += grad_mod * embed.transpose();
    GradBias(lay, grad, lay.film_b[ul]) += grad_mod.rowwise().sum();
    grad_embed.noalias() += params.tensor(lay.film_w[ul]).transpose() * grad_mod;
    if (l > 0) {
      GradTensor(lay, grad, lay.hidden_w[ul - 1]).noalias() +=
          grad_u * cache.act[ul - 1].transpose();
      GradBias(lay, grad, lay.hidden_b[ul - 1]) += grad_u.rowwise().sum();
      grad_act.noalias() = params.tensor(lay.hidden_w[ul - 1]).transpose() * grad_u;
    } else {
      for (size_t j = 0; j < c; ++j) {
        GradTensor(lay, grad, lay.latent_in[j]).noalias() +=
            grad_u * cache.latents[j].transpose();
        grad_latents[j].noalias() += params.tensor(lay.latent_in[j]).transpose() * grad_u;
      }
      GradTensor(lay, grad, lay.embed_in).noalias() += grad_u * embed.transpose();
      grad_embed.noalias() += params.tensor(lay.embed_in).transpose() * grad_u;
      GradBias(lay, grad, lay.bias_in) += grad_u.rowwise().sum();
    }
  }

  const Eigen::MatrixXd grad_pre_embed =
      (grad_embed.array() * (1.0 - embed.array().square())).matrix();
  for (size_t j = 0; j < c; ++j) {
    GradTensor(lay, grad, lay.action_in[j]).noalias() +=
        grad_pre_embed * cache.actions[j].transpose();
  }
  GradBias(lay, grad, lay.action_bias) += grad_pre_embed.rowwise().sum();
  return grad_latents;
}

std::vector<Eigen::MatrixXd> RolloutBatch(const PredictorParams& params,
                                          const Eigen::MatrixXd& start,
                                          std::span<const Eigen::MatrixXd> actions) {
  const int window = params.shape().window;
  std::vector<Eigen::MatrixXd> history;
  if (!actions.empty() && start.cols() == 1 && actions[0].cols() > 1) {
    history.push_back(start.replicate(1, actions[0].cols()));
  } else {
    history.push_back(start);
  }
  std::vector<Eigen::MatrixXd> predictions;
  predictions.reserve(actions.size());
  std::vector<Eigen::MatrixXd> ctx_latents;
  std::vector<Eigen::MatrixXd> ctx_actions;
  for (size_t k = 0; k < actions.size(); ++k) {
    const size_t c = std::min(history.size(), static_cast<size_t>(window));
    ctx_latents.clear();
    ctx_actions.clear();
    for (size_t j = 0; j < c; ++j) {
      ctx_latents.push_back(history[history.size() - 1 - j]);
      ctx_actions.push_back(actions[k - j]);
    }
    Eigen::MatrixXd next = PredictBatch(params, ctx_latents, ctx_actions);
    history.push_back(next);
    predictions.push_back(std::move(next));
  }
  return predictions;
}

namespace {

void CheckPlannerActions(const ActionChunk& chunk, const char* who) {
  if (!chunk.normalized() || chunk.frame() != Frame::kLocalBody) {
    throw ConfigError(std::string(who) +
                      ": actions must be normalized and in the local body frame");
  }
}

}  // namespace

LatentState PredictStep(std::span<const LatentState> context_latents,
                        const ActionChunk& context_actions, const PredictorParams& params) {
  CheckPlannerActions(context_actions, "predict_step");
  const PredictorShape& shape = params.shape();
  const size_t c = context_latents.size();
  if (c == 0 || c > static_cast<size_t>(shape.window) ||
      static_cast<size_t>(context_actions.horizon()) != c) {
    throw ConfigError("predict_step: need 1..window latents and one action per latent");
  }
  std::vector<Eigen::MatrixXd> latents;
  std::vector<Eigen::MatrixXd> actions;
  for (size_t j = 0; j < c; ++j) {
    const LatentState& z = context_latents[c - 1 - j];
    if (z.tokens() != shape.tokens || z.dim() != shape.dim) {
      throw ConfigError("predict_step: latent shape does not match the predictor");
    }
    latents.emplace_back(z.values());
    actions.emplace_back(
        context_actions.values().row(static_cast<Eigen::Index>(c - 1 - j)).transpose());
  }
  Eigen::MatrixXd next = PredictBatch(params, latents, actions);
  return LatentState(shape.tokens, shape.dim, next.col(0));
}

std::vector<LatentState> Rollout(const LatentState& start, const ActionChunk& actions,
                                 const PredictorParams& params) {
  CheckPlannerActions(actions, "rollout");
  const PredictorShape& shape = params.shape();
  if (start.tokens() != shape.tokens || start.dim() != shape.dim) {
    throw ConfigError("rollout: latent shape does not match the predictor");
  }
  std::vector<Eigen::MatrixXd> steps;
  for (int t = 0; t < actions.horizon(); ++t) {
    steps.emplace_back(actions.values().row(t).transpose());
  }
  std::vector<LatentState> out;
  for (auto& z : RolloutBatch(params, start.values(), steps)) {
    out.emplace_back(shape.tokens, shape.dim, z.col(0));
  }
  return out;
}

}  // namespace latentnav

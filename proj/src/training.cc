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
#include <numeric>
#include <random>
#include <sstream>

#include "latentnav/errors.h"
#include "latentnav/world_model.h"

namespace latentnav {

void RolloutConfig::Validate() const {
  if (horizon < 1) throw ConfigError("rollout config: horizon must be >= 1");
  if (k_roll < 1 || k_roll > horizon) {
    throw ConfigError("rollout config: k_roll must be in [1, horizon]");
  }
  if (tbptt_window < 1) throw ConfigError("rollout config: tbptt_window must be >= 1");
  if (context_window < 1) throw ConfigError("rollout config: context_window must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("rollout config: learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("rollout config: batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("rollout config: epochs must be >= 0");
  if (!(grad_clip > 0.0)) throw ConfigError("rollout config: grad_clip must be > 0");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("rollout config: validation_fraction must be in [0, 1)");
  }
}

SegmentBatch StackSegments(std::span<const Segment> segments, int k_roll,
                           std::span<const int> indices) {
  std::vector<int> all;
  if (indices.empty()) {
    all.resize(segments.size());
    std::iota(all.begin(), all.end(), 0);
    indices = all;
  }
  if (indices.empty()) throw ConfigError("rollout loss: empty batch");
  const Segment& first = segments[static_cast<size_t>(indices[0])];
  if (first.latents.empty()) throw ConfigError("rollout loss: empty segment");
  const Eigen::Index dim = first.latents[0].size();
  const auto batch = static_cast<Eigen::Index>(indices.size());
  SegmentBatch out;
  out.latents.assign(static_cast<size_t>(k_roll) + 1, Eigen::MatrixXd(dim, batch));
  out.actions.assign(static_cast<size_t>(k_roll), Eigen::MatrixXd(kActionDim, batch));
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Segment& seg = segments[static_cast<size_t>(indices[static_cast<size_t>(b)])];
    if (seg.latents.size() < static_cast<size_t>(k_roll) + 1 ||
        seg.actions.size() < static_cast<size_t>(k_roll)) {
      throw ConfigError("rollout loss: segment too short for k_roll = " +
                        std::to_string(k_roll));
    }
    for (int k = 0; k <= k_roll; ++k) {
      const Eigen::VectorXd& z = seg.latents[static_cast<size_t>(k)];
      if (z.size() != dim) throw ConfigError("rollout loss: inconsistent latent sizes");
      out.latents[static_cast<size_t>(k)].col(b) = z;
    }
    for (int k = 0; k < k_roll; ++k) {
      out.actions[static_cast<size_t>(k)].col(b) = seg.actions[static_cast<size_t>(k)];
    }
  }
  return out;
}

namespace {

struct Unroll {
  std::vector<Eigen::MatrixXd> history;  // history[0] = true start latent
  std::vector<StepCache> caches;         // caches[k - 1] produced history[k]
  std::vector<Eigen::MatrixXd> residual; // residual[k - 1] = history[k] - target
  double loss = 0.0;
};

int KRoll(const SegmentBatch& batch, const RolloutConfig& cfg) {
  cfg.Validate();
  if (static_cast<int>(batch.latents.size()) < cfg.k_roll + 1 ||
      static_cast<int>(batch.actions.size()) < cfg.k_roll) {
    throw ConfigError("rollout loss: segment too short for k_roll = " +
                      std::to_string(cfg.k_roll));
  }
  return cfg.k_roll;
}

Unroll Forward(const PredictorParams& params, const SegmentBatch& batch,
               const RolloutConfig& cfg, bool keep_cache) {
  const int k_roll = KRoll(batch, cfg);
  const size_t window = static_cast<size_t>(params.shape().window);
  const double inv_b = 1.0 / batch.size();
  Unroll u;
  u.history.push_back(batch.latents[0]);
  if (keep_cache) u.caches.resize(static_cast<size_t>(k_roll));
  std::vector<Eigen::MatrixXd> ctx_latents;
  std::vector<Eigen::MatrixXd> ctx_actions;
  for (int k = 1; k <= k_roll; ++k) {
    const size_t c = std::min(u.history.size(), window);
    ctx_latents.clear();
    ctx_actions.clear();
    for (size_t j = 0; j < c; ++j) {
      ctx_latents.push_back(u.history[u.history.size() - 1 - j]);
      ctx_actions.push_back(batch.actions[static_cast<size_t>(k) - 1 - j]);
    }
    Eigen::MatrixXd pred = PredictBatch(
        params, ctx_latents, ctx_actions,
        keep_cache ? &u.caches[static_cast<size_t>(k) - 1] : nullptr);
    Eigen::MatrixXd res = pred - batch.latents[static_cast<size_t>(k)];
    u.loss += res.squaredNorm() * inv_b;
    u.history.push_back(std::move(pred));
    if (keep_cache) u.residual.push_back(std::move(res));
  }
  if (cfg.mean_over_k) u.loss /= k_roll;
  return u;
}

// Runs backward for steps last..first (inclusive, 1-based) given the
// gradient buffer over history entries; gradients reaching history entries
// below `first` are discarded.
void BackwardRange(const PredictorParams& params, const Unroll& u, int first, int last,
                   std::vector<Eigen::MatrixXd>& grad_hist, Eigen::VectorXd& grad) {
  for (int s = last; s >= first; --s) {
    const auto us = static_cast<size_t>(s);
    if (grad_hist[us].size() == 0) continue;
    std::vector<Eigen::MatrixXd> g_ctx =
        BackwardStep(params, u.caches[us - 1], grad_hist[us], grad);
    for (size_t j = 0; j < g_ctx.size(); ++j) {
      const int target = s - 1 - static_cast<int>(j);
      if (target < first) continue;
      auto& slot = grad_hist[static_cast<size_t>(target)];
      if (slot.size() == 0) {
        slot = std::move(g_ctx[j]);
      } else {
        slot += g_ctx[j];
      }
    }
  }
}

double TermScale(const SegmentBatch& batch, const RolloutConfig& cfg) {
  double scale = 2.0 / batch.size();
  if (cfg.mean_over_k) scale /= cfg.k_roll;
  return scale;
}

}  // namespace

double RolloutLoss(const PredictorParams& params, const SegmentBatch& batch,
                   const RolloutConfig& cfg) {
  return Forward(params, batch, cfg, false).loss;
}

double RolloutLossAndGradientPerTerm(const PredictorParams& params,
                                     const SegmentBatch& batch,
                                     const RolloutConfig& cfg, Eigen::VectorXd& grad) {
  Unroll u = Forward(params, batch, cfg, true);
  grad = Eigen::VectorXd::Zero(params.flat().size());
  const double scale = TermScale(batch, cfg);
  for (int k = 1; k <= cfg.k_roll; ++k) {
    std::vector<Eigen::MatrixXd> grad_hist(static_cast<size_t>(k) + 1);
    grad_hist[static_cast<size_t>(k)] = scale * u.residual[static_cast<size_t>(k) - 1];
    BackwardRange(params, u, std::max(1, k - cfg.tbptt_window + 1), k, grad_hist, grad);
  }
  return u.loss;
}

double RolloutLossAndGradient(const PredictorParams& params, const SegmentBatch& batch,
                              const RolloutConfig& cfg, Eigen::VectorXd& grad) {
  if (cfg.tbptt_window < cfg.k_roll) {
    return RolloutLossAndGradientPerTerm(params, batch, cfg, grad);
  }
  // No truncation can occur: one fused backward pass over all terms.
  Unroll u = Forward(params, batch, cfg, true);
  grad = Eigen::VectorXd::Zero(params.flat().size());
  const double scale = TermScale(batch, cfg);
  std::vector<Eigen::MatrixXd> grad_hist(static_cast<size_t>(cfg.k_roll) + 1);
  for (int k = 1; k <= cfg.k_roll; ++k) {
    grad_hist[static_cast<size_t>(k)] = scale * u.residual[static_cast<size_t>(k) - 1];
  }
  BackwardRange(params, u, 1, cfg.k_roll, grad_hist, grad);
  return u.loss;
}

SegmentSplit BuildSegments(const Dataset& dataset, const Encoder& encoder,
                           const RolloutConfig& cfg) {
  cfg.Validate();
  const size_t n = dataset.episodes.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(cfg.seed);
  std::shuffle(order.begin(), order.end(), rng);
  size_t n_val = static_cast<size_t>(std::llround(cfg.validation_fraction * static_cast<double>(n)));
  if (cfg.validation_fraction > 0.0 && n >= 2) n_val = std::max<size_t>(n_val, 1);
  n_val = std::min(n_val, n > 0 ? n - 1 : 0);

  SegmentSplit split;
  for (size_t rank = 0; rank < n; ++rank) {
    const DatasetEpisode& ep = dataset.episodes[order[rank]];
    std::vector<Eigen::VectorXd> latents;
    latents.reserve(ep.observations.size());
    for (const auto& obs : ep.observations) latents.push_back(encoder.Encode(obs).values());
    auto& dst = rank < n_val ? split.validation : split.train;
    for (size_t t = 0; t + static_cast<size_t>(cfg.k_roll) < latents.size(); ++t) {
      Segment seg;
      seg.latents.assign(latents.begin() + static_cast<std::ptrdiff_t>(t),
                         latents.begin() + static_cast<std::ptrdiff_t>(t) + cfg.k_roll + 1);
      seg.actions.assign(ep.normalized_actions.begin() + static_cast<std::ptrdiff_t>(t),
                         ep.normalized_actions.begin() + static_cast<std::ptrdiff_t>(t) + cfg.k_roll);
      dst.push_back(std::move(seg));
    }
  }
  return split;
}

namespace {

double DatasetLoss(const PredictorParams& params, std::span<const Segment> segments,
                   const RolloutConfig& cfg) {
  if (segments.empty()) return 0.0;
  constexpr size_t kChunk = 512;
  double total = 0.0;
  for (size_t begin = 0; begin < segments.size(); begin += kChunk) {
    const size_t end = std::min(segments.size(), begin + kChunk);
    const SegmentBatch batch = StackSegments(segments.subspan(begin, end - begin), cfg.k_roll);
    total += RolloutLoss(params, batch, cfg) * static_cast<double>(end - begin);
  }
  return total / static_cast<double>(segments.size());
}

void CheckFinite(double loss, int epoch, const RolloutConfig& cfg) {
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "training diverged: non-finite loss at epoch " << epoch
        << " with learning_rate " << cfg.learning_rate
        << "; lower the learning rate or the gradient clip";
    throw NumericError(msg.str());
  }
}

}  // namespace

TrainResult Train(std::span<const Segment> train, std::span<const Segment> validation,
                  const PredictorShape& shape, const RolloutConfig& cfg,
                  const PredictorParams* init) {
  cfg.Validate();
  if (train.empty()) throw ConfigError("train: dataset is empty");
  if (cfg.context_window != shape.window) {
    throw ConfigError("train: context_window does not match the predictor window");
  }
  TrainResult result{init != nullptr ? *init : PredictorParams::Initialize(shape, cfg.seed), 0.0,
                     {}};
  if (!(result.params.shape() == shape)) {
    throw ConfigError("train: initial parameters have a different shape");
  }
  result.initial_train_loss = DatasetLoss(result.params, train, cfg);
  CheckFinite(result.initial_train_loss, 0, cfg);

  Rng rng(cfg.seed + 0x9e3779b97f4a7c15ULL);
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd grad;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double running = 0.0;
    for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(cfg.batch_size)) {
      const size_t end = std::min(order.size(), begin + static_cast<size_t>(cfg.batch_size));
      const std::span<const int> idx(order.data() + begin, end - begin);
      const SegmentBatch batch = StackSegments(train, cfg.k_roll, idx);
      const double loss = RolloutLossAndGradient(result.params, batch, cfg, grad);
      CheckFinite(loss, epoch, cfg);
      const double norm = grad.norm();
      if (!std::isfinite(norm)) CheckFinite(norm, epoch, cfg);
      if (norm > cfg.grad_clip) grad *= cfg.grad_clip / norm;
      result.params.mutable_flat() -= cfg.learning_rate * grad;
      running += loss * static_cast<double>(end - begin);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = running / static_cast<double>(order.size());
    stats.validation_loss = DatasetLoss(result.params, validation, cfg);
    CheckFinite(stats.validation_loss, epoch, cfg);
    result.curve.push_back(stats);
  }
  return result;
}

GradientCheckResult GradientCheck(const PredictorParams& params, const SegmentBatch& batch,
                                  const RolloutConfig& cfg,
                                  const GradientCheckOptions& options) {
  // Finite differences see the whole loss, so truncation is switched off.
  RolloutConfig full = cfg;
  full.tbptt_window = std::max(cfg.tbptt_window, cfg.k_roll);
  Eigen::VectorXd analytic;
  RolloutLossAndGradient(params, batch, full, analytic);
  if (options.tamper) options.tamper(params, analytic);

  const auto total = static_cast<int>(params.flat().size());
  std::vector<int> indices(static_cast<size_t>(total));
  std::iota(indices.begin(), indices.end(), 0);
  Rng rng(options.seed);
  std::shuffle(indices.begin(), indices.end(), rng);
  indices.resize(static_cast<size_t>(std::min(total, options.num_weights)));

  GradientCheckResult result;
  PredictorParams probe = params;
  for (int idx : indices) {
    const double original = probe.flat()[idx];
    probe.mutable_flat()[idx] = original + options.step;
    const double plus = RolloutLoss(probe, batch, full);
    probe.mutable_flat()[idx] = original - options.step;
    const double minus = RolloutLoss(probe, batch, full);
    probe.mutable_flat()[idx] = original;
    const double numeric = (plus - minus) / (2.0 * options.step);
    const double a = analytic[idx];
    const double denom = std::max({std::abs(a), std::abs(numeric), options.abs_floor});
    const double rel = std::abs(a - numeric) / denom;
    if (rel > result.max_relative_error || result.worst_index < 0) {
      result.max_relative_error = rel;
      result.worst_index = idx;
    }
    ++result.checked;
  }
  return result;
}

double ActionSensitivity(const PredictorParams& params, std::span<const Eigen::VectorXd> latents,
                         std::span<const Eigen::Vector4d> actions) {
  if (latents.size() != actions.size() || latents.empty()) {
    throw ConfigError("action sensitivity: need matching nonempty latents and actions");
  }
  const auto n = static_cast<Eigen::Index>(latents.size());
  std::vector<Eigen::MatrixXd> z(1, Eigen::MatrixXd(latents[0].size(), n));
  std::vector<Eigen::MatrixXd> a(1, Eigen::MatrixXd(kActionDim, n));
  for (Eigen::Index i = 0; i < n; ++i) {
    z[0].col(i) = latents[static_cast<size_t>(i)];
    a[0].col(i) = actions[static_cast<size_t>(i)];
  }
  const Eigen::MatrixXd moved = PredictBatch(params, z, a);
  std::vector<Eigen::MatrixXd> zero(1, Eigen::MatrixXd::Zero(kActionDim, n));
  const Eigen::MatrixXd still = PredictBatch(params, z, zero);
  return (moved - still).colwise().norm().mean();
}

}  // namespace latentnav

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

#include "latentnav/action_space.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "latentnav/errors.h"

namespace latentnav {

double Action::HeadingChange() const { return std::atan2(sin_dphi, cos_dphi); }

Action Action::FromHeading(double dx, double dy, double dphi) {
  return {dx, dy, std::sin(dphi), std::cos(dphi)};
}

const char* FrameName(Frame frame) {
  return frame == Frame::kGlobal ? "global" : "local";
}

ActionChunk::ActionChunk(ChunkMatrix values, Frame frame, bool normalized)
    : values_(std::move(values)), frame_(frame), normalized_(normalized) {}

ActionChunk::ActionChunk(std::span<const Action> actions, Frame frame,
                         bool normalized)
    : values_(static_cast<Eigen::Index>(actions.size()), kActionDim),
      frame_(frame),
      normalized_(normalized) {
  for (size_t t = 0; t < actions.size(); ++t) {
    values_.row(static_cast<Eigen::Index>(t)) = actions[t].AsVector().transpose();
  }
}

void ActionBounds::Validate() const {
  for (int i = 0; i < kActionDim; ++i) {
    if (!(lower[i] < upper[i]) || !std::isfinite(lower[i]) ||
        !std::isfinite(upper[i])) {
      throw ConfigError("action bounds: lower >= upper in dimension " +
                        std::to_string(i));
    }
  }
}

double Percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ConfigError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

ActionBounds ComputeBounds(std::span<const Action> actions, double lower_q,
                           double upper_q) {
  if (actions.size() < 2) {
    throw ConfigError("compute_bounds needs at least two actions");
  }
  static constexpr const char* kNames[] = {"dx", "dy", "sin_dphi", "cos_dphi"};
  ActionBounds bounds;
  std::vector<double> column(actions.size());
  for (int dim = 0; dim < kActionDim; ++dim) {
    for (size_t i = 0; i < actions.size(); ++i) {
      column[i] = actions[i].AsVector()[dim];
    }
    bounds.lower[dim] = Percentile(column, lower_q);
    bounds.upper[dim] = Percentile(column, upper_q);
    if (!(bounds.lower[dim] < bounds.upper[dim])) {
      throw ConfigError("compute_bounds: degenerate dimension " +
                        std::to_string(dim) + " (" + kNames[dim] + ")");
    }
  }
  return bounds;
}

ActionBounds ComputeBounds(std::span<const ActionChunk> chunks, double lower_q,
                           double upper_q) {
  std::vector<Action> flat;
  for (const auto& chunk : chunks) {
    if (chunk.normalized()) {
      throw ConfigError("compute_bounds expects physical chunks");
    }
    for (int t = 0; t < chunk.horizon(); ++t) flat.push_back(chunk.at(t));
  }
  return ComputeBounds(flat, lower_q, upper_q);
}

Eigen::Vector4d NormalizeValue(const Eigen::Vector4d& v,
                               const ActionBounds& bounds) {
  const Eigen::Vector4d span = bounds.upper - bounds.lower;
  Eigen::Vector4d out =
      (2.0 * (v - bounds.lower).array() / span.array() - 1.0).matrix();
  return out.cwiseMax(-1.0).cwiseMin(1.0);
}

Eigen::Vector4d DenormalizeValue(const Eigen::Vector4d& v,
                                 const ActionBounds& bounds) {
  const Eigen::Vector4d span = bounds.upper - bounds.lower;
  return ((v.array() + 1.0) * 0.5 * span.array() + bounds.lower.array()).matrix();
}

ActionChunk Normalize(const ActionChunk& chunk, const ActionBounds& bounds) {
  if (chunk.normalized()) throw ConfigError("normalize: chunk already normalized");
  ChunkMatrix out(chunk.horizon(), kActionDim);
  for (int t = 0; t < chunk.horizon(); ++t) {
    out.row(t) = NormalizeValue(chunk.values().row(t).transpose(), bounds).transpose();
  }
  return ActionChunk(std::move(out), chunk.frame(), true);
}

ActionChunk Denormalize(const ActionChunk& chunk, const ActionBounds& bounds) {
  if (!chunk.normalized()) throw ConfigError("denormalize: chunk is not normalized");
  ChunkMatrix out(chunk.horizon(), kActionDim);
  for (int t = 0; t < chunk.horizon(); ++t) {
    out.row(t) = DenormalizeValue(chunk.values().row(t).transpose(), bounds).transpose();
  }
  return ActionChunk(std::move(out), chunk.frame(), false);
}

std::vector<double> AccumulateHeadings(const ActionChunk& chunk) {
  std::vector<double> headings(static_cast<size_t>(chunk.horizon()));
  double phi = 0.0;
  for (int t = 0; t < chunk.horizon(); ++t) {
    headings[static_cast<size_t>(t)] = phi;
    phi += chunk.at(t).HeadingChange();
  }
  return headings;
}

namespace {

// direction = +1 applies R(phi), -1 applies R(phi)^T.
ActionChunk RotateDisplacements(const ActionChunk& chunk, double direction,
                                Frame out_frame) {
  const std::vector<double> headings = AccumulateHeadings(chunk);
  ChunkMatrix out = chunk.values();
  for (int t = 0; t < chunk.horizon(); ++t) {
    const double c = std::cos(headings[static_cast<size_t>(t)]);
    const double s = direction * std::sin(headings[static_cast<size_t>(t)]);
    const double dx = chunk.values()(t, 0);
    const double dy = chunk.values()(t, 1);
    out(t, 0) = c * dx + s * dy;
    out(t, 1) = -s * dx + c * dy;
  }
  return ActionChunk(std::move(out), out_frame, false);
}

}  // namespace

ActionChunk GlobalToLocal(const ActionChunk& chunk) {
  if (chunk.frame() != Frame::kGlobal) {
    throw ConfigError("global_to_local: chunk is not in the global frame");
  }
  if (chunk.normalized()) {
    throw ConfigError("global_to_local: expects physical units");
  }
  return RotateDisplacements(chunk, 1.0, Frame::kLocalBody);
}

ActionChunk LocalToGlobal(const ActionChunk& chunk) {
  if (chunk.frame() != Frame::kLocalBody) {
    throw ConfigError("local_to_global: chunk is not in the local body frame");
  }
  if (chunk.normalized()) {
    throw ConfigError("local_to_global: expects physical units");
  }
  return RotateDisplacements(chunk, -1.0, Frame::kGlobal);
}

}  // namespace latentnav

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

#ifndef LATENTNAV_ACTION_SPACE_H_
#define LATENTNAV_ACTION_SPACE_H_

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace latentnav {

inline constexpr int kActionDim = 4;

// One navigation step: planar displacement plus heading change encoded as
// (sin, cos) so that the representation has no wrap-around at +-pi.
struct Action {
  double dx = 0.0;
  double dy = 0.0;
  double sin_dphi = 0.0;
  double cos_dphi = 1.0;

  // Heading change recovered with atan2; tolerates non-unit (sin, cos) pairs.
  double HeadingChange() const;
  Eigen::Vector4d AsVector() const { return {dx, dy, sin_dphi, cos_dphi}; }
  static Action FromVector(const Eigen::Vector4d& v) {
    return {v[0], v[1], v[2], v[3]};
  }
  static Action FromHeading(double dx, double dy, double dphi);
};

enum class Frame { kGlobal, kLocalBody };

const char* FrameName(Frame frame);

using ChunkMatrix = Eigen::Matrix<double, Eigen::Dynamic, kActionDim, Eigen::RowMajor>;

// Horizon-length sequence of actions. "Global" displacements are expressed
// in the body frame at the start of the chunk; "local" displacements are
// expressed in the body frame at the step they are applied.
class ActionChunk {
 public:
  ActionChunk() = default;
  ActionChunk(ChunkMatrix values, Frame frame, bool normalized);
  ActionChunk(std::span<const Action> actions, Frame frame, bool normalized);

  int horizon() const { return static_cast<int>(values_.rows()); }
  Frame frame() const { return frame_; }
  bool normalized() const { return normalized_; }

  Action at(int t) const { return Action::FromVector(values_.row(t).transpose()); }
  void set(int t, const Action& a) { values_.row(t) = a.AsVector().transpose(); }

  const ChunkMatrix& values() const { return values_; }
  ChunkMatrix& mutable_values() { return values_; }

  bool operator==(const ActionChunk& other) const {
    return frame_ == other.frame_ && normalized_ == other.normalized_ &&
           values_ == other.values_;
  }

 private:
  ChunkMatrix values_;
  Frame frame_ = Frame::kGlobal;
  bool normalized_ = false;
};

// Per-dimension 1st/99th percentile bounds used to map actions to [-1, 1].
struct ActionBounds {
  Eigen::Vector4d lower = Eigen::Vector4d::Constant(-1.0);
  Eigen::Vector4d upper = Eigen::Vector4d::Constant(1.0);

  // Throws ConfigError unless lower[i] < upper[i] for all i.
  void Validate() const;
  bool operator==(const ActionBounds& other) const {
    return lower == other.lower && upper == other.upper;
  }
};

// Linear-interpolation percentile (numpy's default): q in [0, 1].
double Percentile(std::vector<double> values, double q);

// Empirical 1st/99th percentile bounds over all actions. Throws ConfigError
// naming the dimension when a dimension has zero spread.
ActionBounds ComputeBounds(std::span<const Action> actions,
                           double lower_q = 0.01, double upper_q = 0.99);
ActionBounds ComputeBounds(std::span<const ActionChunk> chunks,
                           double lower_q = 0.01, double upper_q = 0.99);

// Affine map to [-1, 1] with clipping. Requires a physical chunk.
ActionChunk Normalize(const ActionChunk& chunk, const ActionBounds& bounds);
// Inverse of Normalize on [-1, 1]. Requires a normalized chunk.
ActionChunk Denormalize(const ActionChunk& chunk, const ActionBounds& bounds);

Eigen::Vector4d NormalizeValue(const Eigen::Vector4d& v, const ActionBounds& bounds);
Eigen::Vector4d DenormalizeValue(const Eigen::Vector4d& v, const ActionBounds& bounds);

// phi_t = sum_{tau < t} atan2(sin_dphi_tau, cos_dphi_tau), phi_0 = 0.
std::vector<double> AccumulateHeadings(const ActionChunk& chunk);

// Rotates each displacement into the body frame at its step.
ActionChunk GlobalToLocal(const ActionChunk& chunk);
// Inverse of GlobalToLocal.
ActionChunk LocalToGlobal(const ActionChunk& chunk);

}  // namespace latentnav

#endif  // LATENTNAV_ACTION_SPACE_H_

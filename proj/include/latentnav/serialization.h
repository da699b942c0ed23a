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

#ifndef LATENTNAV_SERIALIZATION_H_
#define LATENTNAV_SERIALIZATION_H_

#include <filesystem>
#include <string>

#include "json.hpp"
#include "latentnav/episode.h"
#include "latentnav/mppi.h"
#include "latentnav/sim_env.h"
#include "latentnav/world_model.h"

namespace latentnav {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

// Parses a JSON file. Syntax errors become ConfigError with a line number;
// missing files become IoError.
Json ReadJsonFile(const std::filesystem::path& path);
Json ParseJson(const std::string& text, const std::string& source);
// Writes `value.dump(2)` plus a trailing newline.
void WriteTextFile(const std::filesystem::path& path, const std::string& text);
void WriteJsonFile(const std::filesystem::path& path, const Json& value);
std::string ReadTextFile(const std::filesystem::path& path);

Json ToJson(const Pose& pose);
Pose PoseFromJson(const Json& j);
Json ToJson(const WorldSpec& world);
WorldSpec WorldSpecFromJson(const Json& j);
Json ToJson(const ActionBounds& bounds);
ActionBounds BoundsFromJson(const Json& j);
Json ToJson(const Instruction& instruction);
Instruction InstructionFromJson(const Json& j);
Json ToJson(const ChunkMatrix& m);
ChunkMatrix ChunkMatrixFromJson(const Json& j);
Json ToJson(const PriorStats& prior);
PriorStats PriorFromJson(const Json& j);
Json ToJson(const LatentState& z);
LatentState LatentFromJson(const Json& j);
Json ToJson(const PlannerConfig& cfg);
PlannerConfig PlannerConfigFromJson(const Json& j, const PlannerConfig& defaults = {});
Json ToJson(const PredictorShape& shape);
PredictorShape ShapeFromJson(const Json& j);
Json ToJson(const RolloutConfig& cfg);
RolloutConfig RolloutConfigFromJson(const Json& j);
Json ToJson(const PlanResult& result);
Json ToJson(const EpisodeRecord& record, bool with_timing);

// Dataset container; observations are recomputed from poses on load and every
// transition is re-checked against step_dynamics/observe.
Json DatasetToJson(const Dataset& dataset);
Dataset DatasetFromJson(const Json& j);

// World-model checkpoint: encoder seed and dims, predictor shape, row-major
// weights per tensor, action bounds and the training configuration.
struct Checkpoint {
  Encoder::Spec encoder;
  PredictorParams params;
  ActionBounds bounds;
  RolloutConfig rollout;

  WorldModel ToWorldModel() const { return {Encoder(encoder), params, bounds}; }
};

Json CheckpointToJson(const Checkpoint& checkpoint);
Checkpoint CheckpointFromJson(const Json& j);

}  // namespace latentnav

#endif  // LATENTNAV_SERIALIZATION_H_

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

#include "latentnav/serialization.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "latentnav/errors.h"

namespace latentnav {

namespace {

template <typename T>
T Field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T FieldOr(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return Field<T>(j, key);
}

const Json& Child(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

void ExpectKind(const Json& j, const char* kind) {
  const int version = Field<int>(j, "format_version");
  if (version != kFormatVersion) {
    throw ConfigError("unsupported format_version " + std::to_string(version));
  }
  if (Field<std::string>(j, "kind") != kind) {
    throw ConfigError(std::string("expected a '") + kind + "' container");
  }
}

Json ToJson(const Eigen::Vector4d& v) { return Json::array({v[0], v[1], v[2], v[3]}); }

Eigen::Vector4d Vector4FromJson(const Json& j) {
  if (!j.is_array() || j.size() != 4) throw ConfigError("expected a 4-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

Json ToJson(const Action& a) { return ToJson(a.AsVector()); }

}  // namespace

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json ParseJson(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const size_t upto = std::min(text.size(), e.byte == 0 ? size_t{0} : e.byte - 1);
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ConfigError(source + ":" + std::to_string(line) + ": JSON syntax error: " + e.what());
  }
}

Json ReadJsonFile(const std::filesystem::path& path) {
  return ParseJson(ReadTextFile(path), path.string());
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void WriteJsonFile(const std::filesystem::path& path, const Json& value) {
  WriteTextFile(path, value.dump(2) + "\n");
}

Json ToJson(const Pose& pose) { return Json::array({pose.x, pose.y, pose.heading}); }

Pose PoseFromJson(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("pose must be [x, y, heading]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json ToJson(const WorldSpec& world) {
  Json landmarks = Json::array();
  for (const auto& l : world.landmarks) landmarks.push_back({l.x(), l.y()});
  return {{"landmarks", landmarks},
          {"arena_half_width", world.arena_half_width},
          {"seed", world.seed}};
}

WorldSpec WorldSpecFromJson(const Json& j) {
  WorldSpec world;
  for (const auto& l : Child(j, "landmarks")) {
    if (!l.is_array() || l.size() != 2) throw ConfigError("landmark must be [x, y]");
    world.landmarks.emplace_back(l[0].get<double>(), l[1].get<double>());
  }
  world.arena_half_width = Field<double>(j, "arena_half_width");
  world.seed = Field<uint64_t>(j, "seed");
  world.Validate();
  return world;
}

Json ToJson(const ActionBounds& bounds) {
  return {{"lower", ToJson(Eigen::Vector4d(bounds.lower))},
          {"upper", ToJson(Eigen::Vector4d(bounds.upper))}};
}

ActionBounds BoundsFromJson(const Json& j) {
  ActionBounds b{Vector4FromJson(Child(j, "lower")), Vector4FromJson(Child(j, "upper"))};
  b.Validate();
  return b;
}

Json ToJson(const Instruction& instruction) {
  return {{"kind", InstructionName(instruction.kind)}, {"strength", instruction.strength}};
}

Instruction InstructionFromJson(const Json& j) {
  Instruction ins{ParseInstructionKind(Field<std::string>(j, "kind")),
                  Field<double>(j, "strength")};
  if (!(ins.strength >= 0.0 && ins.strength <= 1.0)) {
    throw ConfigError("instruction strength must be in [0, 1]");
  }
  return ins;
}

Json ToJson(const ChunkMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    rows.push_back(ToJson(Eigen::Vector4d(m.row(t).transpose())));
  }
  return rows;
}

ChunkMatrix ChunkMatrixFromJson(const Json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a nonempty H x 4 array");
  ChunkMatrix m(static_cast<Eigen::Index>(j.size()), kActionDim);
  for (size_t t = 0; t < j.size(); ++t) {
    m.row(static_cast<Eigen::Index>(t)) = Vector4FromJson(j[t]).transpose();
  }
  return m;
}

Json ToJson(const PriorStats& prior) {
  return {{"mu", ToJson(prior.mu)}, {"sigma", ToJson(prior.sigma)}};
}

PriorStats PriorFromJson(const Json& j) {
  PriorStats p{ChunkMatrixFromJson(Child(j, "mu")), ChunkMatrixFromJson(Child(j, "sigma"))};
  if (p.mu.rows() != p.sigma.rows()) throw ConfigError("prior: mu and sigma differ in horizon");
  return p;
}

Json ToJson(const LatentState& z) {
  Json rows = Json::array();
  for (int i = 0; i < z.tokens(); ++i) {
    Json row = Json::array();
    for (int k = 0; k < z.dim(); ++k) row.push_back(z.token(i)[k]);
    rows.push_back(std::move(row));
  }
  return rows;
}

LatentState LatentFromJson(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
    throw ConfigError("latent must be a nonempty n x d array");
  }
  const int tokens = static_cast<int>(j.size());
  const int dim = static_cast<int>(j[0].size());
  Eigen::VectorXd values(tokens * dim);
  for (int i = 0; i < tokens; ++i) {
    if (!j[static_cast<size_t>(i)].is_array() ||
        static_cast<int>(j[static_cast<size_t>(i)].size()) != dim) {
      throw ConfigError("latent rows must all have the same length");
    }
    for (int k = 0; k < dim; ++k) {
      values[i * dim + k] = j[static_cast<size_t>(i)][static_cast<size_t>(k)].get<double>();
    }
  }
  return LatentState(tokens, dim, std::move(values));
}

Json ToJson(const PlannerConfig& cfg) {
  return {{"iterations", cfg.iterations},   {"candidates", cfg.candidates},
          {"elites", cfg.elites},           {"lambda", cfg.lambda},
          {"sigma_min", cfg.sigma_min},     {"sigma_max", cfg.sigma_max},
          {"horizon", cfg.horizon},         {"seed", cfg.seed},
          {"greedy_elite", cfg.greedy_elite}, {"reinject_elite", cfg.reinject_elite}};
}

PlannerConfig PlannerConfigFromJson(const Json& j, const PlannerConfig& d) {
  PlannerConfig cfg;
  cfg.iterations = FieldOr(j, "iterations", d.iterations);
  cfg.candidates = FieldOr(j, "candidates", d.candidates);
  cfg.elites = FieldOr(j, "elites", d.elites);
  cfg.lambda = FieldOr(j, "lambda", d.lambda);
  cfg.sigma_min = FieldOr(j, "sigma_min", d.sigma_min);
  cfg.sigma_max = FieldOr(j, "sigma_max", d.sigma_max);
  cfg.horizon = FieldOr(j, "horizon", d.horizon);
  cfg.seed = FieldOr(j, "seed", d.seed);
  cfg.greedy_elite = FieldOr(j, "greedy_elite", d.greedy_elite);
  cfg.reinject_elite = FieldOr(j, "reinject_elite", d.reinject_elite);
  cfg.Validate();
  return cfg;
}

Json ToJson(const PredictorShape& shape) {
  return {{"tokens", shape.tokens},         {"dim", shape.dim},
          {"action_embed", shape.action_embed}, {"hidden", shape.hidden},
          {"layers", shape.layers},         {"window", shape.window}};
}

PredictorShape ShapeFromJson(const Json& j) {
  PredictorShape shape;
  shape.tokens = Field<int>(j, "tokens");
  shape.dim = Field<int>(j, "dim");
  shape.action_embed = FieldOr(j, "action_embed", shape.action_embed);
  shape.hidden = FieldOr(j, "hidden", shape.hidden);
  shape.layers = Field<int>(j, "layers");
  shape.window = Field<int>(j, "window");
  shape.Validate();
  return shape;
}

Json ToJson(const RolloutConfig& cfg) {
  return {{"horizon", cfg.horizon},
          {"context_window", cfg.context_window},
          {"k_roll", cfg.k_roll},
          {"tbptt_window", cfg.tbptt_window},
          {"learning_rate", cfg.learning_rate},
          {"batch_size", cfg.batch_size},
          {"epochs", cfg.epochs},
          {"seed", cfg.seed},
          {"mean_over_k", cfg.mean_over_k},
          {"grad_clip", cfg.grad_clip},
          {"validation_fraction", cfg.validation_fraction}};
}

RolloutConfig RolloutConfigFromJson(const Json& j) {
  RolloutConfig cfg;
  cfg.horizon = Field<int>(j, "horizon");
  cfg.context_window = Field<int>(j, "context_window");
  cfg.k_roll = Field<int>(j, "k_roll");
  cfg.tbptt_window = Field<int>(j, "tbptt_window");
  cfg.learning_rate = Field<double>(j, "learning_rate");
  cfg.batch_size = Field<int>(j, "batch_size");
  cfg.epochs = Field<int>(j, "epochs");
  cfg.seed = Field<uint64_t>(j, "seed");
  cfg.mean_over_k = Field<bool>(j, "mean_over_k");
  cfg.grad_clip = Field<double>(j, "grad_clip");
  cfg.validation_fraction = Field<double>(j, "validation_fraction");
  cfg.Validate();
  return cfg;
}

Json ToJson(const PlanResult& result) {
  Json iterations = Json::array();
  for (const IterationRecord& it : result.iterations) {
    Json chunks = Json::array();
    for (const ActionChunk& c : it.elites.chunks) chunks.push_back(ToJson(c.values()));
    iterations.push_back({{"best_cost", it.best_cost},
                          {"mean_elite_cost", it.mean_elite_cost},
                          {"elite_costs", it.elites.costs},
                          {"elite_weights", it.elites.weights},
                          {"elite_candidate_index", it.elites.candidate_index},
                          {"elite_chunks", chunks}});
  }
  Json out = {{"mode", PlanModeName(result.mode)},
              {"chosen", ToJson(result.chosen.values())},
              {"chosen_cost", result.chosen_cost},
              {"chosen_index", result.chosen_index},
              {"elite_reinjection", result.elite_reinjection},
              {"iterations", iterations}};
  if (result.initial.mu.size() > 0) out["initial"] = ToJson(result.initial);
  if (result.final_distribution.mu.size() > 0) {
    out["final_distribution"] = ToJson(result.final_distribution);
  }
  if (!result.candidate_costs.empty()) out["candidate_costs"] = result.candidate_costs;
  return out;
}

Json ToJson(const EpisodeRecord& record, bool with_timing) {
  Json executed = Json::array();
  for (const Pose& p : record.executed) executed.push_back(ToJson(p));
  Json truth = Json::array();
  for (const Pose& p : record.ground_truth) truth.push_back(ToJson(p));
  Json replans = Json::array();
  for (const ReplanRecord& r : record.replans) {
    Json rj = {{"step", r.step}, {"chosen_cost", r.chosen_cost}};
    if (!r.best_cost.empty()) {
      rj["best_cost"] = r.best_cost;
      rj["mean_elite_cost"] = r.mean_elite_cost;
    }
    if (!r.candidate_costs.empty()) rj["candidate_costs"] = r.candidate_costs;
    if (r.prior) rj["prior"] = ToJson(*r.prior);
    if (with_timing) rj["timing_ms"] = {{"policy", r.policy_ms}, {"plan", r.plan_ms}};
    replans.push_back(std::move(rj));
  }
  return {{"method", PlanModeName(record.method)},
          {"episode", record.episode_index},
          {"start", ToJson(record.setup.start)},
          {"goal", ToJson(record.setup.goal)},
          {"instruction", ToJson(record.setup.instruction)},
          {"ground_truth_definition", "noise-free expert rollout from the same start, goal and instruction"},
          {"executed", executed},
          {"ground_truth", truth},
          {"replans", replans}};
}

Json DatasetToJson(const Dataset& dataset) {
  Json episodes = Json::array();
  for (const DatasetEpisode& ep : dataset.episodes) {
    Json poses = Json::array();
    for (const Pose& p : ep.poses) poses.push_back(ToJson(p));
    Json actions = Json::array();
    Json global = Json::array();
    Json normalized = Json::array();
    for (const Action& a : ep.actions) actions.push_back(ToJson(a));
    for (const Action& a : ep.global_actions) global.push_back(ToJson(a));
    for (const auto& a : ep.normalized_actions) normalized.push_back(ToJson(a));
    episodes.push_back({{"goal", ToJson(ep.goal)},
                        {"instruction", ToJson(ep.instruction)},
                        {"poses", poses},
                        {"actions_local", actions},
                        {"actions_global", global},
                        {"actions_normalized", normalized}});
  }
  return {{"format_version", kFormatVersion},
          {"kind", "dataset"},
          {"world", ToJson(dataset.world)},
          {"bounds", ToJson(dataset.bounds)},
          {"bounds_frame", FrameName(dataset.bounds_frame)},
          {"episodes", episodes}};
}

Dataset DatasetFromJson(const Json& j) {
  ExpectKind(j, "dataset");
  Dataset ds;
  ds.world = WorldSpecFromJson(Child(j, "world"));
  ds.bounds = BoundsFromJson(Child(j, "bounds"));
  const std::string frame = Field<std::string>(j, "bounds_frame");
  if (frame != "local" && frame != "global") throw ConfigError("bounds_frame must be local|global");
  ds.bounds_frame = frame == "local" ? Frame::kLocalBody : Frame::kGlobal;
  for (const Json& ej : Child(j, "episodes")) {
    DatasetEpisode ep;
    ep.goal = PoseFromJson(Child(ej, "goal"));
    ep.instruction = InstructionFromJson(Child(ej, "instruction"));
    for (const Json& p : Child(ej, "poses")) {
      ep.poses.push_back(PoseFromJson(p));
      ep.observations.push_back(Observe(ep.poses.back(), ds.world));
    }
    for (const Json& a : Child(ej, "actions_local")) {
      ep.actions.push_back(Action::FromVector(Vector4FromJson(a)));
    }
    for (const Json& a : Child(ej, "actions_global")) {
      ep.global_actions.push_back(Action::FromVector(Vector4FromJson(a)));
    }
    for (const Json& a : Child(ej, "actions_normalized")) {
      ep.normalized_actions.push_back(Vector4FromJson(a));
    }
    ds.episodes.push_back(std::move(ep));
  }
  ds.CheckConsistency();
  return ds;
}

Json CheckpointToJson(const Checkpoint& checkpoint) {
  const PredictorShape& shape = checkpoint.params.shape();
  Json weights = Json::array();
  for (size_t i = 0; i < checkpoint.params.layout().tensors.size(); ++i) {
    const TensorInfo& t = checkpoint.params.layout().tensors[i];
    const double* begin = checkpoint.params.flat().data() + t.offset;
    weights.push_back({{"name", t.name},
                       {"rows", t.rows},
                       {"cols", t.cols},
                       {"data", std::vector<double>(begin, begin + t.size())}});
  }
  return {{"format_version", kFormatVersion},
          {"kind", "checkpoint"},
          {"encoder",
           {{"input_dim", checkpoint.encoder.input_dim},
            {"tokens", checkpoint.encoder.tokens},
            {"dim", checkpoint.encoder.dim},
            {"gain", checkpoint.encoder.gain},
            {"seed", checkpoint.encoder.seed}}},
          {"predictor", {{"shape", ToJson(shape)}, {"weights", weights}}},
          {"bounds", ToJson(checkpoint.bounds)},
          {"rollout", ToJson(checkpoint.rollout)}};
}

Checkpoint CheckpointFromJson(const Json& j) {
  ExpectKind(j, "checkpoint");
  Checkpoint ck;
  const Json& enc = Child(j, "encoder");
  ck.encoder.input_dim = Field<int>(enc, "input_dim");
  ck.encoder.tokens = Field<int>(enc, "tokens");
  ck.encoder.dim = Field<int>(enc, "dim");
  ck.encoder.gain = Field<double>(enc, "gain");
  ck.encoder.seed = Field<uint64_t>(enc, "seed");

  const Json& pred = Child(j, "predictor");
  const PredictorShape shape = ShapeFromJson(Child(pred, "shape"));
  if (shape.tokens != ck.encoder.tokens || shape.dim != ck.encoder.dim) {
    throw ConfigError("checkpoint: predictor latent shape differs from the encoder");
  }
  ck.params = PredictorParams(shape);
  const Json& weights = Child(pred, "weights");
  const auto& tensors = ck.params.layout().tensors;
  if (!weights.is_array() || weights.size() != tensors.size()) {
    throw ConfigError("checkpoint: expected " + std::to_string(tensors.size()) + " weight tensors");
  }
  for (size_t i = 0; i < tensors.size(); ++i) {
    const TensorInfo& t = tensors[i];
    const Json& w = weights[i];
    if (Field<std::string>(w, "name") != t.name || Field<int>(w, "rows") != t.rows ||
        Field<int>(w, "cols") != t.cols) {
      throw ConfigError("checkpoint: tensor " + std::to_string(i) + " does not match '" +
                        t.name + "' (" + std::to_string(t.rows) + "x" +
                        std::to_string(t.cols) + ")");
    }
    const auto data = Field<std::vector<double>>(w, "data");
    if (static_cast<Eigen::Index>(data.size()) != t.size()) {
      throw ConfigError("checkpoint: tensor '" + t.name + "' has the wrong number of values");
    }
    std::copy(data.begin(), data.end(), ck.params.mutable_flat().data() + t.offset);
  }
  ck.bounds = BoundsFromJson(Child(j, "bounds"));
  ck.rollout = RolloutConfigFromJson(Child(j, "rollout"));
  if (ck.rollout.context_window != shape.window) {
    throw ConfigError("checkpoint: rollout context_window differs from predictor window");
  }
  return ck;
}

}  // namespace latentnav

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

#include "latentnav/config.h"

#include <limits>
#include <set>
#include <sstream>
#include <type_traits>

#include "latentnav/errors.h"
#include "latentnav/serialization.h"
#define TOML_FLOAT_CHARCONV 1  // shortest round-trip float output
#include "toml.hpp"

namespace latentnav {

namespace {

constexpr int kConfigVersion = 1;

// Reads keys from one table and remembers which were seen so that
// misspelled keys are reported instead of silently ignored.
class Section {
 public:
  Section(const toml::table* table, std::string name, std::string source)
      : table_(table), name_(std::move(name)), source_(std::move(source)) {}

  template <typename T>
  void Read(const char* key, T& out) {
    seen_.insert(key);
    if (table_ == nullptr) return;
    const toml::node* node = table_->get(key);
    if (node == nullptr) return;
    try {
      out = Convert<T>(*node, key);
    } catch (const ConfigError& e) {
      throw ConfigError(At(*node) + e.what());
    }
  }

  const toml::table* Sub(const char* key) {
    seen_.insert(key);
    if (table_ == nullptr) return nullptr;
    const toml::node* node = table_->get(key);
    if (node == nullptr) return nullptr;
    if (!node->is_table()) throw ConfigError(At(*node) + Where(key) + ": expected a table");
    return node->as_table();
  }

  void Finish() const {
    if (table_ == nullptr) return;
    for (const auto& [key, value] : *table_) {
      const std::string k(key.str());
      if (!seen_.count(k)) {
        throw ConfigError(source_ + ":" + std::to_string(key.source().begin.line) + ": " +
                          Where(k.c_str()) + ": unknown key");
      }
    }
  }

 private:
  std::string At(const toml::node& node) const {
    return source_ + ":" + std::to_string(node.source().begin.line) + ": ";
  }

  std::string Where(const char* key) const {
    return name_.empty() ? std::string(key) : name_ + "." + key;
  }

  template <typename T>
  T Convert(const toml::node& node, const char* key) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (auto v = node.value_exact<bool>()) return *v;
      throw ConfigError(Where(key) + ": expected a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = node.value_exact<std::string>()) return *v;
      throw ConfigError(Where(key) + ": expected a string");
    } else if constexpr (std::is_same_v<T, double>) {
      if (auto v = node.value_exact<double>()) return *v;
      if (auto v = node.value_exact<int64_t>()) return static_cast<double>(*v);
      throw ConfigError(Where(key) + ": expected a number");
    } else if constexpr (std::is_same_v<T, uint64_t>) {
      auto v = node.value_exact<int64_t>();
      if (!v || *v < 0) {
        throw ConfigError(Where(key) + ": expected an integer in [0, 2^63)");
      }
      return static_cast<uint64_t>(*v);
    } else if constexpr (std::is_same_v<T, int>) {
      auto v = node.value_exact<int64_t>();
      if (!v || *v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) {
        throw ConfigError(Where(key) + ": expected an integer");
      }
      return static_cast<int>(*v);
    } else {
      using Item = typename T::value_type;
      const toml::array* arr = node.as_array();
      if (arr == nullptr) throw ConfigError(Where(key) + ": expected an array");
      T out;
      for (const toml::node& item : *arr) out.push_back(Convert<Item>(item, key));
      return out;
    }
  }

  const toml::table* table_;
  std::string name_;
  std::string source_;
  std::set<std::string, std::less<>> seen_;
};

Frame ParseFrame(const std::string& name) {
  if (name == "local") return Frame::kLocalBody;
  if (name == "global") return Frame::kGlobal;
  throw ConfigError("dataset.bounds_frame: expected 'local' or 'global', got '" + name + "'");
}

void Check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

int64_t AsToml(uint64_t v) { return static_cast<int64_t>(v); }

toml::array IntArray(const std::vector<int>& values) {
  toml::array arr;
  for (int v : values) arr.push_back(v);
  return arr;
}

}  // namespace

void ExperimentConfig::Validate() const {
  Check(world.landmarks >= 4, "world.landmarks must be >= 4");
  constexpr auto kSeedMax = static_cast<uint64_t>(std::numeric_limits<int64_t>::max());
  for (const auto& [name, seed] :
       {std::pair<const char*, uint64_t>{"world.seed", world.seed},
        {"dataset.seed", dataset.seed}, {"model.encoder_seed", model.encoder_seed},
        {"training.seed", training.seed}, {"planner.seed", planner.seed},
        {"evaluation.seed", evaluation.seed}}) {
    Check(seed <= kSeedMax, std::string(name) + " must be < 2^63");
  }
  Check(world.arena_half_width > 0.0, "world.arena_half_width must be positive");
  Check(model.tokens > 0 && model.dim > 0, "model.tokens and model.dim must be positive");
  Check(model.encoder_gain > 0.0, "model.encoder_gain must be positive");
  Check(dataset.horizon == planner.horizon && training.horizon == planner.horizon,
        "horizon mismatch between dataset, training and planner");
  Check(!evaluation.methods.empty(), "evaluation.methods must not be empty");
  const std::set<PlanMode> unique(evaluation.methods.begin(), evaluation.methods.end());
  Check(unique.size() == evaluation.methods.size(), "evaluation.methods has duplicates");
  Check(evaluation.episodes >= 1, "evaluation.episodes must be >= 1");
  Check(evaluation.curvature_tolerance >= 0.0, "evaluation.curvature_tolerance must be >= 0");
  Check(!evaluation.sweep_iterations.empty() && !evaluation.sweep_candidates.empty(),
        "evaluation sweep grid must not be empty");
  for (int j : evaluation.sweep_iterations) {
    Check(j >= 1, "evaluation.sweep_iterations entries must be >= 1");
  }
  for (int n : evaluation.sweep_candidates) {
    Check(n >= planner.elites, "evaluation.sweep_candidates entries must be >= planner.elites");
  }
  Check(evaluation.sweep_problems >= 1, "evaluation.sweep_problems must be >= 1");
  Check(!output_dir.empty(), "output.dir must not be empty");
  dataset.Validate();
  training.Validate();
  planner.Validate();
  Shape().Validate();
  MakeEpisodeConfig().Validate();
}

WorldSpec ExperimentConfig::MakeWorld() const {
  return WorldSpec::Random(world.landmarks, world.arena_half_width, world.seed);
}

Encoder::Spec ExperimentConfig::EncoderSpec() const {
  Encoder::Spec spec;
  spec.input_dim = 3 * world.landmarks;
  spec.tokens = model.tokens;
  spec.dim = model.dim;
  spec.gain = model.encoder_gain;
  spec.seed = model.encoder_seed;
  return spec;
}

PredictorShape ExperimentConfig::Shape() const {
  PredictorShape shape;
  shape.tokens = model.tokens;
  shape.dim = model.dim;
  shape.action_embed = model.action_embed;
  shape.hidden = model.hidden;
  shape.layers = model.layers;
  shape.window = training.context_window;
  return shape;
}

EpisodeConfig ExperimentConfig::MakeEpisodeConfig() const {
  EpisodeConfig cfg;
  cfg.max_steps = evaluation.max_steps;
  cfg.replan_interval = evaluation.replan_interval;
  cfg.policy_samples = evaluation.policy_samples;
  cfg.noise_scale = evaluation.noise_scale;
  cfg.planner = planner;
  cfg.expert = dataset.expert;
  return cfg;
}

ExperimentConfig ParseConfig(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.source().begin.line) + ": " +
                      std::string(e.description()));
  }

  ExperimentConfig cfg;
  Section top(&root, "", source);
  int version = kConfigVersion;
  top.Read("format_version", version);
  Check(version == kConfigVersion, "format_version " + std::to_string(version) + " is not supported");

  Section world(top.Sub("world"), "world", source);
  world.Read("landmarks", cfg.world.landmarks);
  world.Read("arena_half_width", cfg.world.arena_half_width);
  world.Read("seed", cfg.world.seed);
  world.Finish();

  Section planner(top.Sub("planner"), "planner", source);
  planner.Read("iterations", cfg.planner.iterations);
  planner.Read("candidates", cfg.planner.candidates);
  planner.Read("elites", cfg.planner.elites);
  planner.Read("lambda", cfg.planner.lambda);
  planner.Read("sigma_min", cfg.planner.sigma_min);
  planner.Read("sigma_max", cfg.planner.sigma_max);
  planner.Read("horizon", cfg.planner.horizon);
  planner.Read("seed", cfg.planner.seed);
  planner.Read("greedy_elite", cfg.planner.greedy_elite);
  planner.Read("reinject_elite", cfg.planner.reinject_elite);
  planner.Finish();
  cfg.dataset.horizon = cfg.planner.horizon;
  cfg.training.horizon = cfg.planner.horizon;

  Section dataset(top.Sub("dataset"), "dataset", source);
  std::string frame = FrameName(cfg.dataset.bounds_frame);
  dataset.Read("episodes", cfg.dataset.episodes);
  dataset.Read("steps_per_episode", cfg.dataset.steps_per_episode);
  dataset.Read("replan_interval", cfg.dataset.replan_interval);
  dataset.Read("noise_scale", cfg.dataset.noise_scale);
  dataset.Read("bounds_frame", frame);
  dataset.Read("seed", cfg.dataset.seed);
  dataset.Finish();
  cfg.dataset.bounds_frame = ParseFrame(frame);

  Section expert(top.Sub("expert"), "expert", source);
  expert.Read("v_max", cfg.dataset.expert.v_max);
  expert.Read("phi_max", cfg.dataset.expert.phi_max);
  expert.Read("heading_gain", cfg.dataset.expert.heading_gain);
  expert.Read("speed_gain", cfg.dataset.expert.speed_gain);
  expert.Read("arrive_radius", cfg.dataset.expert.arrive_radius);
  expert.Finish();

  Section model(top.Sub("model"), "model", source);
  model.Read("tokens", cfg.model.tokens);
  model.Read("dim", cfg.model.dim);
  model.Read("encoder_gain", cfg.model.encoder_gain);
  model.Read("encoder_seed", cfg.model.encoder_seed);
  model.Read("action_embed", cfg.model.action_embed);
  model.Read("hidden", cfg.model.hidden);
  model.Read("layers", cfg.model.layers);
  model.Finish();

  Section training(top.Sub("training"), "training", source);
  training.Read("context_window", cfg.training.context_window);
  training.Read("k_roll", cfg.training.k_roll);
  training.Read("tbptt_window", cfg.training.tbptt_window);
  training.Read("learning_rate", cfg.training.learning_rate);
  training.Read("batch_size", cfg.training.batch_size);
  training.Read("epochs", cfg.training.epochs);
  training.Read("seed", cfg.training.seed);
  training.Read("mean_over_k", cfg.training.mean_over_k);
  training.Read("grad_clip", cfg.training.grad_clip);
  training.Read("validation_fraction", cfg.training.validation_fraction);
  training.Finish();

  Section eval(top.Sub("evaluation"), "evaluation", source);
  std::vector<std::string> methods;
  for (PlanMode m : cfg.evaluation.methods) methods.emplace_back(PlanModeName(m));
  eval.Read("methods", methods);
  eval.Read("episodes", cfg.evaluation.episodes);
  eval.Read("policy_samples", cfg.evaluation.policy_samples);
  eval.Read("noise_scale", cfg.evaluation.noise_scale);
  eval.Read("replan_interval", cfg.evaluation.replan_interval);
  eval.Read("max_steps", cfg.evaluation.max_steps);
  eval.Read("seed", cfg.evaluation.seed);
  eval.Read("curvature_tolerance", cfg.evaluation.curvature_tolerance);
  eval.Read("sweep_iterations", cfg.evaluation.sweep_iterations);
  eval.Read("sweep_candidates", cfg.evaluation.sweep_candidates);
  eval.Read("sweep_problems", cfg.evaluation.sweep_problems);
  eval.Finish();
  cfg.evaluation.methods.clear();
  for (const std::string& name : methods) cfg.evaluation.methods.push_back(ParsePlanMode(name));

  Section output(top.Sub("output"), "output", source);
  output.Read("dir", cfg.output_dir);
  output.Finish();
  top.Finish();

  cfg.Validate();
  return cfg;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  return ParseConfig(ReadTextFile(path), path.string());
}

std::string ConfigToToml(const ExperimentConfig& cfg) {
  toml::array methods;
  for (PlanMode m : cfg.evaluation.methods) methods.push_back(std::string(PlanModeName(m)));
  const auto& ex = cfg.dataset.expert;
  toml::table root{
      {"format_version", kConfigVersion},
      {"world",
       toml::table{{"landmarks", cfg.world.landmarks},
                   {"arena_half_width", cfg.world.arena_half_width},
                   {"seed", AsToml(cfg.world.seed)}}},
      {"dataset",
       toml::table{{"episodes", cfg.dataset.episodes},
                   {"steps_per_episode", cfg.dataset.steps_per_episode},
                   {"replan_interval", cfg.dataset.replan_interval},
                   {"noise_scale", cfg.dataset.noise_scale},
                   {"bounds_frame", std::string(FrameName(cfg.dataset.bounds_frame))},
                   {"seed", AsToml(cfg.dataset.seed)}}},
      {"expert",
       toml::table{{"v_max", ex.v_max},
                   {"phi_max", ex.phi_max},
                   {"heading_gain", ex.heading_gain},
                   {"speed_gain", ex.speed_gain},
                   {"arrive_radius", ex.arrive_radius}}},
      {"model",
       toml::table{{"tokens", cfg.model.tokens},
                   {"dim", cfg.model.dim},
                   {"encoder_gain", cfg.model.encoder_gain},
                   {"encoder_seed", AsToml(cfg.model.encoder_seed)},
                   {"action_embed", cfg.model.action_embed},
                   {"hidden", cfg.model.hidden},
                   {"layers", cfg.model.layers}}},
      {"training",
       toml::table{{"context_window", cfg.training.context_window},
                   {"k_roll", cfg.training.k_roll},
                   {"tbptt_window", cfg.training.tbptt_window},
                   {"learning_rate", cfg.training.learning_rate},
                   {"batch_size", cfg.training.batch_size},
                   {"epochs", cfg.training.epochs},
                   {"seed", AsToml(cfg.training.seed)},
                   {"mean_over_k", cfg.training.mean_over_k},
                   {"grad_clip", cfg.training.grad_clip},
                   {"validation_fraction", cfg.training.validation_fraction}}},
      {"planner",
       toml::table{{"iterations", cfg.planner.iterations},
                   {"candidates", cfg.planner.candidates},
                   {"elites", cfg.planner.elites},
                   {"lambda", cfg.planner.lambda},
                   {"sigma_min", cfg.planner.sigma_min},
                   {"sigma_max", cfg.planner.sigma_max},
                   {"horizon", cfg.planner.horizon},
                   {"seed", AsToml(cfg.planner.seed)},
                   {"greedy_elite", cfg.planner.greedy_elite},
                   {"reinject_elite", cfg.planner.reinject_elite}}},
      {"evaluation",
       toml::table{{"methods", methods},
                   {"episodes", cfg.evaluation.episodes},
                   {"policy_samples", cfg.evaluation.policy_samples},
                   {"noise_scale", cfg.evaluation.noise_scale},
                   {"replan_interval", cfg.evaluation.replan_interval},
                   {"max_steps", cfg.evaluation.max_steps},
                   {"seed", AsToml(cfg.evaluation.seed)},
                   {"curvature_tolerance", cfg.evaluation.curvature_tolerance},
                   {"sweep_iterations", IntArray(cfg.evaluation.sweep_iterations)},
                   {"sweep_candidates", IntArray(cfg.evaluation.sweep_candidates)},
                   {"sweep_problems", cfg.evaluation.sweep_problems}}},
      {"output", toml::table{{"dir", cfg.output_dir}}},
  };
  std::ostringstream os;
  os << root << "\n";
  return os.str();
}

}  // namespace latentnav

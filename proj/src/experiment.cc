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

#include "latentnav/experiment.h"

#include <openssl/evp.h>
#include <sys/utsname.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "latentnav/errors.h"

namespace latentnav {

namespace fs = std::filesystem;

namespace {

void Log(const CommandOptions& options, const std::string& message) {
  if (options.log) options.log(message);
}

// Writes run artifacts and records their checksums.
class ArtifactWriter {
 public:
  ArtifactWriter(fs::path root, std::string command, const ExperimentConfig* config)
      : root_(std::move(root)) {
    manifest_.command = std::move(command);
    manifest_.platform = PlatformNotes();
    if (config != nullptr) manifest_.config_hash = Sha256Hex(ConfigToToml(*config));
  }

  void Text(const std::string& rel, const std::string& text, bool is_volatile = false) {
    WriteTextFile(root_ / rel, text);
    ArtifactEntry entry{rel, Sha256Hex(text), text.size()};
    (is_volatile ? manifest_.volatile_artifacts : manifest_.artifacts).push_back(entry);
  }

  void JsonFile(const std::string& rel, const Json& value, bool is_volatile = false) {
    Text(rel, value.dump(2) + "\n", is_volatile);
  }

  RunManifest Finish() {
    WriteJsonFile(root_ / ("manifest_" + manifest_.command + ".json"), ToJson(manifest_));
    return manifest_;
  }

 private:
  fs::path root_;
  RunManifest manifest_;
};

std::string Num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int ExpectedCurvatureSign(const Instruction& instruction) {
  switch (instruction.kind) {
    case InstructionKind::kCurveLeft: return 1;
    case InstructionKind::kCurveRight: return -1;
    case InstructionKind::kStraight: return 0;
  }
  return 0;
}

fs::path OrDefault(const fs::path& given, const fs::path& out, const char* name) {
  return given.empty() ? out / name : given;
}

Checkpoint LoadCheckpoint(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("checkpoint not found: " + path.string());
  return CheckpointFromJson(ReadJsonFile(path));
}

void CheckCheckpointMatchesConfig(const Checkpoint& ck, const ExperimentConfig& config) {
  const Encoder::Spec want = config.EncoderSpec();
  const Encoder::Spec& got = ck.encoder;
  if (got.input_dim != want.input_dim || got.tokens != want.tokens || got.dim != want.dim ||
      got.gain != want.gain || got.seed != want.seed) {
    throw ConfigError("config/checkpoint mismatch: encoder settings differ");
  }
  if (!(ck.params.shape() == config.Shape())) {
    throw ConfigError("config/checkpoint mismatch: predictor shape differs");
  }
  if (ck.rollout.horizon != config.planner.horizon) {
    throw ConfigError("config/checkpoint mismatch: checkpoint trained with horizon " +
                      std::to_string(ck.rollout.horizon));
  }
}

std::string TensorNameAt(const PredictorParams& params, Eigen::Index index) {
  for (const TensorInfo& t : params.layout().tensors) {
    if (index >= t.offset && index < t.offset + t.size()) {
      const Eigen::Index local = index - t.offset;
      return t.name + "[" + std::to_string(local / t.cols) + "," +
             std::to_string(local % t.cols) + "]";
    }
  }
  return "?";
}

}  // namespace

std::string Sha256Hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < length; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::string FileSha256(const fs::path& path) { return Sha256Hex(ReadTextFile(path)); }

Json ToJson(const RunManifest& m) {
  auto list = [](const std::vector<ArtifactEntry>& entries) {
    Json arr = Json::array();
    for (const ArtifactEntry& e : entries) {
      arr.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    }
    return arr;
  };
  return {{"format_version", kFormatVersion},
          {"kind", "manifest"},
          {"command", m.command},
          {"config_hash", m.config_hash},
          {"tool_version", m.tool_version},
          {"platform", m.platform},
          {"artifacts", list(m.artifacts)},
          {"volatile_artifacts", list(m.volatile_artifacts)}};
}

RunManifest ManifestFromJson(const Json& j) {
  try {
    if (j.at("kind").get<std::string>() != "manifest") throw ConfigError("not a manifest");
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.platform = j.at("platform").get<std::string>();
    auto read = [](const Json& arr) {
      std::vector<ArtifactEntry> out;
      for (const Json& e : arr) {
        out.push_back({e.at("path").get<std::string>(), e.at("sha256").get<std::string>(),
                       e.at("bytes").get<uint64_t>()});
      }
      return out;
    };
    m.artifacts = read(j.at("artifacts"));
    m.volatile_artifacts = read(j.at("volatile_artifacts"));
    return m;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
}

std::string PlatformNotes() {
  std::ostringstream os;
  utsname info{};
  if (uname(&info) == 0) os << info.sysname << ' ' << info.machine << "; ";
#if defined(__clang__)
  os << "clang " << __clang_major__ << '.' << __clang_minor__;
#elif defined(__GNUC__)
  os << "gcc " << __GNUC__ << '.' << __GNUC_MINOR__;
#endif
  os << "; eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
     << EIGEN_MINOR_VERSION;
  return os.str();
}

void VerifyManifest(const RunManifest& manifest, const fs::path& run_dir) {
  for (const auto* list : {&manifest.artifacts, &manifest.volatile_artifacts}) {
    for (const ArtifactEntry& e : *list) {
      const fs::path p = run_dir / e.path;
      if (!fs::exists(p)) throw IoError("manifest: missing artifact " + e.path);
      if (FileSha256(p) != e.sha256) throw IoError("manifest: checksum mismatch for " + e.path);
    }
  }
}

int WorkerCount() {
  if (const char* env = std::getenv(kWorkersEnv); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 1024) {
      throw ConfigError(std::string(kWorkersEnv) + " must be an integer in [1, 1024]");
    }
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void ParallelFor(int count, int workers, const std::function<void(int)>& fn) {
  workers = std::clamp(workers, 1, std::max(1, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) threads.emplace_back(work);
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

uint64_t DeriveSeed(uint64_t master, uint64_t index, uint64_t stream) {
  std::seed_seq seq{static_cast<uint32_t>(master), static_cast<uint32_t>(master >> 32),
                    static_cast<uint32_t>(index), static_cast<uint32_t>(index >> 32),
                    static_cast<uint32_t>(stream)};
  std::array<uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<uint64_t>(out[0]) << 32) | out[1];
}

std::vector<EpisodeSetup> MakeEpisodeSetups(const WorldSpec& world, int count, uint64_t seed,
                                            const EpisodeConfig& config) {
  std::vector<EpisodeSetup> setups;
  for (int i = 0; i < count; ++i) {
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(i), 0));
    EpisodeSetup s = RandomEpisodeSetup(world, rng);
    s.goal.heading = ExpertRollout(s.start, s.goal, s.instruction, config.max_steps,
                                   config.expert)
                         .back()
                         .heading;
    setups.push_back(s);
  }
  return setups;
}

const std::vector<EpisodeRecord>& EvaluationResult::Records(PlanMode method) const {
  for (size_t m = 0; m < methods.size(); ++m) {
    if (methods[m] == method) return records[m];
  }
  throw ConfigError(std::string("evaluation has no records for ") + PlanModeName(method));
}

EvaluationResult RunEvaluation(const WorldSpec& world, const WorldModel& model,
                               const EpisodeConfig& config, std::span<const PlanMode> methods,
                               int episodes, uint64_t seed, int workers) {
  CheckModelCompatibility(world, model, config);
  if (episodes < 1) throw ConfigError("evaluation: episodes must be >= 1");
  EvaluationResult result;
  result.methods.assign(methods.begin(), methods.end());
  result.setups = MakeEpisodeSetups(world, episodes, seed, config);
  const int num_methods = static_cast<int>(methods.size());
  result.records.assign(methods.size(), std::vector<EpisodeRecord>(static_cast<size_t>(episodes)));

  ParallelFor(num_methods * episodes, workers, [&](int task) {
    const int m = task / episodes;
    const int e = task % episodes;
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(e), 1));
    result.records[static_cast<size_t>(m)][static_cast<size_t>(e)] =
        RunEpisode(methods[static_cast<size_t>(m)], world, model,
                   result.setups[static_cast<size_t>(e)], config, rng, e);
  });

  for (int m = 0; m < num_methods; ++m) {
    MethodEpisodes group{PlanModeName(methods[static_cast<size_t>(m)]), {}};
    for (const EpisodeRecord& r : result.records[static_cast<size_t>(m)]) {
      group.episodes.push_back(ComputeEpisodeMetrics({r.executed, r.ground_truth}));
    }
    result.metrics.push_back(std::move(group));
  }
  result.table = Aggregate(result.metrics);
  return result;
}

std::string EpisodesCsv(const EvaluationResult& result) {
  std::ostringstream os;
  os << "episode,start_x,start_y,start_heading,goal_x,goal_y,goal_heading,instruction,strength\n";
  for (size_t e = 0; e < result.setups.size(); ++e) {
    const EpisodeSetup& s = result.setups[e];
    os << e << ',' << Num(s.start.x) << ',' << Num(s.start.y) << ',' << Num(s.start.heading)
       << ',' << Num(s.goal.x) << ',' << Num(s.goal.y) << ',' << Num(s.goal.heading) << ','
       << InstructionName(s.instruction.kind) << ',' << Num(s.instruction.strength) << '\n';
  }
  return os.str();
}

std::string PerEpisodeMetricsCsv(const EvaluationResult& result) {
  std::ostringstream os;
  os << "method,episode";
  for (const char* name : kMetricColumnNames) os << ',' << name;
  os << '\n';
  for (const MethodEpisodes& g : result.metrics) {
    for (size_t e = 0; e < g.episodes.size(); ++e) {
      os << g.method << ',' << e;
      for (double v : g.episodes[e].Columns()) os << ',' << Num(v);
      os << '\n';
    }
  }
  return os.str();
}

std::string TrajectoriesCsv(const EvaluationResult& result) {
  std::ostringstream os;
  os << "method,episode,t,x,y,heading,gt_x,gt_y,gt_heading\n";
  for (size_t m = 0; m < result.methods.size(); ++m) {
    for (const EpisodeRecord& r : result.records[m]) {
      for (size_t t = 0; t < r.executed.size(); ++t) {
        const Pose& p = r.executed[t];
        const Pose& g = r.ground_truth[t];
        os << PlanModeName(r.method) << ',' << r.episode_index << ',' << t << ',' << Num(p.x)
           << ',' << Num(p.y) << ',' << Num(p.heading) << ',' << Num(g.x) << ',' << Num(g.y)
           << ',' << Num(g.heading) << '\n';
      }
    }
  }
  return os.str();
}

std::string FidelityCsv(const EvaluationResult& result, double tolerance) {
  std::ostringstream os;
  os << "method,episodes,matches,match_rate\n";
  auto row = [&](const std::string& name, auto trajectory_of) {
    int matches = 0;
    const int n = static_cast<int>(result.setups.size());
    for (int e = 0; e < n; ++e) {
      const std::vector<Pose>& poses = trajectory_of(e);
      if (CurvatureSign(poses, tolerance) ==
          ExpectedCurvatureSign(result.setups[static_cast<size_t>(e)].instruction)) {
        ++matches;
      }
    }
    os << name << ',' << n << ',' << matches << ',' << Num(static_cast<double>(matches) / n)
       << '\n';
  };
  for (size_t m = 0; m < result.methods.size(); ++m) {
    row(PlanModeName(result.methods[m]),
        [&](int e) -> const std::vector<Pose>& { return result.records[m][static_cast<size_t>(e)].executed; });
  }
  if (!result.records.empty()) {
    row("ground_truth", [&](int e) -> const std::vector<Pose>& {
      return result.records[0][static_cast<size_t>(e)].ground_truth;
    });
  }
  return os.str();
}

std::string TimingCsv(const EvaluationResult& result) {
  std::ostringstream os;
  os << "method,planning_calls,policy_ms_mean,plan_ms_mean,total_ms_mean\n";
  for (size_t m = 0; m < result.methods.size(); ++m) {
    double policy = 0.0;
    double plan = 0.0;
    int calls = 0;
    for (const EpisodeRecord& r : result.records[m]) {
      for (const ReplanRecord& rp : r.replans) {
        policy += rp.policy_ms;
        plan += rp.plan_ms;
        ++calls;
      }
    }
    const double n = std::max(calls, 1);
    os << PlanModeName(result.methods[m]) << ',' << calls << ',' << Num(policy / n) << ','
       << Num(plan / n) << ',' << Num((policy + plan) / n) << '\n';
  }
  return os.str();
}

WarmStartProbe ProbeIterationZero(const WorldSpec& world, const WorldModel& model,
                                  const EpisodeConfig& config,
                                  std::span<const EpisodeSetup> setups, uint64_t seed) {
  CheckModelCompatibility(world, model, config);
  const PlannerConfig& pc = config.planner;
  WarmStartProbe probe;
  for (size_t i = 0; i < setups.size(); ++i) {
    const EpisodeSetup& s = setups[i];
    const LatentState start = model.encoder.Encode(Observe(s.start, world));
    const LatentState goal = model.encoder.Encode(Observe(s.goal, world));
    Rng sample_rng(DeriveSeed(seed, i, 2));
    const PolicySamples samples = DrawPolicySamples(s.start, s.goal, s.instruction,
                                                    config.policy_samples, pc.horizon, 0.0,
                                                    config.expert, sample_rng);
    const PriorStats warm_init = ComputePrior(samples, model.bounds, pc.sigma_min, pc.sigma_max);
    Rng warm_rng(DeriveSeed(seed, i, 3));
    Rng cold_rng(DeriveSeed(seed, i, 3));
    const PlanResult warm = Plan(start, goal, warm_init, pc, model.params, warm_rng,
                                 PlanMode::kWarmStartMppi);
    const PlanResult cold = Plan(start, goal, UninformedPrior(pc.horizon, pc.sigma_max), pc,
                                 model.params, cold_rng, PlanMode::kUninformedMppi);
    probe.warm_best.push_back(warm.iterations.front().best_cost);
    probe.uninformed_best.push_back(cold.iterations.front().best_cost);
    if (probe.warm_best.back() <= probe.uninformed_best.back()) ++probe.warm_not_worse;
  }
  probe.fraction = setups.empty() ? 0.0
                                  : static_cast<double>(probe.warm_not_worse) /
                                        static_cast<double>(setups.size());
  return probe;
}

std::string WarmStartProbeCsv(const WarmStartProbe& probe) {
  std::ostringstream os;
  os << "problem,warm_start_best_cost,uninformed_best_cost\n";
  for (size_t i = 0; i < probe.warm_best.size(); ++i) {
    os << i << ',' << Num(probe.warm_best[i]) << ',' << Num(probe.uninformed_best[i]) << '\n';
  }
  return os.str();
}

LinearFit FitLine(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("fit: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

LatencySweep RunLatencySweep(const WorldSpec& world, const WorldModel& model,
                             const EpisodeConfig& config, std::span<const int> iterations,
                             std::span<const int> candidates, int problems, uint64_t seed,
                             int repeats) {
  CheckModelCompatibility(world, model, config);
  const std::vector<EpisodeSetup> setups = MakeEpisodeSetups(world, problems, seed, config);
  struct Problem {
    LatentState start, goal;
    PriorStats init;
  };
  std::vector<Problem> prepared;
  for (size_t i = 0; i < setups.size(); ++i) {
    const EpisodeSetup& s = setups[i];
    Rng rng(DeriveSeed(seed, i, 4));
    const PolicySamples samples =
        DrawPolicySamples(s.start, s.goal, s.instruction, config.policy_samples,
                          config.planner.horizon, config.noise_scale, config.expert, rng);
    prepared.push_back({model.encoder.Encode(Observe(s.start, world)),
                        model.encoder.Encode(Observe(s.goal, world)),
                        ComputePrior(samples, model.bounds, config.planner.sigma_min,
                                     config.planner.sigma_max)});
  }

  LatencySweep sweep;
  std::vector<double> x, y;
  for (int j : iterations) {
    for (int n : candidates) {
      PlannerConfig pc = config.planner;
      pc.iterations = j;
      pc.candidates = n;
      pc.elites = std::min(pc.elites, n);
      std::vector<double> times;
      for (int rep = 0; rep <= repeats; ++rep) {
        for (size_t p = 0; p < prepared.size(); ++p) {
          Rng rng(DeriveSeed(seed, p, 5));
          const auto t0 = std::chrono::steady_clock::now();
          Plan(prepared[p].start, prepared[p].goal, prepared[p].init, pc, model.params, rng);
          const double ms =
              std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                  .count();
          if (rep > 0) times.push_back(ms);  // rep 0 warms caches
        }
      }
      const LatencyPoint point{j, n, Median(times)};
      sweep.points.push_back(point);
      x.push_back(static_cast<double>(j) * n);
      y.push_back(point.plan_ms);
    }
  }
  sweep.fit = FitLine(x, y);
  return sweep;
}

std::string LatencyCsv(const LatencySweep& sweep) {
  std::ostringstream os;
  os << "iterations,candidates,j_times_n,plan_ms_median\n";
  for (const LatencyPoint& p : sweep.points) {
    os << p.iterations << ',' << p.candidates << ',' << p.iterations * p.candidates << ','
       << Num(p.plan_ms) << '\n';
  }
  os << "# fit plan_ms = " << Num(sweep.fit.intercept) << " + " << Num(sweep.fit.slope)
     << " * J*N, r_squared = " << Num(sweep.fit.r_squared) << '\n';
  return os.str();
}

ExperimentConfig ApplyOverrides(ExperimentConfig config, const CommandOptions& options,
                                const std::string& command) {
  if (options.seed_override) {
    const uint64_t s = *options.seed_override;
    if (command == "generate") config.dataset.seed = s;
    if (command == "train" || command == "grad-check") config.training.seed = s;
    if (command == "evaluate") config.evaluation.seed = s;
    if (command == "plan") config.planner.seed = s;
  }
  if (options.methods) config.evaluation.methods = *options.methods;
  if (options.greedy_elite) config.planner.greedy_elite = true;
  if (!options.out.empty()) config.output_dir = options.out.string();
  config.Validate();
  return config;
}

RunManifest CmdGenerate(const ExperimentConfig& config, const CommandOptions& options) {
  const fs::path out = options.out.empty() ? fs::path(config.output_dir) : options.out;
  const WorldSpec world = config.MakeWorld();
  Log(options, "generating " + std::to_string(config.dataset.episodes) + " episodes");
  const Dataset dataset = GenerateDataset(world, config.dataset);
  ArtifactWriter writer(out, "generate", &config);
  writer.Text("config_generate.toml", ConfigToToml(config));
  writer.JsonFile("dataset.json", DatasetToJson(dataset));
  return writer.Finish();
}

RunManifest CmdTrain(const ExperimentConfig& config, const CommandOptions& options) {
  const fs::path out = options.out.empty() ? fs::path(config.output_dir) : options.out;
  const fs::path dataset_path = OrDefault(options.dataset, out, "dataset.json");
  if (!fs::exists(dataset_path)) throw IoError("dataset not found: " + dataset_path.string());
  const Dataset dataset = DatasetFromJson(ReadJsonFile(dataset_path));
  if (dataset.world.landmarks != config.MakeWorld().landmarks) {
    throw ConfigError("dataset was generated for a different world than the config describes");
  }
  if (dataset.bounds_frame != config.dataset.bounds_frame) {
    throw ConfigError("dataset bounds_frame differs from the config");
  }
  const Encoder encoder(config.EncoderSpec());
  const SegmentSplit split = BuildSegments(dataset, encoder, config.training);
  Log(options, "training on " + std::to_string(split.train.size()) + " segments, validating on " +
                   std::to_string(split.validation.size()));
  const TrainResult trained = Train(split.train, split.validation, config.Shape(), config.training);

  std::ostringstream curve;
  curve << "epoch,train_loss,validation_loss\n";
  for (const EpochStats& e : trained.curve) {
    curve << e.epoch << ',' << Num(e.train_loss) << ',' << Num(e.validation_loss) << '\n';
  }
  std::vector<Eigen::VectorXd> latents;
  std::vector<Eigen::Vector4d> actions;
  for (const Segment& s : split.validation.empty() ? split.train : split.validation) {
    latents.push_back(s.latents.front());
    actions.push_back(s.actions.front());
  }
  const double sensitivity = ActionSensitivity(trained.params, latents, actions);

  Checkpoint ck{encoder.spec(), trained.params, dataset.bounds, config.training};
  ArtifactWriter writer(out, "train", &config);
  writer.Text("config_train.toml", ConfigToToml(config));
  writer.JsonFile("checkpoint.json", CheckpointToJson(ck));
  writer.Text("loss_curve.csv", curve.str());
  writer.JsonFile("train_summary.json",
                  {{"initial_train_loss", trained.initial_train_loss},
                   {"final_train_loss", trained.curve.back().train_loss},
                   {"final_validation_loss", trained.curve.back().validation_loss},
                   {"train_segments", split.train.size()},
                   {"validation_segments", split.validation.size()},
                   {"action_sensitivity", sensitivity},
                   {"dataset_sha256", FileSha256(dataset_path)}});
  Log(options, "final train loss " + Num(trained.curve.back().train_loss) + ", validation " +
                   Num(trained.curve.back().validation_loss));
  return writer.Finish();
}

RunManifest CmdEvaluate(const ExperimentConfig& config, const CommandOptions& options) {
  const fs::path out = options.out.empty() ? fs::path(config.output_dir) : options.out;
  const Checkpoint ck = LoadCheckpoint(OrDefault(options.checkpoint, out, "checkpoint.json"));
  CheckCheckpointMatchesConfig(ck, config);
  const WorldSpec world = config.MakeWorld();
  const WorldModel model = ck.ToWorldModel();
  const EpisodeConfig ecfg = config.MakeEpisodeConfig();
  const auto& ev = config.evaluation;

  Log(options, "evaluating " + std::to_string(ev.methods.size()) + " methods on " +
                   std::to_string(ev.episodes) + " episodes with " +
                   std::to_string(options.workers) + " workers");
  const EvaluationResult result =
      RunEvaluation(world, model, ecfg, ev.methods, ev.episodes, ev.seed, options.workers);
  const WarmStartProbe probe = ProbeIterationZero(world, model, ecfg, result.setups, ev.seed);
  Log(options, "latency sweep");
  const LatencySweep sweep =
      RunLatencySweep(world, model, ecfg, ev.sweep_iterations, ev.sweep_candidates,
                      ev.sweep_problems, ev.seed);

  ArtifactWriter writer(out, "evaluate", &config);
  writer.Text("eval/config.toml", ConfigToToml(config));
  writer.Text("eval/episodes.csv", EpisodesCsv(result));
  writer.Text("eval/metrics.csv", result.table.ToCsv());
  writer.Text("eval/metrics.txt",
              result.table.ToText() +
                  "Ground truth: noise-free expert rollout from the same start, goal and "
                  "instruction.\n");
  writer.Text("eval/per_episode_metrics.csv", PerEpisodeMetricsCsv(result));
  writer.Text("eval/sign_tests.csv", result.table.ComparisonsCsv());
  writer.Text("eval/fidelity.csv", FidelityCsv(result, ev.curvature_tolerance));
  writer.Text("eval/trajectories.csv", TrajectoriesCsv(result));
  writer.Text("eval/iteration0_probe.csv", WarmStartProbeCsv(probe));
  for (size_t m = 0; m < result.methods.size(); ++m) {
    std::string lines;
    for (const EpisodeRecord& r : result.records[m]) lines += ToJson(r, false).dump() + "\n";
    writer.Text(std::string("eval/records/") + PlanModeName(result.methods[m]) + ".jsonl", lines);
  }
  writer.Text("eval/timing.csv", TimingCsv(result), true);
  writer.Text("eval/latency_sweep.csv", LatencyCsv(sweep), true);
  Log(options, "\n" + result.table.ToText());
  Log(options, "iteration-0 warm start not worse on " + std::to_string(probe.warm_not_worse) +
                   "/" + std::to_string(probe.warm_best.size()) + " problems; latency fit R^2 " +
                   Num(sweep.fit.r_squared));
  return writer.Finish();
}

GradCheckReport CmdGradCheck(const ExperimentConfig& config, const CommandOptions& options) {
  const fs::path out = options.out.empty() ? fs::path(config.output_dir) : options.out;
  const WorldSpec world = config.MakeWorld();
  Dataset dataset;
  if (!options.dataset.empty()) {
    dataset = DatasetFromJson(ReadJsonFile(options.dataset));
  } else {
    DatasetConfig small = config.dataset;
    small.episodes = std::min(small.episodes, 8);
    dataset = GenerateDataset(world, small);
  }
  const Encoder encoder(config.EncoderSpec());
  PredictorParams params = PredictorParams::Initialize(config.Shape(), config.training.seed);
  if (!options.checkpoint.empty()) {
    const Checkpoint ck = LoadCheckpoint(options.checkpoint);
    CheckCheckpointMatchesConfig(ck, config);
    params = ck.params;
  }
  const SegmentSplit split = BuildSegments(dataset, encoder, config.training);
  std::vector<int> indices(
      std::min<size_t>(split.train.size(), static_cast<size_t>(config.training.batch_size)));
  std::iota(indices.begin(), indices.end(), 0);
  const SegmentBatch batch = StackSegments(split.train, config.training.k_roll, indices);

  GradCheckReport report;
  report.result = GradientCheck(params, batch, config.training);
  report.worst_tensor = TensorNameAt(params, report.result.worst_index);
  report.passed = report.result.max_relative_error < report.threshold;

  ArtifactWriter writer(out, "grad-check", &config);
  writer.JsonFile("grad_check.json", {{"max_relative_error", report.result.max_relative_error},
                                      {"checked_weights", report.result.checked},
                                      {"worst_index", report.result.worst_index},
                                      {"worst_weight", report.worst_tensor},
                                      {"threshold", report.threshold},
                                      {"batch_size", batch.size()},
                                      {"passed", report.passed}});
  writer.Finish();
  return report;
}

namespace {

PredictorParams FixtureModel(const Json& model, const fs::path& base_dir) {
  if (model.contains("checkpoint")) {
    return LoadCheckpoint(base_dir / model.at("checkpoint").get<std::string>()).params;
  }
  if (model.contains("identity")) {
    PredictorShape shape;
    shape.tokens = model.at("identity").at("tokens").get<int>();
    shape.dim = model.at("identity").at("dim").get<int>();
    shape.layers = 0;
    shape.window = 1;
    shape.Validate();
    return PredictorParams(shape);  // zero skip path: z' = z
  }
  if (model.contains("shape")) {
    return PredictorParams::Initialize(ShapeFromJson(model.at("shape")),
                                       model.at("init_seed").get<uint64_t>());
  }
  throw ConfigError("fixture: model needs one of 'checkpoint', 'identity' or 'shape'");
}

}  // namespace

Json CmdPlan(const Json& fixture, const fs::path& base_dir, const CommandOptions& options) {
  try {
    if (fixture.at("format_version").get<int>() != kFormatVersion) {
      throw ConfigError("fixture: unsupported format_version");
    }
    if (fixture.at("kind").get<std::string>() != "plan_fixture") {
      throw ConfigError("fixture: kind must be 'plan_fixture'");
    }
    const PlanMode mode = ParsePlanMode(fixture.at("mode").get<std::string>());
    const LatentState start = LatentFromJson(fixture.at("start_latent"));
    const LatentState goal = LatentFromJson(fixture.at("goal_latent"));
    const PredictorParams params = FixtureModel(fixture.at("model"), base_dir);
    const PredictorShape& shape = params.shape();
    for (const LatentState* z : {&start, &goal}) {
      if (z->tokens() != shape.tokens || z->dim() != shape.dim) {
        throw ConfigError("fixture: latent shape does not match the model");
      }
    }
    PlannerConfig pc = PlannerConfigFromJson(fixture.value("planner", Json::object()));
    if (options.seed_override) pc.seed = *options.seed_override;
    if (options.greedy_elite) pc.greedy_elite = true;

    PlanResult result;
    if (mode == PlanMode::kPolicyScoring) {
      std::vector<ActionChunk> candidates;
      for (const Json& c : fixture.at("candidates")) {
        candidates.emplace_back(ChunkMatrixFromJson(c), Frame::kLocalBody, true);
      }
      if (candidates.empty()) throw ConfigError("fixture: candidates must not be empty");
      result = PolicyScoringPlan(candidates, start, goal, params);
    } else if (mode == PlanMode::kPolicyOnly) {
      throw ConfigError("fixture: policy_only does not plan");
    } else {
      const Json& init = fixture.at("init");
      const std::string kind = init.at("kind").get<std::string>();
      PriorStats prior;
      if (kind == "uninformed") {
        prior = UninformedPrior(pc.horizon, pc.sigma_max);
      } else if (kind == "prior") {
        prior = PriorFromJson(init);
        prior.sigma = prior.sigma.cwiseMax(pc.sigma_min).cwiseMin(pc.sigma_max);
      } else {
        throw ConfigError("fixture: init.kind must be 'uninformed' or 'prior'");
      }
      if (prior.mu.rows() != pc.horizon) {
        throw ConfigError("fixture: init horizon differs from planner.horizon");
      }
      Rng rng(pc.seed);
      result = Plan(start, goal, prior, pc, params, rng, mode);
    }
    return {{"format_version", kFormatVersion},
            {"kind", "plan_result"},
            {"planner", ToJson(pc)},
            {"result", ToJson(result)}};
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("fixture: ") + e.what());
  }
}

}  // namespace latentnav

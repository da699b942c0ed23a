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

#ifndef LATENTNAV_EXPERIMENT_H_
#define LATENTNAV_EXPERIMENT_H_

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "latentnav/config.h"
#include "latentnav/episode.h"
#include "latentnav/metrics.h"
#include "latentnav/serialization.h"

namespace latentnav {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kWorkersEnv = "LATENTNAV_WORKERS";

std::string Sha256Hex(const std::string& bytes);
std::string FileSha256(const std::filesystem::path& path);

struct ArtifactEntry {
  std::string path;  // relative to the run directory
  std::string sha256;
  uint64_t bytes = 0;
};

// Timing files change from run to run, so they are listed apart from the
// reproducible artifacts.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string tool_version = kToolVersion;
  std::string platform;
  std::vector<ArtifactEntry> artifacts;
  std::vector<ArtifactEntry> volatile_artifacts;
};

Json ToJson(const RunManifest& manifest);
RunManifest ManifestFromJson(const Json& j);
std::string PlatformNotes();
// Throws IoError when a listed file is missing or its checksum differs.
void VerifyManifest(const RunManifest& manifest, const std::filesystem::path& run_dir);

// Worker count from LATENTNAV_WORKERS, else the hardware concurrency.
int WorkerCount();

// Runs fn(0..count-1) on `workers` threads; rethrows the first exception.
void ParallelFor(int count, int workers, const std::function<void(int)>& fn);

// Independent 64-bit seed for (master, index, stream).
uint64_t DeriveSeed(uint64_t master, uint64_t index, uint64_t stream);

// Random start/goal/instruction per episode. The goal pose takes the heading
// the noise-free expert ends with, so the goal observation is reachable.
std::vector<EpisodeSetup> MakeEpisodeSetups(const WorldSpec& world, int count, uint64_t seed,
                                            const EpisodeConfig& config);

struct EvaluationResult {
  std::vector<PlanMode> methods;
  std::vector<EpisodeSetup> setups;
  std::vector<std::vector<EpisodeRecord>> records;  // [method][episode]
  std::vector<MethodEpisodes> metrics;
  MetricTable table;

  const std::vector<EpisodeRecord>& Records(PlanMode method) const;
};

// Every method runs on the same setups with the same per-episode RNG seed.
EvaluationResult RunEvaluation(const WorldSpec& world, const WorldModel& model,
                               const EpisodeConfig& config, std::span<const PlanMode> methods,
                               int episodes, uint64_t seed, int workers);

std::string EpisodesCsv(const EvaluationResult& result);
std::string PerEpisodeMetricsCsv(const EvaluationResult& result);
std::string TrajectoriesCsv(const EvaluationResult& result);
std::string FidelityCsv(const EvaluationResult& result, double curvature_tolerance);
std::string TimingCsv(const EvaluationResult& result);

// Iteration-0 best cost with a noise-free policy prior vs. the uninformed
// prior, one planning problem per setup.
struct WarmStartProbe {
  std::vector<double> warm_best;
  std::vector<double> uninformed_best;
  int warm_not_worse = 0;
  double fraction = 0.0;
};
WarmStartProbe ProbeIterationZero(const WorldSpec& world, const WorldModel& model,
                                  const EpisodeConfig& config,
                                  std::span<const EpisodeSetup> setups, uint64_t seed);
std::string WarmStartProbeCsv(const WarmStartProbe& probe);

struct LatencyPoint {
  int iterations = 0;
  int candidates = 0;
  double plan_ms = 0.0;  // median over problems and repeats
};
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
struct LatencySweep {
  std::vector<LatencyPoint> points;
  LinearFit fit;  // plan_ms against iterations * candidates
};

LinearFit FitLine(std::span<const double> x, std::span<const double> y);
LatencySweep RunLatencySweep(const WorldSpec& world, const WorldModel& model,
                             const EpisodeConfig& config, std::span<const int> iterations,
                             std::span<const int> candidates, int problems, uint64_t seed,
                             int repeats = 3);
std::string LatencyCsv(const LatencySweep& sweep);

struct CommandOptions {
  std::filesystem::path out;  // run directory
  std::optional<uint64_t> seed_override;
  std::optional<std::vector<PlanMode>> methods;
  bool greedy_elite = false;
  std::filesystem::path dataset;     // defaults to <out>/dataset.json
  std::filesystem::path checkpoint;  // defaults to <out>/checkpoint.json
  int workers = 1;
  std::function<void(const std::string&)> log;
};

// Applies the overrides that only touch the config.
ExperimentConfig ApplyOverrides(ExperimentConfig config, const CommandOptions& options,
                                const std::string& command);

RunManifest CmdGenerate(const ExperimentConfig& config, const CommandOptions& options);
RunManifest CmdTrain(const ExperimentConfig& config, const CommandOptions& options);
RunManifest CmdEvaluate(const ExperimentConfig& config, const CommandOptions& options);

struct GradCheckReport {
  GradientCheckResult result;
  std::string worst_tensor;
  double threshold = 1e-4;
  bool passed = false;
};
GradCheckReport CmdGradCheck(const ExperimentConfig& config, const CommandOptions& options);

// Plan fixture: start/goal latents, model, initial distribution and planner
// settings. Paths inside the fixture are relative to `base_dir`.
Json CmdPlan(const Json& fixture, const std::filesystem::path& base_dir,
             const CommandOptions& options);

}  // namespace latentnav

#endif  // LATENTNAV_EXPERIMENT_H_

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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "latentnav/config.h"
#include "latentnav/errors.h"
#include "latentnav/experiment.h"

namespace fs = std::filesystem;
using namespace latentnav;

namespace {

enum ExitCode { kOk = 0, kConfigExit = 2, kNumericExit = 3, kIoExit = 4 };

std::vector<PlanMode> ParseMethods(const std::string& list) {
  std::vector<PlanMode> methods;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) methods.push_back(ParsePlanMode(item));
  }
  if (methods.empty()) throw ConfigError("--methods: no methods given");
  return methods;
}

void PrintManifest(const RunManifest& m, const fs::path& out) {
  std::cout << m.command << ": wrote " << m.artifacts.size() + m.volatile_artifacts.size()
            << " files to " << out.string() << " (manifest_" << m.command << ".json)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy-warm-started MPPI over a learned latent world model"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::string methods;
  std::string dataset;
  std::string checkpoint;
  std::string fixture;
  uint64_t seed_override = 0;
  bool greedy = false;
  bool quiet = false;

  auto common = [&](CLI::App* cmd, bool needs_config) {
    auto* c = cmd->add_option("--config", config_path, "TOML experiment config");
    if (needs_config) c->required();
    cmd->add_option("--out", out, "run directory (default: output.dir from the config)");
    cmd->add_option("--seed-override", seed_override, "replace the seed of this command's stage");
    cmd->add_flag("--quiet", quiet, "suppress progress messages");
  };

  auto* generate = app.add_subcommand("generate", "generate the expert dataset");
  common(generate, true);

  auto* train = app.add_subcommand("train", "train the latent predictor");
  common(train, true);
  train->add_option("--dataset", dataset, "dataset file (default: <out>/dataset.json)");

  auto* evaluate = app.add_subcommand("evaluate", "run paired evaluation episodes");
  common(evaluate, true);
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint (default: <out>/checkpoint.json)");
  evaluate->add_option("--methods", methods,
                       "comma list of policy_only,uninformed_mppi,policy_scoring,warm_start_mppi");
  evaluate->add_flag("--greedy-elite", greedy, "execute the lowest-cost final elite");

  auto* plan = app.add_subcommand("plan", "plan once from a JSON fixture");
  plan->add_option("fixture", fixture, "plan fixture JSON")->required();
  plan->add_option("--out", out, "write the result here instead of stdout");
  plan->add_option("--seed-override", seed_override, "replace the planner seed");
  plan->add_flag("--greedy-elite", greedy, "execute the lowest-cost final elite");

  auto* grad = app.add_subcommand("grad-check", "finite-difference check of the loss gradient");
  common(grad, true);
  grad->add_option("--dataset", dataset, "dataset file (default: generated in memory)");
  grad->add_option("--checkpoint", checkpoint, "check at these weights instead of the init");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigExit;
  }

  CommandOptions options;
  options.dataset = dataset;
  options.checkpoint = checkpoint;
  options.greedy_elite = greedy;
  if (!quiet) options.log = [](const std::string& msg) { std::cerr << msg << "\n"; };

  try {
    CLI::App* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    if (cmd->count("--seed-override") > 0) options.seed_override = seed_override;
    if (!methods.empty()) options.methods = ParseMethods(methods);

    if (name == "plan") {
      const fs::path path(fixture);
      if (!fs::exists(path)) throw IoError("fixture not found: " + fixture);
      const Json result = CmdPlan(ReadJsonFile(path), path.parent_path(), options);
      if (out.empty()) {
        std::cout << result.dump(2) << "\n";
      } else {
        WriteJsonFile(out, result);
      }
      return kOk;
    }

    options.out = out;
    ExperimentConfig config = ApplyOverrides(LoadConfig(config_path), options, name);
    options.out = config.output_dir;
    options.workers = WorkerCount();

    if (name == "generate") {
      PrintManifest(CmdGenerate(config, options), options.out);
    } else if (name == "train") {
      PrintManifest(CmdTrain(config, options), options.out);
    } else if (name == "evaluate") {
      PrintManifest(CmdEvaluate(config, options), options.out);
    } else if (name == "grad-check") {
      const GradCheckReport report = CmdGradCheck(config, options);
      std::cout << "grad-check: max relative error " << report.result.max_relative_error
                << " over " << report.result.checked << " weights (worst "
                << report.worst_tensor << "), threshold " << report.threshold << ": "
                << (report.passed ? "PASS" : "FAIL") << "\n";
      return report.passed ? kOk : kNumericExit;
    }
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumericExit;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIoExit;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIoExit;
  }
}

// Copyright 2026 The FGRL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fgrl/fgrl.h"
#include "json.hpp"

namespace {

using nlohmann::json;

struct SharedFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> variant;
  std::optional<int> limbs;
  std::optional<int> generations;
  std::optional<int> popsize;
  std::optional<double> sigma0;
  std::optional<int> episodes_per_candidate;
  int parallel = 1;
  bool strict_actions = false;
  std::optional<std::string> pairing;
  std::optional<std::string> morphology;
};

void add_shared(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Experiment seed");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--variant", f.variant, "Policy variant")
      ->check(CLI::IsMember({"feudgraph", "feuddeepset", "deepsetmlp"}));
  cmd->add_option("--limbs", f.limbs, "Number of snake limbs")->check(CLI::Range(1, 16));
  cmd->add_option("--generations", f.generations, "CMA-ES generations");
  cmd->add_option("--popsize", f.popsize, "Population size per CMA-ES instance");
  cmd->add_option("--sigma0", f.sigma0, "Initial CMA-ES step size");
  cmd->add_option("--episodes-per-candidate", f.episodes_per_candidate, "Episodes averaged per candidate");
  cmd->add_option("--parallel", f.parallel, "Evaluation threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--strict-actions", f.strict_actions, "Reject out-of-range actions instead of clamping");
  cmd->add_option("--pairing", f.pairing, "Manager/worker candidate pairing")
      ->check(CLI::IsMember({"index-aligned", "random-seeded"}));
  cmd->add_option("--morphology", f.morphology, "Morphology JSON file")->check(CLI::ExistingFile);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

json experiment_config(const SharedFlags& f) {
  json cfg = f.config_path.empty() ? json::object() : read_json_file(f.config_path);
  if (f.seed) cfg["seed"] = *f.seed;
  if (f.variant) cfg["policy"]["variant"] = *f.variant;
  if (f.limbs) cfg["env"]["limb_count"] = *f.limbs;
  if (f.generations) cfg["generations"] = *f.generations;
  if (f.popsize) cfg["popsize"] = *f.popsize;
  if (f.sigma0) cfg["sigma0"] = *f.sigma0;
  if (f.episodes_per_candidate) cfg["episodes_per_candidate"] = *f.episodes_per_candidate;
  if (f.strict_actions) cfg["env"]["strict_actions"] = true;
  if (f.pairing) cfg["pairing"] = *f.pairing;
  if (f.morphology) cfg["morphology"] = *f.morphology;
  return cfg;
}

int run(fgrl_status (*fn)(const char*, char**), const json& request) {
  char* result = nullptr;
  const fgrl_status status = fn(request.dump().c_str(), &result);
  if (status != FGRL_OK) {
    std::fprintf(stderr, "error: %s\n", fgrl_last_error());
    return static_cast<int>(status);
  }
  std::cout << json::parse(result).dump(2) << "\n";
  fgrl_string_free(result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feudal graph policies trained with CMA-ES on a planar snake"};
  app.set_version_flag("--version", fgrl_version());
  app.require_subcommand(1);

  SharedFlags train_flags, eval_flags, transfer_flags, search_flags, plot_flags;

  auto* train = app.add_subcommand("train", "Train a policy and write records.csv and checkpoint.json");
  add_shared(train, train_flags);
  std::optional<int> stop_after;
  bool fresh = false, quiet = false;
  train->add_option("--stop-after", stop_after, "Stop after this many generations (resumable)");
  train->add_flag("--fresh", fresh, "Ignore an existing checkpoint in --out");
  train->add_flag("--quiet", quiet, "No per-generation log");

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint or the random-action baseline");
  add_shared(evaluate, eval_flags);
  std::string eval_checkpoint, trajectory;
  int eval_episodes = 100;
  bool use_mean = false, random_baseline = false, best_seeds = false, summary_only = false;
  evaluate->add_option("--checkpoint", eval_checkpoint, "checkpoint.json or its run directory");
  evaluate->add_option("--episodes", eval_episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
  evaluate->add_option("--trajectory", trajectory, "Write the first episode's trajectory CSV here");
  evaluate->add_flag("--use-mean", use_mean, "Evaluate the CMA-ES means instead of the best pair");
  evaluate->add_flag("--random-baseline", random_baseline, "Evaluate uniformly random actions");
  evaluate->add_flag("--best-seeds", best_seeds, "Replay the seeds of the best training evaluation");
  evaluate->add_flag("--summary", summary_only, "Omit per-episode results");

  auto* transfer = app.add_subcommand("transfer", "Cross-morphology transfer matrix");
  add_shared(transfer, transfer_flags);
  std::vector<std::string> checkpoints;
  std::vector<int> train_limbs, test_limbs{3, 4, 5, 6, 7};
  int transfer_episodes = 100;
  transfer->add_option("--checkpoints", checkpoints, "Checkpoints or run directories")->required();
  transfer->add_option("--train-limbs", train_limbs, "Row order (default: checkpoint order)");
  transfer->add_option("--test-limbs", test_limbs, "Column limb counts");
  transfer->add_option("--episodes", transfer_episodes, "Episodes per cell")->check(CLI::PositiveNumber);

  auto* search = app.add_subcommand("search", "Random search over sigma0 and hidden width");
  add_shared(search, search_flags);
  int budget = 10;
  std::optional<double> sigma_min, sigma_max;
  std::vector<int> widths;
  search->add_option("--budget", budget, "Number of trials")->check(CLI::PositiveNumber);
  search->add_option("--sigma-min", sigma_min, "Lower bound for sigma0");
  search->add_option("--sigma-max", sigma_max, "Upper bound for sigma0");
  search->add_option("--widths", widths, "Candidate hidden widths");

  auto* plot = app.add_subcommand("plot", "Smoothed learning curve from records.csv");
  add_shared(plot, plot_flags);
  std::string records;
  int window = 12;
  plot->add_option("--records", records, "records.csv or its run directory")->required();
  plot->add_option("--window", window, "Running-mean window")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      json req{{"config", experiment_config(train_flags)},
               {"out", train_flags.out.empty() ? std::string("run") : train_flags.out},
               {"parallel", train_flags.parallel},
               {"resume", !fresh},
               {"log", !quiet}};
      if (stop_after) req["stop_after"] = *stop_after;
      return run(fgrl_train, req);
    }
    if (*evaluate) {
      json req{{"episodes", eval_episodes}, {"parallel", eval_flags.parallel}, {"per_episode", !summary_only}};
      if (eval_flags.limbs) req["limbs"] = *eval_flags.limbs;
      if (random_baseline) {
        const json cfg = experiment_config(eval_flags);
        req["random_baseline"] = true;
        req["env"] = cfg.value("env", json::object());
        req["seed"] = cfg.value("seed", std::uint64_t{0});
      } else {
        req["checkpoint"] = eval_checkpoint.empty() ? eval_flags.out : eval_checkpoint;
        req["out"] = eval_checkpoint.empty() ? std::string() : eval_flags.out;
        req["trajectory"] = trajectory;
        req["use_mean"] = use_mean;
        req["best_seeds"] = best_seeds;
      }
      return run(fgrl_evaluate, req);
    }
    if (*transfer) {
      return run(fgrl_transfer, {{"checkpoints", checkpoints},
                                 {"train_limbs", train_limbs},
                                 {"test_limbs", test_limbs},
                                 {"episodes", transfer_episodes},
                                 {"parallel", transfer_flags.parallel},
                                 {"out", transfer_flags.out}});
    }
    if (*search) {
      json req{{"config", experiment_config(search_flags)},
               {"budget", budget},
               {"seed", search_flags.seed.value_or(0)},
               {"out", search_flags.out},
               {"parallel", search_flags.parallel}};
      if (sigma_min) req["sigma_min"] = *sigma_min;
      if (sigma_max) req["sigma_max"] = *sigma_max;
      if (!widths.empty()) req["widths"] = widths;
      return run(fgrl_search, req);
    }
    json req{{"records", records}, {"window", window}};
    if (!plot_flags.out.empty()) req["out"] = plot_flags.out;
    return run(fgrl_plot, req);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

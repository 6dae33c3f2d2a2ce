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
#include <cmath>
#include <filesystem>
#include <random>

#include "fgrl/error.hpp"
#include "fgrl/harness.hpp"
#include "parallel.hpp"

namespace fgrl {
namespace {

void summarize(EvaluationResult& r) {
  const double n = static_cast<double>(r.episodes.size());
  if (r.episodes.empty()) return;
  double sum_m = 0.0, sum_w = 0.0;
  for (const auto& e : r.episodes) {
    sum_m += e.manager_return;
    sum_w += e.worker_return;
  }
  r.mean_manager_return = sum_m / n;
  r.mean_worker_return = sum_w / n;
  double var = 0.0;
  for (const auto& e : r.episodes) var += (e.manager_return - r.mean_manager_return) * (e.manager_return - r.mean_manager_return);
  r.std_manager_return = r.episodes.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  r.stderr_manager_return = r.std_manager_return / std::sqrt(n);
}

std::vector<std::uint64_t> resolve_seeds(const std::vector<std::uint64_t>& given, int episodes) {
  if (!given.empty()) return given;
  if (episodes < 1) throw Error(ErrorCode::kInvalidArgument, "episodes must be >= 1");
  std::vector<std::uint64_t> seeds(episodes);
  for (int k = 0; k < episodes; ++k) seeds[k] = evaluation_seed(k);
  return seeds;
}

}  // namespace

EvaluationResult evaluate(const Checkpoint& ckpt, const EvaluationOptions& options) {
  const ExperimentConfig& cfg = ckpt.config;
  const int train_limbs = cfg.env.limb_count;
  const int test_limbs = options.limbs > 0 ? options.limbs : train_limbs;

  SnakeConfig env = cfg.env;
  env.limb_count = test_limbs;
  env.validate();
  const Morphology morph = test_limbs == train_limbs ? cfg.resolved_morphology()
                                                     : Morphology{make_morphology(test_limbs), {}};
  const FeudalPolicy policy(cfg.policy, morph.hierarchy());

  const bool use_best = !options.use_mean && ckpt.best_generation >= 0;
  ParamVector manager = use_best ? ckpt.best_manager : (ckpt.manager_es ? ckpt.manager_es->mean() : ParamVector{});
  ParamVector worker = use_best ? ckpt.best_worker : (ckpt.worker_es ? ckpt.worker_es->mean() : ParamVector{});
  if (manager.size() != policy.layout().manager_size() || worker.size() != policy.layout().worker_size()) {
    throw Error(ErrorCode::kIncompatibleCheckpoint,
                "checkpoint parameters (" + std::to_string(manager.size()) + ", " + std::to_string(worker.size()) +
                    ") do not fit the " + std::to_string(test_limbs) + "-limb policy (" +
                    std::to_string(policy.layout().manager_size()) + ", " +
                    std::to_string(policy.layout().worker_size()) + ")");
  }

  EvaluationResult result;
  result.train_limbs = train_limbs;
  result.test_limbs = test_limbs;
  const std::vector<std::uint64_t> seeds = resolve_seeds(options.seeds, options.episodes);
  result.episodes.resize(seeds.size());
  std::vector<StepTrace> trace;
  internal::parallel_for(static_cast<int>(seeds.size()), options.parallel, [&](int k) {
    const bool record = k == 0 && !options.trajectory_path.empty();
    EpisodeResult r = run_episode(env, policy, manager, worker, seeds[k], record);
    result.episodes[k] = EpisodeSummary{seeds[k], r.manager_return, r.worker_return, r.steps, r.crashed};
    if (record) trace = std::move(r.trace);
  });
  summarize(result);

  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    write_eval_csv((std::filesystem::path(options.out_dir) / "eval.csv").string(), ckpt.hash, result);
  }
  if (!options.trajectory_path.empty()) write_trajectory_csv(options.trajectory_path, ckpt.hash, trace);
  return result;
}

EvaluationResult evaluate_random_policy(const SnakeConfig& env_cfg, int episodes, std::uint64_t action_seed,
                                        int parallel) {
  env_cfg.validate();
  const MorphGraph graph = make_morphology(env_cfg.limb_count);
  const std::vector<std::uint64_t> seeds = resolve_seeds({}, episodes);
  EvaluationResult result;
  result.train_limbs = result.test_limbs = env_cfg.limb_count;
  result.episodes.resize(seeds.size());
  internal::parallel_for(episodes, parallel, [&](int k) {
    SnakeEnv env(env_cfg, graph);
    env.reset(seeds[k]);
    std::mt19937_64 rng(derive_seed(action_seed, {static_cast<std::uint64_t>(k)}));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> actions(graph.actuator_count());
    EpisodeSummary s{seeds[k], 0.0, 0.0, 0, false};
    for (;;) {
      for (double& a : actions) a = u(rng);
      const StepResult r = env.step(actions);
      if (r.crashed) {
        s.crashed = true;
        break;
      }
      s.manager_return += r.reward;
      ++s.steps;
      if (r.done) break;
    }
    result.episodes[k] = s;
  });
  summarize(result);
  return result;
}

TransferMatrix transfer_matrix(const std::vector<Checkpoint>& checkpoints, const std::vector<int>& train_limbs,
                               const std::vector<int>& test_limbs, int episodes, int parallel) {
  TransferMatrix m;
  m.train_limbs = train_limbs;
  m.test_limbs = test_limbs;
  for (int train : train_limbs) {
    const Checkpoint* found = nullptr;
    for (const auto& c : checkpoints) {
      if (c.config.env.limb_count == train) {
        found = &c;
        break;
      }
    }
    if (!found) throw Error(ErrorCode::kMissingCheckpoint, "no checkpoint trained on " + std::to_string(train) + " limbs");
    std::vector<double> row;
    std::vector<int> counts;
    for (int test : test_limbs) {
      EvaluationOptions opts;
      opts.limbs = test;
      opts.episodes = episodes;
      opts.parallel = parallel;
      const EvaluationResult r = evaluate(*found, opts);
      row.push_back(r.mean_manager_return);
      counts.push_back(static_cast<int>(r.episodes.size()));
    }
    m.mean.push_back(std::move(row));
    m.episodes.push_back(std::move(counts));
  }
  return m;
}

}  // namespace fgrl

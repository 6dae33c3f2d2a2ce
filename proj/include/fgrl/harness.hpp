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
#ifndef FGRL_HARNESS_HPP_
#define FGRL_HARNESS_HPP_

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "fgrl/cmaes.hpp"
#include "fgrl/graph.hpp"
#include "fgrl/policy.hpp"
#include "fgrl/snake_env.hpp"
#include "json.hpp"

namespace fgrl {

inline constexpr const char* kVersion = "0.1.0";

/// splitmix64-based seed derivation; distinct paths give independent streams.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

/// Fixed seeds shared by every evaluation so that cells are comparable.
std::uint64_t evaluation_seed(int episode);

enum class Pairing { kIndexAligned, kRandomSeeded };

struct ExperimentConfig {
  SnakeConfig env;
  PolicyConfig policy = PolicyConfig::for_observation(kLimbStateDim, kLimbFeatureDim);
  std::optional<Morphology> morphology;  // default: chain of env.limb_count, two levels
  int generations = 300;
  int popsize = 16;
  std::optional<int> manager_popsize;
  std::optional<int> worker_popsize;
  int episodes_per_candidate = 1;
  std::uint64_t seed = 0;
  double sigma0_manager = 0.1;
  double sigma0_worker = 0.1;
  Pairing pairing = Pairing::kIndexAligned;
  int checkpoint_every = 10;

  /// Throws kInvalidConfig when anything is dimension-inconsistent.
  void validate() const;
  Morphology resolved_morphology() const;
};

nlohmann::json to_json(const SnakeConfig& cfg);
nlohmann::json to_json(const PolicyConfig& cfg);
nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults.
SnakeConfig snake_config_from_json(const nlohmann::json& doc, SnakeConfig base = {});
PolicyConfig policy_config_from_json(const nlohmann::json& doc, PolicyConfig base = PolicyConfig::for_observation(kLimbStateDim, kLimbFeatureDim));
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc, ExperimentConfig base = {});
/// 16 hex digits (FNV-1a over the canonical JSON dump).
std::string config_hash(const ExperimentConfig& cfg);

struct StepTrace {
  int step = 0;
  Matrix observation;
  GoalSet goals;
  std::vector<double> actions;
  double env_reward = 0.0;
  std::vector<double> worker_rewards;
  Eigen::Vector2d com = Eigen::Vector2d::Zero();  // after the step
  std::vector<double> angles;
  std::vector<double> angular_velocities;
};

struct EpisodeResult {
  double manager_return = 0.0;  // R_M
  double worker_return = 0.0;   // R_W
  std::vector<double> level_returns;
  int steps = 0;
  bool crashed = false;
  std::vector<StepTrace> trace;
};

/// One episode of the feudal control loop: observe, represent, propagate,
/// set goals, act, step the environment, score workers against their goals.
/// A crash ends the episode; the crashing step contributes no reward.
EpisodeResult run_episode(const SnakeConfig& env_cfg, const FeudalPolicy& policy, std::span<const double> manager,
                          std::span<const double> worker, std::uint64_t seed, bool record_trace = false);

struct GenerationRecord {
  int generation = 0;
  std::uint64_t evaluations = 0;
  double best_manager_return = 0.0;
  double mean_manager_return = 0.0;
  double std_manager_return = 0.0;
  double best_worker_return = 0.0;
  double mean_worker_return = 0.0;
  double wall_seconds = 0.0;  // never written to records.csv
};

struct Checkpoint {
  ExperimentConfig config;
  std::string hash;
  int generations_done = 0;
  std::uint64_t evaluations = 0;
  std::optional<Cmaes> manager_es;
  std::optional<Cmaes> worker_es;
  ParamVector best_manager;
  ParamVector best_worker;
  double best_return = 0.0;
  int best_generation = -1;
  std::vector<std::uint64_t> best_seeds;
  std::vector<GenerationRecord> records;
};

nlohmann::json to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
/// Throws kMissingCheckpoint when the file is absent.
Checkpoint load_checkpoint(const std::string& path);

struct TrainOptions {
  std::string out_dir;              // empty: keep everything in memory
  int parallel = 1;                 // evaluation threads; results do not depend on it
  std::optional<int> stop_after;    // stop once this many generations are done
  bool resume = true;               // continue from out_dir/checkpoint.json if present
  bool log_progress = false;
  /// Replaces the episode evaluation (tests use it to inspect fitness plumbing).
  std::function<EpisodeResult(std::span<const double>, std::span<const double>, std::uint64_t)> evaluator;
};

struct TrainResult {
  Checkpoint checkpoint;
  bool completed = false;
};

/// Two cooperating CMA-ES instances: the manager instance minimizes -R_M and
/// the worker instance minimizes -R_W, evaluated on paired candidates.
TrainResult train(const ExperimentConfig& cfg, const TrainOptions& options = {});

struct EpisodeSummary {
  std::uint64_t seed = 0;
  double manager_return = 0.0;
  double worker_return = 0.0;
  int steps = 0;
  bool crashed = false;
};

struct EvaluationResult {
  int train_limbs = 0;
  int test_limbs = 0;
  std::vector<EpisodeSummary> episodes;
  double mean_manager_return = 0.0;
  double std_manager_return = 0.0;
  double stderr_manager_return = 0.0;
  double mean_worker_return = 0.0;
};

struct EvaluationOptions {
  int limbs = 0;  // 0: training morphology
  int episodes = 100;
  int parallel = 1;
  bool use_mean = false;  // evaluate the CMA-ES means instead of the best pair
  std::vector<std::uint64_t> seeds;  // overrides evaluation_seed(k)
  std::string out_dir;               // writes eval.csv when set
  std::string trajectory_path;       // dumps episode 0 when set
};

/// Throws kIncompatibleCheckpoint if the policy does not fit the morphology.
EvaluationResult evaluate(const Checkpoint& ckpt, const EvaluationOptions& options = {});

/// Uniformly random actions in [-1, 1], same evaluation seeds for resets.
EvaluationResult evaluate_random_policy(const SnakeConfig& env_cfg, int episodes, std::uint64_t action_seed,
                                        int parallel = 1);

struct TransferMatrix {
  std::vector<int> train_limbs;
  std::vector<int> test_limbs;
  std::vector<std::vector<double>> mean;       // [train][test]
  std::vector<std::vector<int>> episodes;      // episodes averaged per cell
};

/// Throws kMissingCheckpoint if some train limb count has no checkpoint.
TransferMatrix transfer_matrix(const std::vector<Checkpoint>& checkpoints, const std::vector<int>& train_limbs,
                               const std::vector<int>& test_limbs, int episodes = 100, int parallel = 1);

struct SearchSpace {
  double sigma_min = 0.01;
  double sigma_max = 0.5;
  std::vector<int> widths{8, 16, 32};
};

struct SearchTrial {
  int index = 0;
  std::uint64_t seed = 0;
  double sigma0 = 0.0;
  int width = 0;
  double best_return = 0.0;
  double final_mean_return = 0.0;
};

/// Samples (sigma0, width) uniformly, runs a short train() per trial and
/// ranks by best R_M (descending). Appends every trial to
/// out_dir/search_ledger.csv when out_dir is set.
std::vector<SearchTrial> random_search(const SearchSpace& space, int budget, const ExperimentConfig& base,
                                       std::uint64_t search_seed, const std::string& out_dir = {},
                                       int parallel = 1);
/// The (sigma0, width, seed) of trial `index`; independent of budget.
SearchTrial sample_trial(const SearchSpace& space, std::uint64_t search_seed, int index);

// Exports. Every CSV starts with "# fgrl <version> config_hash=<hash>".
std::string provenance_line(const std::string& hash);
void write_records_csv(const std::string& path, const std::string& hash, const std::vector<GenerationRecord>& records);
std::vector<GenerationRecord> read_records_csv(const std::string& path);
void write_eval_csv(const std::string& path, const std::string& hash, const EvaluationResult& result);
void write_trajectory_csv(const std::string& path, const std::string& hash, const std::vector<StepTrace>& trace);
void write_transfer_csv(const std::string& path, const std::string& hash, const TransferMatrix& matrix);
void write_transfer_html(const std::string& path, const std::string& hash, const TransferMatrix& matrix);
/// Row-wise white (min) to blue (max) colour scale, components in [0, 1].
std::vector<std::vector<double>> transfer_row_shades(const TransferMatrix& matrix);
/// Trailing running mean over `window` entries (shorter at the start).
std::vector<double> running_mean(const std::vector<double>& values, int window);
/// Writes <out_dir>/records_smoothed.csv and <out_dir>/learning_curve.svg.
void export_plot(const std::string& records_path, const std::string& out_dir, int window = 12);

}  // namespace fgrl

#endif  // FGRL_HARNESS_HPP_

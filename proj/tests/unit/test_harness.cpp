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
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fgrl/harness.hpp"
#include "oracles/control_loop_oracle.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

using fgrl::ErrorCode;
using Vec = std::vector<double>;

class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(fs::temp_directory_path() / ("fgrl_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string str(const std::string& child = {}) const { return (child.empty() ? path_ : path_ / child).string(); }

 private:
  fs::path path_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::string& path) {
  const std::string text = read_file(path);
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

fgrl::ExperimentConfig small_config(int limbs = 3, int generations = 3, int popsize = 6) {
  fgrl::ExperimentConfig cfg;
  cfg.env.limb_count = limbs;
  cfg.env.max_steps = 15;
  cfg.generations = generations;
  cfg.popsize = popsize;
  cfg.seed = 17;
  cfg.checkpoint_every = 1;
  return cfg;
}

fgrl::EvaluationOptions eval_options(int episodes, int limbs = 0) {
  fgrl::EvaluationOptions opts;
  opts.episodes = episodes;
  opts.limbs = limbs;
  return opts;
}

fgrl::FeudalPolicy policy_for(const fgrl::ExperimentConfig& cfg) {
  return fgrl::FeudalPolicy(cfg.policy, cfg.resolved_morphology().hierarchy());
}

}  // namespace

TEST_CASE("seed derivation") {
  CHECK(fgrl::derive_seed(1, {2, 3}) == fgrl::derive_seed(1, {2, 3}));
  CHECK(fgrl::derive_seed(1, {2, 3}) != fgrl::derive_seed(1, {3, 2}));
  CHECK(fgrl::derive_seed(1, {2}) != fgrl::derive_seed(2, {2}));
  CHECK(fgrl::derive_seed(1, {2}) != fgrl::derive_seed(1, {2, 0}));
  CHECK(fgrl::evaluation_seed(0) != fgrl::evaluation_seed(1));
  CHECK(fgrl::evaluation_seed(5) == fgrl::evaluation_seed(5));
}

TEST_CASE("experiment config JSON and hash") {
  auto cfg = small_config();
  cfg.policy.variant = fgrl::Variant::kFeudDeepSet;
  cfg.pairing = fgrl::Pairing::kRandomSeeded;
  cfg.worker_popsize = 8;
  const auto doc = fgrl::to_json(cfg);
  const auto back = fgrl::experiment_config_from_json(nlohmann::json::parse(doc.dump()));
  CHECK(fgrl::to_json(back) == doc);
  CHECK(fgrl::config_hash(back) == fgrl::config_hash(cfg));
  CHECK(fgrl::config_hash(cfg).size() == 16);
  auto other = cfg;
  other.seed += 1;
  CHECK(fgrl::config_hash(other) != fgrl::config_hash(cfg));

  const auto partial = fgrl::experiment_config_from_json(nlohmann::json::parse(R"({"generations": 7, "sigma0": 0.3})"));
  CHECK(partial.generations == 7);
  CHECK(partial.sigma0_manager == 0.3);
  CHECK(partial.sigma0_worker == 0.3);
  CHECK(partial.popsize == 16);
  CHECK(partial.env.limb_count == 5);
  CHECK_ERROR_CODE(fgrl::experiment_config_from_json(nlohmann::json::parse(R"({"pairing": "sideways"})")),
                   ErrorCode::kInvalidConfig);
}

TEST_CASE("experiment config validation") {
  auto cfg = small_config();
  cfg.generations = 0;
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::kInvalidConfig);
  cfg = small_config();
  cfg.episodes_per_candidate = 0;
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::kInvalidConfig);
  cfg = small_config();
  cfg.popsize = 1;
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::kInvalidConfig);
  cfg = small_config();
  cfg.sigma0_worker = 0.0;
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::kInvalidConfig);
  cfg = small_config();
  cfg.policy = fgrl::PolicyConfig::for_observation(4, 1);
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::kInvalidConfig);
  cfg = small_config(3);
  cfg.morphology = fgrl::Morphology{fgrl::make_morphology(4), {}};
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::kInvalidConfig);
  cfg = small_config(3);
  cfg.morphology = fgrl::Morphology{fgrl::build_morph_graph(3, std::vector<fgrl::NodePair>{{0, 1}, {1, 2}}, {true, true, true}, 0), {}};
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::kInvalidConfig);
}

TEST_CASE("zero parameters on a straight chain") {
  fgrl::SnakeConfig env;
  env.zero_perturbation = true;
  auto cfg = small_config(5);
  cfg.env = env;
  const auto policy = policy_for(cfg);
  const Vec manager(policy.layout().manager_size(), 0.0), worker(policy.layout().worker_size(), 0.0);
  const auto r = fgrl::run_episode(env, policy, manager, worker, 123);
  CHECK(r.manager_return == 0.0);
  CHECK(r.worker_return == 1000.0);
  CHECK(r.steps == 1000);
  CHECK_FALSE(r.crashed);
}

TEST_CASE("episodes are deterministic and match the control-loop oracle") {
  std::mt19937_64 rng(1);
  auto cfg = small_config(3);
  cfg.env.max_steps = 10;
  const auto policy = policy_for(cfg);
  for (int trial = 0; trial < 10; ++trial) {
    const auto manager = testing::random_vector(rng, policy.layout().manager_size(), 0.5);
    const auto worker = testing::random_vector(rng, policy.layout().worker_size(), 0.5);
    const auto a = fgrl::run_episode(cfg.env, policy, manager, worker, 1000 + trial);
    const auto b = fgrl::run_episode(cfg.env, policy, manager, worker, 1000 + trial, true);
    CHECK(testing::bit_equal(a.manager_return, b.manager_return));
    CHECK(testing::bit_equal(a.worker_return, b.worker_return));
    const auto o = oracle::run_control_loop(cfg.env, manager, worker, 1000 + trial);
    CHECK(o.steps == a.steps);
    CHECK(testing::bit_equal(a.manager_return, o.manager));
    CHECK(testing::bit_equal(a.worker_return, o.worker));

    REQUIRE(b.trace.size() == 10);
    double total = 0.0;
    for (const auto& t : b.trace) {
      total += t.env_reward;
      CHECK(t.actions.size() == 2);
      CHECK(t.goals.size() == 3);
      CHECK(t.worker_rewards.size() == 3);
      CHECK(t.angles.size() == 3);
      for (double r : t.worker_rewards) {
        CHECK(r >= 0.0);
        CHECK(r <= 2.0);
      }
    }
    CHECK(total == b.manager_return);
  }
}

TEST_CASE("one generation of six candidates runs six episodes") {
  auto cfg = small_config(3, 1, 6);
  std::atomic<int> calls{0};
  fgrl::TrainOptions opts;
  opts.evaluator = [&](std::span<const double>, std::span<const double>, std::uint64_t) {
    ++calls;
    return fgrl::EpisodeResult{};
  };
  const auto result = fgrl::train(cfg, opts);
  CHECK(calls == 6);
  CHECK(result.completed);
  CHECK(result.checkpoint.manager_es->generation() == 1);
  CHECK(result.checkpoint.worker_es->generation() == 1);
  CHECK(result.checkpoint.evaluations == 6);
  REQUIRE(result.checkpoint.records.size() == 1);
  CHECK(result.checkpoint.records[0].evaluations == 6);

  cfg.episodes_per_candidate = 3;
  calls = 0;
  fgrl::train(cfg, opts);
  CHECK(calls == 18);
}

TEST_CASE("each instance maximizes its own return") {
  auto cfg = small_config(3, 40, 8);
  cfg.sigma0_manager = cfg.sigma0_worker = 0.5;
  fgrl::TrainOptions opts;
  opts.evaluator = [](std::span<const double> m, std::span<const double> w, std::uint64_t) {
    fgrl::EpisodeResult r;
    r.manager_return = m[0];
    r.worker_return = -w[0];
    return r;
  };
  const auto result = fgrl::train(cfg, opts);
  const auto& ckpt = result.checkpoint;
  CHECK(ckpt.manager_es->mean()[0] > 3.0);
  CHECK(ckpt.worker_es->mean()[0] < -3.0);
  CHECK(ckpt.best_return == ckpt.best_manager[0]);
  double best_record = -INFINITY;
  for (const auto& rec : ckpt.records) {
    best_record = std::max(best_record, rec.best_manager_return);
    CHECK(rec.mean_manager_return <= rec.best_manager_return);
    CHECK(rec.std_manager_return >= 0.0);
  }
  CHECK(best_record == ckpt.best_return);
  for (std::size_t g = 1; g < ckpt.records.size(); ++g) CHECK(ckpt.records[g].evaluations > ckpt.records[g - 1].evaluations);
}

TEST_CASE("mismatched population sizes pair modulo the smaller one") {
  auto cfg = small_config(3, 2, 6);
  cfg.worker_popsize = 4;
  std::atomic<int> calls{0};
  fgrl::TrainOptions opts;
  opts.evaluator = [&](std::span<const double>, std::span<const double>, std::uint64_t) {
    ++calls;
    return fgrl::EpisodeResult{};
  };
  const auto result = fgrl::train(cfg, opts);
  CHECK(calls == 12);
  CHECK(result.checkpoint.worker_es->popsize() == 4);
  CHECK(result.checkpoint.worker_es->generation() == 2);
}

TEST_CASE("DeepSetMLP trains a single instance") {
  auto cfg = small_config(3, 2, 6);
  cfg.policy = fgrl::PolicyConfig::for_observation(5, 1, fgrl::Variant::kDeepSetMlp);
  const auto result = fgrl::train(cfg);
  CHECK(result.completed);
  CHECK_FALSE(result.checkpoint.worker_es.has_value());
  CHECK(result.checkpoint.manager_es->dim() == static_cast<int>(policy_for(cfg).layout().manager_size()));
  CHECK(result.checkpoint.best_worker.empty());
  for (const auto& rec : result.checkpoint.records) CHECK(rec.mean_worker_return == 0.0);
  const auto eval = fgrl::evaluate(result.checkpoint, eval_options(3));
  CHECK(eval.episodes.size() == 3);
}

TEST_CASE("results do not depend on the number of threads") {
  TempDir one("par1"), three("par3");
  auto cfg = small_config(4, 3, 6);
  cfg.episodes_per_candidate = 2;
  fgrl::TrainOptions a, b;
  a.out_dir = one.str();
  b.out_dir = three.str();
  b.parallel = 3;
  const auto ra = fgrl::train(cfg, a), rb = fgrl::train(cfg, b);
  CHECK(read_file(one.str("records.csv")) == read_file(three.str("records.csv")));
  CHECK(ra.checkpoint.manager_es->to_json() == rb.checkpoint.manager_es->to_json());
  CHECK(ra.checkpoint.worker_es->to_json() == rb.checkpoint.worker_es->to_json());
  CHECK(ra.checkpoint.best_manager == rb.checkpoint.best_manager);
}

TEST_CASE("random-seeded pairing is deterministic and differs from index pairing") {
  auto cfg = small_config(3, 2, 6);
  const auto aligned = fgrl::train(cfg);
  cfg.pairing = fgrl::Pairing::kRandomSeeded;
  const auto r1 = fgrl::train(cfg), r2 = fgrl::train(cfg);
  CHECK(r1.checkpoint.worker_es->to_json() == r2.checkpoint.worker_es->to_json());
  CHECK(r1.checkpoint.worker_es->to_json() != aligned.checkpoint.worker_es->to_json());
}

TEST_CASE("an interrupted run resumes to the same records") {
  TempDir full("full"), split("split");
  const auto cfg = small_config(3, 6, 6);
  fgrl::TrainOptions a;
  a.out_dir = full.str();
  const auto whole = fgrl::train(cfg, a);

  fgrl::TrainOptions b;
  b.out_dir = split.str();
  b.stop_after = 3;
  const auto first = fgrl::train(cfg, b);
  CHECK_FALSE(first.completed);
  CHECK(first.checkpoint.generations_done == 3);
  CHECK(fs::exists(split.str("checkpoint.json")));
  b.stop_after.reset();
  const auto second = fgrl::train(cfg, b);
  CHECK(second.completed);
  CHECK(read_file(full.str("records.csv")) == read_file(split.str("records.csv")));
  CHECK(whole.checkpoint.manager_es->to_json() == second.checkpoint.manager_es->to_json());
  CHECK(whole.checkpoint.best_manager == second.checkpoint.best_manager);
  CHECK(read_file(full.str("records.csv")).rfind("# fgrl 0.1.0 config_hash=" + fgrl::config_hash(cfg), 0) == 0);
  CHECK(fs::exists(full.str("timing.csv")));

  auto other = cfg;
  other.seed += 1;
  CHECK_ERROR_CODE(fgrl::train(other, b), ErrorCode::kIncompatibleCheckpoint);
  b.resume = false;
  CHECK(fgrl::train(other, b).completed);
}

TEST_CASE("checkpoint files round trip") {
  TempDir dir("ckpt");
  const auto result = fgrl::train(small_config(3, 2, 6));
  fgrl::save_checkpoint(dir.str("c.json"), result.checkpoint);
  const auto back = fgrl::load_checkpoint(dir.str("c.json"));
  CHECK(fgrl::to_json(back) == fgrl::to_json(result.checkpoint));
  CHECK_ERROR_CODE(fgrl::load_checkpoint(dir.str("missing.json")), ErrorCode::kMissingCheckpoint);
  std::ofstream(dir.str("bad.json")) << "{ nope";
  CHECK_ERROR_CODE(fgrl::load_checkpoint(dir.str("bad.json")), ErrorCode::kParse);
  auto doc = fgrl::to_json(result.checkpoint);
  doc["config_hash"] = "0000000000000000";
  CHECK_ERROR_CODE(fgrl::checkpoint_from_json(doc), ErrorCode::kIncompatibleCheckpoint);
}

TEST_CASE("evaluation on the training seeds reproduces the best return") {
  auto cfg = small_config(3, 3, 6);
  cfg.episodes_per_candidate = 2;
  const auto result = fgrl::train(cfg);
  const auto& ckpt = result.checkpoint;
  REQUIRE(ckpt.best_seeds.size() == 2);
  auto seeded = eval_options(0);
  seeded.seeds = ckpt.best_seeds;
  const auto eval = fgrl::evaluate(ckpt, seeded);
  CHECK(eval.episodes.size() == 2);
  CHECK(eval.mean_manager_return == ckpt.best_return);

  auto threaded = eval_options(7);
  threaded.parallel = 2;
  const auto fixed = fgrl::evaluate(ckpt, threaded);
  const auto again = fgrl::evaluate(ckpt, eval_options(7));
  CHECK(fixed.episodes.size() == 7);
  CHECK(fixed.mean_manager_return == again.mean_manager_return);
  for (int k = 0; k < 7; ++k) CHECK(fixed.episodes[k].seed == fgrl::evaluation_seed(k));
  auto at_mean = eval_options(3);
  at_mean.use_mean = true;
  const auto mean_eval = fgrl::evaluate(ckpt, at_mean);
  CHECK(mean_eval.episodes.size() == 3);
}

TEST_CASE("evaluating an all-zero policy on a straight chain returns zero") {
  auto cfg = small_config(4, 1, 6);
  cfg.env.zero_perturbation = true;
  auto ckpt = fgrl::train(cfg).checkpoint;
  std::fill(ckpt.best_manager.begin(), ckpt.best_manager.end(), 0.0);
  std::fill(ckpt.best_worker.begin(), ckpt.best_worker.end(), 0.0);
  const auto eval = fgrl::evaluate(ckpt, eval_options(4));
  CHECK(eval.mean_manager_return == 0.0);
  CHECK(eval.std_manager_return == 0.0);
  CHECK(eval.mean_worker_return == static_cast<double>(cfg.env.max_steps));
}

TEST_CASE("evaluation outputs") {
  TempDir dir("eval");
  const auto ckpt = fgrl::train(small_config(3, 1, 6)).checkpoint;
  fgrl::EvaluationOptions opts;
  opts.episodes = 3;
  opts.out_dir = dir.str("out");
  opts.trajectory_path = dir.str("traj.csv");
  fgrl::evaluate(ckpt, opts);
  CHECK(count_lines(dir.str("out/eval.csv")) >= 5);
  CHECK(count_lines(dir.str("traj.csv")) == 2 + 15);
  const auto traj = read_file(dir.str("traj.csv"));
  CHECK(traj.find("step,com_x,com_y,env_reward,theta_0,theta_1,theta_2,omega_0,omega_1,omega_2\n") !=
        std::string::npos);
}

TEST_CASE("incompatible checkpoints are rejected") {
  auto ckpt = fgrl::train(small_config(3, 1, 6)).checkpoint;
  ckpt.best_manager.pop_back();
  CHECK_ERROR_CODE(fgrl::evaluate(ckpt, eval_options(1)), ErrorCode::kIncompatibleCheckpoint);
}

TEST_CASE("random policy baseline is seeded") {
  fgrl::SnakeConfig env;
  env.limb_count = 4;
  env.max_steps = 20;
  const auto a = fgrl::evaluate_random_policy(env, 5, 9);
  const auto b = fgrl::evaluate_random_policy(env, 5, 9, 3);
  const auto c = fgrl::evaluate_random_policy(env, 5, 10);
  CHECK(a.mean_manager_return == b.mean_manager_return);
  CHECK(a.mean_manager_return != c.mean_manager_return);
  CHECK(a.episodes.size() == 5);
  CHECK(a.stderr_manager_return == doctest::Approx(a.std_manager_return / std::sqrt(5.0)));
}

TEST_CASE("transfer rows follow the evaluations") {
  TempDir dir("transfer");
  const auto c3 = fgrl::train(small_config(3, 1, 6)).checkpoint;
  const auto c4 = fgrl::train(small_config(4, 1, 6)).checkpoint;
  const std::vector<int> tests{3, 4, 5, 6, 7};
  const auto m = fgrl::transfer_matrix({c3, c4}, {4, 3}, tests, 4);
  REQUIRE(m.mean.size() == 2);
  for (std::size_t r = 0; r < 2; ++r) {
    REQUIRE(m.mean[r].size() == 5);
    for (int n : m.episodes[r]) CHECK(n == 4);
  }
  for (std::size_t c = 0; c < tests.size(); ++c) {
    CHECK(m.mean[0][c] == fgrl::evaluate(c4, eval_options(4, tests[c])).mean_manager_return);
  }
  const auto shades = fgrl::transfer_row_shades(m);
  for (const auto& row : shades) {
    CHECK(*std::min_element(row.begin(), row.end()) == 0.0);
    CHECK(*std::max_element(row.begin(), row.end()) == 1.0);
  }
  CHECK_ERROR_CODE(fgrl::transfer_matrix({c3}, {5}, tests, 1), ErrorCode::kMissingCheckpoint);

  fgrl::write_transfer_csv(dir.str("t.csv"), "abc", m);
  fgrl::write_transfer_html(dir.str("t.html"), "abc", m);
  const auto csv = read_file(dir.str("t.csv"));
  CHECK(csv.rfind("# fgrl 0.1.0 config_hash=abc\ntrain_limbs,test_3,test_4,test_5,test_6,test_7,episodes_per_cell\n4,", 0) == 0);
  CHECK(read_file(dir.str("t.html")).find("rgb(") != std::string::npos);
}

TEST_CASE("row shades are scaled per row") {
  fgrl::TransferMatrix m{{3}, {3, 4, 5}, {{1.0, 3.0, 2.0}}, {{1, 1, 1}}};
  CHECK(fgrl::transfer_row_shades(m)[0] == Vec{0.0, 1.0, 0.5});
  m.mean = {{2.0, 2.0, 2.0}};
  CHECK(fgrl::transfer_row_shades(m)[0] == Vec{0.0, 0.0, 0.0});
}

TEST_CASE("random search is reproducible and appends to its ledger") {
  TempDir dir("search");
  const fgrl::SearchSpace space;
  const auto base = small_config(3, 2, 6);
  const auto a = fgrl::random_search(space, 3, base, 5, dir.str());
  const auto b = fgrl::random_search(space, 3, base, 5);
  REQUIRE(a.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(a[k].index == b[k].index);
    CHECK(a[k].best_return == b[k].best_return);
    CHECK(a[k].sigma0 >= space.sigma_min);
    CHECK(a[k].sigma0 <= space.sigma_max);
    CHECK(std::find(space.widths.begin(), space.widths.end(), a[k].width) != space.widths.end());
    if (k > 0) CHECK(a[k - 1].best_return >= a[k].best_return);
  }
  const auto t = fgrl::sample_trial(space, 5, 1);
  const auto t_again = fgrl::sample_trial(space, 5, 1);
  CHECK(t.sigma0 == t_again.sigma0);
  CHECK(t.seed == t_again.seed);
  CHECK(t.seed != fgrl::sample_trial(space, 5, 2).seed);

  const std::string ledger = dir.str("search_ledger.csv");
  const int lines = count_lines(ledger);
  const std::string before = read_file(ledger);
  fgrl::random_search(space, 2, base, 6, dir.str());
  CHECK(count_lines(ledger) == lines + 2);
  CHECK(read_file(ledger).rfind(before, 0) == 0);
}

TEST_CASE("records CSV round trip and smoothing") {
  TempDir dir("records");
  std::vector<fgrl::GenerationRecord> recs;
  for (int g = 0; g < 30; ++g) {
    recs.push_back({g, static_cast<std::uint64_t>(16 * (g + 1)), 0.1 * g + 1.0 / 3.0, 0.05 * g, 0.01, 500.0 + g, 400.0, 1.5});
  }
  fgrl::write_records_csv(dir.str("records.csv"), "h", recs);
  const auto back = fgrl::read_records_csv(dir.str("records.csv"));
  REQUIRE(back.size() == recs.size());
  for (std::size_t g = 0; g < recs.size(); ++g) {
    CHECK(back[g].generation == recs[g].generation);
    CHECK(back[g].evaluations == recs[g].evaluations);
    CHECK(back[g].best_manager_return == recs[g].best_manager_return);
    CHECK(back[g].mean_worker_return == recs[g].mean_worker_return);
  }
  CHECK(read_file(dir.str("records.csv")).find("wall") == std::string::npos);

  CHECK(fgrl::running_mean({1, 2, 3, 4}, 2) == Vec{1, 1.5, 2.5, 3.5});
  CHECK(fgrl::running_mean({4, 8}, 12) == Vec{4, 6});
  CHECK(fgrl::running_mean({}, 12).empty());
  const Vec ramp{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13};
  CHECK(fgrl::running_mean(ramp, 12).back() == doctest::Approx(7.5));

  fgrl::export_plot(dir.str("records.csv"), dir.str("plot"));
  CHECK(count_lines(dir.str("plot/records_smoothed.csv")) == 32);
  CHECK(read_file(dir.str("plot/learning_curve.svg")).find("<svg") != std::string::npos);
}

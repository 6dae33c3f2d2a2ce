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
#include "fgrl/fgrl.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include <spdlog/spdlog.h>

#include "fgrl/error.hpp"
#include "fgrl/harness.hpp"
#include "fgrl/reward.hpp"

struct fgrl_morphology {
  fgrl::Morphology value;
};
struct fgrl_cmaes {
  fgrl::Cmaes value;
};
struct fgrl_env {
  fgrl::SnakeEnv value;
};
struct fgrl_policy {
  fgrl::FeudalPolicy value;
};

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

thread_local std::string g_last_error;

fgrl_status fail(fgrl_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
fgrl_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return FGRL_OK;
  } catch (const fgrl::Error& e) {
    return fail(static_cast<fgrl_status>(e.code()), e.what());
  } catch (const json::exception& e) {
    return fail(FGRL_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(FGRL_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FGRL_INTERNAL, e.what());
  } catch (...) {
    return fail(FGRL_INTERNAL, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw fgrl::Error(fgrl::ErrorCode::kInvalidArgument, what);
}

void require_capacity(size_t capacity, size_t needed) {
  if (capacity < needed) {
    throw fgrl::Error(fgrl::ErrorCode::kLengthMismatch,
                      "buffer holds " + std::to_string(capacity) + " values, " + std::to_string(needed) + " needed");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_request(const char* text) {
  if (!text || !*text) return json::object();
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw fgrl::Error(fgrl::ErrorCode::kParse, std::string("request: ") + e.what());
  }
}

void copy_out(const fgrl::Observation& obs, double* out, size_t capacity) {
  require_capacity(capacity, obs.x.data.size());
  std::copy(obs.x.data.begin(), obs.x.data.end(), out);
}

json summary_json(const fgrl::EvaluationResult& r) {
  json episodes = json::array();
  for (const auto& e : r.episodes) {
    episodes.push_back({{"seed", e.seed},
                        {"manager_return", e.manager_return},
                        {"worker_return", e.worker_return},
                        {"steps", e.steps},
                        {"crashed", e.crashed}});
  }
  return json{{"train_limbs", r.train_limbs},
              {"test_limbs", r.test_limbs},
              {"episodes", r.episodes.size()},
              {"mean_manager_return", r.mean_manager_return},
              {"std_manager_return", r.std_manager_return},
              {"stderr_manager_return", r.stderr_manager_return},
              {"mean_worker_return", r.mean_worker_return},
              {"per_episode", std::move(episodes)}};
}

std::string checkpoint_path(const std::string& p) {
  return fs::is_directory(p) ? (fs::path(p) / "checkpoint.json").string() : p;
}

}  // namespace

extern "C" {

const char* fgrl_version(void) { return fgrl::kVersion; }

const char* fgrl_status_name(fgrl_status status) { return fgrl::to_string(static_cast<fgrl::ErrorCode>(status)); }

const char* fgrl_last_error(void) { return g_last_error.c_str(); }

void fgrl_string_free(char* text) { std::free(text); }

fgrl_status fgrl_morphology_from_json(const char* text, fgrl_morphology** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = new fgrl_morphology{fgrl::parse_morphology(text)};
  });
}

fgrl_status fgrl_morphology_snake(int limbs, fgrl_morphology** out) {
  return guarded([&] {
    require(out, "null argument");
    *out = new fgrl_morphology{fgrl::Morphology{fgrl::make_morphology(limbs), {}}};
  });
}

void fgrl_morphology_free(fgrl_morphology* morphology) { delete morphology; }

fgrl_status fgrl_morphology_node_count(const fgrl_morphology* m, int* out) {
  return guarded([&] {
    require(m && out, "null argument");
    *out = m->value.graph.node_count();
  });
}

fgrl_status fgrl_morphology_hop_distance(const fgrl_morphology* m, int node, int* out) {
  return guarded([&] {
    require(m && out, "null argument");
    *out = fgrl::hop_distance_to_torso(m->value.graph, node);
  });
}

fgrl_status fgrl_morphology_to_json(const fgrl_morphology* m, char** out) {
  return guarded([&] {
    require(m && out, "null argument");
    *out = dup_string(fgrl::morphology_to_json(m->value));
  });
}

fgrl_status fgrl_worker_reward(const double* goal, const double* state, const double* next_state, size_t dim,
                               double* out) {
  return guarded([&] {
    require(goal && state && next_state && out, "null argument");
    *out = fgrl::worker_reward({goal, dim}, {state, dim}, {next_state, dim});
  });
}

fgrl_status fgrl_cmaes_create(size_t dim, double sigma0, int popsize, uint64_t seed, const double* mean,
                              fgrl_cmaes** out) {
  return guarded([&] {
    require(out, "null argument");
    fgrl::CmaesOptions o;
    o.dim = static_cast<int>(dim);
    o.sigma0 = sigma0;
    if (popsize > 0) o.popsize = popsize;
    if (mean) o.mean = std::vector<double>(mean, mean + dim);
    o.seed = seed;
    *out = new fgrl_cmaes{fgrl::Cmaes(o)};
  });
}

void fgrl_cmaes_free(fgrl_cmaes* es) { delete es; }

fgrl_status fgrl_cmaes_dim(const fgrl_cmaes* es, size_t* out) {
  return guarded([&] {
    require(es && out, "null argument");
    *out = static_cast<size_t>(es->value.dim());
  });
}

fgrl_status fgrl_cmaes_popsize(const fgrl_cmaes* es, int* out) {
  return guarded([&] {
    require(es && out, "null argument");
    *out = es->value.popsize();
  });
}

fgrl_status fgrl_cmaes_sigma(const fgrl_cmaes* es, double* out) {
  return guarded([&] {
    require(es && out, "null argument");
    *out = es->value.sigma();
  });
}

fgrl_status fgrl_cmaes_generation(const fgrl_cmaes* es, uint64_t* out) {
  return guarded([&] {
    require(es && out, "null argument");
    *out = es->value.generation();
  });
}

fgrl_status fgrl_cmaes_ask(fgrl_cmaes* es, double* candidates, size_t capacity) {
  return guarded([&] {
    require(es && candidates, "null argument");
    require_capacity(capacity, static_cast<size_t>(es->value.popsize()) * es->value.dim());
    const fgrl::Population pop = es->value.ask();
    double* dst = candidates;
    for (const auto& c : pop.candidates) dst = std::copy(c.begin(), c.end(), dst);
  });
}

fgrl_status fgrl_cmaes_tell(fgrl_cmaes* es, const double* fitness, size_t count) {
  return guarded([&] {
    require(es && fitness, "null argument");
    es->value.tell({fitness, count});
  });
}

fgrl_status fgrl_cmaes_mean(const fgrl_cmaes* es, double* out, size_t capacity) {
  return guarded([&] {
    require(es && out, "null argument");
    const auto m = es->value.mean();
    require_capacity(capacity, m.size());
    std::copy(m.begin(), m.end(), out);
  });
}

fgrl_status fgrl_cmaes_save(const fgrl_cmaes* es, char** out) {
  return guarded([&] {
    require(es && out, "null argument");
    *out = dup_string(es->value.to_json().dump());
  });
}

fgrl_status fgrl_cmaes_load(const char* text, fgrl_cmaes** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = new fgrl_cmaes{fgrl::Cmaes::from_json(parse_request(text))};
  });
}

fgrl_status fgrl_env_create(const char* config_json, fgrl_env** out) {
  return guarded([&] {
    require(out, "null argument");
    const fgrl::SnakeConfig cfg = fgrl::snake_config_from_json(parse_request(config_json));
    cfg.validate();
    *out = new fgrl_env{fgrl::SnakeEnv(cfg, fgrl::make_morphology(cfg.limb_count))};
  });
}

void fgrl_env_free(fgrl_env* env) { delete env; }

fgrl_status fgrl_env_observation_size(const fgrl_env* env, size_t* out) {
  return guarded([&] {
    require(env && out, "null argument");
    *out = static_cast<size_t>(env->value.config().limb_count) * (fgrl::kLimbStateDim + fgrl::kLimbFeatureDim);
  });
}

fgrl_status fgrl_env_action_size(const fgrl_env* env, size_t* out) {
  return guarded([&] {
    require(env && out, "null argument");
    *out = static_cast<size_t>(env->value.graph().actuator_count());
  });
}

fgrl_status fgrl_env_reset(fgrl_env* env, uint64_t seed, double* observation, size_t capacity) {
  return guarded([&] {
    require(env && observation, "null argument");
    copy_out(env->value.reset(seed), observation, capacity);
  });
}

fgrl_status fgrl_env_step(fgrl_env* env, const double* actions, size_t count, double* observation, size_t capacity,
                          double* reward, int* done) {
  return guarded([&] {
    require(env && observation && reward && done && (actions || count == 0), "null argument");
    const fgrl::StepResult r = env->value.step({actions, count});
    copy_out(r.obs, observation, capacity);
    *reward = r.reward;
    *done = r.done ? 1 : 0;
  });
}

fgrl_status fgrl_policy_create(const char* config_json, const fgrl_morphology* morphology, fgrl_policy** out) {
  return guarded([&] {
    require(morphology && out, "null argument");
    const fgrl::PolicyConfig cfg = fgrl::policy_config_from_json(parse_request(config_json));
    *out = new fgrl_policy{fgrl::FeudalPolicy(cfg, morphology->value.hierarchy())};
  });
}

void fgrl_policy_free(fgrl_policy* policy) { delete policy; }

fgrl_status fgrl_policy_sizes(const fgrl_policy* policy, size_t* manager_size, size_t* worker_size) {
  return guarded([&] {
    require(policy && manager_size && worker_size, "null argument");
    *manager_size = policy->value.layout().manager_size();
    *worker_size = policy->value.layout().worker_size();
  });
}

fgrl_status fgrl_policy_step(const fgrl_policy* policy, const double* observation, size_t observation_len,
                             const double* manager, size_t manager_len, const double* worker, size_t worker_len,
                             double* actions, size_t capacity, size_t* written) {
  return guarded([&] {
    require(policy && observation && written && (manager || manager_len == 0) && (worker || worker_len == 0),
            "null argument");
    const auto& cfg = policy->value.config();
    const int k = policy->value.hierarchy().worker_count();
    if (observation_len != static_cast<size_t>(k) * cfg.obs_dim()) {
      throw fgrl::Error(fgrl::ErrorCode::kDimensionMismatch, "observation must hold workers * obs_dim values");
    }
    fgrl::Observation obs{cfg.state_dim, fgrl::Matrix(k, cfg.obs_dim())};
    std::copy(observation, observation + observation_len, obs.x.data.begin());
    const auto out = policy->value.step(obs, {manager, manager_len}, {worker, worker_len});
    const auto flat = out.actions.flatten();
    require_capacity(capacity, flat.size());
    if (!flat.empty()) require(actions != nullptr, "null argument");
    std::copy(flat.begin(), flat.end(), actions);
    *written = flat.size();
  });
}

fgrl_status fgrl_train(const char* request_json, char** result_json) {
  return guarded([&] {
    require(result_json, "null argument");
    const json req = parse_request(request_json);
    const fgrl::ExperimentConfig cfg = fgrl::experiment_config_from_json(req.value("config", json::object()));
    fgrl::TrainOptions opts;
    opts.out_dir = req.value("out", std::string());
    opts.parallel = req.value("parallel", 1);
    if (req.contains("stop_after") && !req.at("stop_after").is_null()) opts.stop_after = req.at("stop_after").get<int>();
    opts.resume = req.value("resume", true);
    opts.log_progress = req.value("log", false);
    const fgrl::TrainResult r = fgrl::train(cfg, opts);
    const auto& c = r.checkpoint;
    json res{{"config_hash", c.hash},
             {"generations_done", c.generations_done},
             {"completed", r.completed},
             {"evaluations", c.evaluations},
             {"best_return", c.best_return},
             {"best_generation", c.best_generation},
             {"manager_dim", c.manager_es ? c.manager_es->dim() : 0},
             {"worker_dim", c.worker_es ? c.worker_es->dim() : 0},
             {"out", opts.out_dir}};
    if (!c.records.empty()) res["last_record_mean_manager_return"] = c.records.back().mean_manager_return;
    *result_json = dup_string(res.dump());
  });
}

fgrl_status fgrl_evaluate(const char* request_json, char** result_json) {
  return guarded([&] {
    require(result_json, "null argument");
    const json req = parse_request(request_json);
    const int episodes = req.value("episodes", 100);
    const int parallel = req.value("parallel", 1);
    json res;
    if (req.value("random_baseline", false)) {
      fgrl::SnakeConfig env = fgrl::snake_config_from_json(req.value("env", json::object()));
      if (req.contains("limbs")) env.limb_count = req.at("limbs").get<int>();
      const auto r = fgrl::evaluate_random_policy(env, episodes, req.value("seed", std::uint64_t{0}), parallel);
      res = summary_json(r);
    } else {
      require(req.contains("checkpoint"), "request needs 'checkpoint'");
      const fgrl::Checkpoint ckpt = fgrl::load_checkpoint(checkpoint_path(req.at("checkpoint").get<std::string>()));
      fgrl::EvaluationOptions opts;
      opts.limbs = req.value("limbs", 0);
      opts.episodes = episodes;
      opts.parallel = parallel;
      opts.use_mean = req.value("use_mean", false);
      opts.out_dir = req.value("out", std::string());
      opts.trajectory_path = req.value("trajectory", std::string());
      if (req.value("best_seeds", false)) opts.seeds = ckpt.best_seeds;
      res = summary_json(fgrl::evaluate(ckpt, opts));
      res["config_hash"] = ckpt.hash;
    }
    if (!req.value("per_episode", true)) res.erase("per_episode");
    *result_json = dup_string(res.dump());
  });
}

fgrl_status fgrl_transfer(const char* request_json, char** result_json) {
  return guarded([&] {
    require(result_json, "null argument");
    const json req = parse_request(request_json);
    require(req.contains("checkpoints"), "request needs 'checkpoints'");
    std::vector<fgrl::Checkpoint> ckpts;
    std::string hashes;
    for (const auto& p : req.at("checkpoints")) {
      ckpts.push_back(fgrl::load_checkpoint(checkpoint_path(p.get<std::string>())));
      hashes += (hashes.empty() ? "" : "+") + ckpts.back().hash;
    }
    std::vector<int> train_limbs = req.value("train_limbs", std::vector<int>{});
    if (train_limbs.empty()) {
      for (const auto& c : ckpts) train_limbs.push_back(c.config.env.limb_count);
    }
    const std::vector<int> test_limbs = req.value("test_limbs", std::vector<int>{3, 4, 5, 6, 7});
    const fgrl::TransferMatrix m =
        fgrl::transfer_matrix(ckpts, train_limbs, test_limbs, req.value("episodes", 100), req.value("parallel", 1));
    const std::string& hash = hashes;
    const std::string out = req.value("out", std::string());
    if (!out.empty()) {
      fs::create_directories(out);
      fgrl::write_transfer_csv((fs::path(out) / "transfer.csv").string(), hash, m);
      fgrl::write_transfer_html((fs::path(out) / "transfer.html").string(), hash, m);
    }
    *result_json = dup_string(json{{"train_limbs", m.train_limbs},
                                   {"test_limbs", m.test_limbs},
                                   {"mean", m.mean},
                                   {"episodes", m.episodes},
                                   {"shades", fgrl::transfer_row_shades(m)}}
                                  .dump());
  });
}

fgrl_status fgrl_search(const char* request_json, char** result_json) {
  return guarded([&] {
    require(result_json, "null argument");
    const json req = parse_request(request_json);
    const fgrl::ExperimentConfig base = fgrl::experiment_config_from_json(req.value("config", json::object()));
    fgrl::SearchSpace space;
    space.sigma_min = req.value("sigma_min", space.sigma_min);
    space.sigma_max = req.value("sigma_max", space.sigma_max);
    space.widths = req.value("widths", space.widths);
    const auto trials = fgrl::random_search(space, req.value("budget", 1), base, req.value("seed", std::uint64_t{0}),
                                            req.value("out", std::string()), req.value("parallel", 1));
    json res = json::array();
    for (const auto& t : trials) {
      res.push_back({{"index", t.index},
                     {"seed", t.seed},
                     {"sigma0", t.sigma0},
                     {"width", t.width},
                     {"best_return", t.best_return},
                     {"final_mean_return", t.final_mean_return}});
    }
    *result_json = dup_string(res.dump());
  });
}

fgrl_status fgrl_plot(const char* request_json, char** result_json) {
  return guarded([&] {
    require(result_json, "null argument");
    const json req = parse_request(request_json);
    require(req.contains("records"), "request needs 'records'");
    std::string records = req.at("records").get<std::string>();
    if (fs::is_directory(records)) records = (fs::path(records) / "records.csv").string();
    const std::string out = req.value("out", fs::path(records).parent_path().string());
    const int window = req.value("window", 12);
    fgrl::export_plot(records, out.empty() ? "." : out, window);
    *result_json = dup_string(json{{"smoothed", (fs::path(out.empty() ? "." : out) / "records_smoothed.csv").string()},
                                   {"svg", (fs::path(out.empty() ? "." : out) / "learning_curve.svg").string()},
                                   {"window", window}}
                                  .dump());
  });
}

}  // extern "C"

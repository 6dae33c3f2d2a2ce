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
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "fgrl/error.hpp"
#include "fgrl/harness.hpp"
#include "parallel.hpp"

namespace fgrl {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json record_to_json(const GenerationRecord& r) {
  return json{{"generation", r.generation},
              {"evaluations", r.evaluations},
              {"best_manager_return", r.best_manager_return},
              {"mean_manager_return", r.mean_manager_return},
              {"std_manager_return", r.std_manager_return},
              {"best_worker_return", r.best_worker_return},
              {"mean_worker_return", r.mean_worker_return},
              {"wall_seconds", r.wall_seconds}};
}

GenerationRecord record_from_json(const json& j) {
  GenerationRecord r;
  r.generation = j.at("generation").get<int>();
  r.evaluations = j.at("evaluations").get<std::uint64_t>();
  r.best_manager_return = j.at("best_manager_return").get<double>();
  r.mean_manager_return = j.at("mean_manager_return").get<double>();
  r.std_manager_return = j.at("std_manager_return").get<double>();
  r.best_worker_return = j.at("best_worker_return").get<double>();
  r.mean_worker_return = j.at("mean_worker_return").get<double>();
  r.wall_seconds = j.value("wall_seconds", 0.0);
  return r;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp);
    out << text;
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp + ": " + ec.message());
}

void write_timing_csv(const std::string& path, const std::string& hash, const std::vector<GenerationRecord>& records) {
  std::ostringstream out;
  out << provenance_line(hash) << "\n" << "generation,wall_seconds\n";
  for (const auto& r : records) out << r.generation << ',' << r.wall_seconds << '\n';
  write_text_atomic(path, out.str());
}

void persist(const std::string& dir, const Checkpoint& ckpt) {
  if (dir.empty()) return;
  save_checkpoint((fs::path(dir) / "checkpoint.json").string(), ckpt);
  write_records_csv((fs::path(dir) / "records.csv").string(), ckpt.hash, ckpt.records);
  write_timing_csv((fs::path(dir) / "timing.csv").string(), ckpt.hash, ckpt.records);
}

}  // namespace

json to_json(const Checkpoint& c) {
  json doc;
  doc["format"] = "fgrl-checkpoint";
  doc["version"] = kVersion;
  doc["config"] = to_json(c.config);
  doc["config_hash"] = c.hash;
  doc["generations_done"] = c.generations_done;
  doc["evaluations"] = c.evaluations;
  doc["manager_es"] = c.manager_es ? c.manager_es->to_json() : json(nullptr);
  doc["worker_es"] = c.worker_es ? c.worker_es->to_json() : json(nullptr);
  doc["manager_mean"] = c.manager_es ? json(c.manager_es->mean()) : json::array();
  doc["worker_mean"] = c.worker_es ? json(c.worker_es->mean()) : json::array();
  doc["best_manager"] = c.best_manager;
  doc["best_worker"] = c.best_worker;
  doc["best_return"] = c.best_return;
  doc["best_generation"] = c.best_generation;
  doc["best_seeds"] = c.best_seeds;
  json records = json::array();
  for (const auto& r : c.records) records.push_back(record_to_json(r));
  doc["records"] = std::move(records);
  return doc;
}

Checkpoint checkpoint_from_json(const json& doc) {
  try {
    if (doc.value("format", std::string()) != "fgrl-checkpoint") {
      throw Error(ErrorCode::kIncompatibleCheckpoint, "not an fgrl checkpoint");
    }
    Checkpoint c;
    c.config = experiment_config_from_json(doc.at("config"));
    c.hash = doc.at("config_hash").get<std::string>();
    c.generations_done = doc.at("generations_done").get<int>();
    c.evaluations = doc.at("evaluations").get<std::uint64_t>();
    if (!doc.at("manager_es").is_null()) c.manager_es = Cmaes::from_json(doc.at("manager_es"));
    if (!doc.at("worker_es").is_null()) c.worker_es = Cmaes::from_json(doc.at("worker_es"));
    c.best_manager = doc.at("best_manager").get<ParamVector>();
    c.best_worker = doc.at("best_worker").get<ParamVector>();
    c.best_return = doc.at("best_return").get<double>();
    c.best_generation = doc.at("best_generation").get<int>();
    c.best_seeds = doc.at("best_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& r : doc.at("records")) c.records.push_back(record_from_json(r));
    if (config_hash(c.config) != c.hash) {
      throw Error(ErrorCode::kIncompatibleCheckpoint, "config hash does not match the stored config");
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  write_text_atomic(path, to_json(ckpt).dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingCheckpoint, "no checkpoint at " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
  return checkpoint_from_json(doc);
}

TrainResult train(const ExperimentConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  const std::string hash = config_hash(cfg);
  const FeudalPolicy policy(cfg.policy, cfg.resolved_morphology().hierarchy());
  const int manager_dim = static_cast<int>(policy.layout().manager_size());
  const int worker_dim = static_cast<int>(policy.layout().worker_size());

  if (!options.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(options.out_dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + options.out_dir + ": " + ec.message());
  }
  const std::string ckpt_path = options.out_dir.empty() ? std::string() : (fs::path(options.out_dir) / "checkpoint.json").string();

  Checkpoint ckpt;
  if (options.resume && !ckpt_path.empty() && fs::exists(ckpt_path)) {
    ckpt = load_checkpoint(ckpt_path);
    if (ckpt.hash != hash) {
      throw Error(ErrorCode::kIncompatibleCheckpoint,
                  "checkpoint in " + options.out_dir + " belongs to config " + ckpt.hash + ", not " + hash);
    }
    if (options.log_progress) spdlog::info("resuming at generation {}", ckpt.generations_done);
  } else {
    ckpt.config = cfg;
    ckpt.hash = hash;
    CmaesOptions m;
    m.dim = manager_dim;
    m.sigma0 = cfg.sigma0_manager;
    m.popsize = cfg.manager_popsize.value_or(cfg.popsize);
    m.seed = derive_seed(cfg.seed, {2});
    ckpt.manager_es.emplace(m);
    if (worker_dim > 0) {
      CmaesOptions w;
      w.dim = worker_dim;
      w.sigma0 = cfg.sigma0_worker;
      w.popsize = cfg.worker_popsize.value_or(cfg.popsize);
      w.seed = derive_seed(cfg.seed, {3});
      ckpt.worker_es.emplace(w);
    }
  }

  Cmaes& mgr = *ckpt.manager_es;
  const int lambda_m = mgr.popsize();
  const int lambda_w = ckpt.worker_es ? ckpt.worker_es->popsize() : 1;
  const int pairs = std::max(lambda_m, lambda_w);
  const int episodes = cfg.episodes_per_candidate;
  const int stop_at = std::min(cfg.generations, options.stop_after.value_or(cfg.generations));

  auto evaluate_one = [&](std::span<const double> m, std::span<const double> w, std::uint64_t seed) {
    if (options.evaluator) return options.evaluator(m, w, seed);
    return run_episode(cfg.env, policy, m, w, seed);
  };

  while (ckpt.generations_done < stop_at) {
    const auto t0 = std::chrono::steady_clock::now();
    const int g = ckpt.generations_done;
    const Population pm = mgr.ask();
    Population pw;
    if (ckpt.worker_es) pw = ckpt.worker_es->ask();

    std::vector<int> worker_of(pairs);
    if (cfg.pairing == Pairing::kIndexAligned) {
      for (int p = 0; p < pairs; ++p) worker_of[p] = p % lambda_w;
    } else {
      std::vector<int> perm(pairs);
      std::iota(perm.begin(), perm.end(), 0);
      std::mt19937_64 rng(derive_seed(cfg.seed, {4, static_cast<std::uint64_t>(g)}));
      std::shuffle(perm.begin(), perm.end(), rng);
      for (int p = 0; p < pairs; ++p) worker_of[p] = perm[p] % lambda_w;
    }

    std::vector<double> rm(static_cast<std::size_t>(pairs) * episodes), rw(rm.size());
    std::vector<std::uint64_t> seeds(rm.size());
    internal::parallel_for(static_cast<int>(rm.size()), options.parallel, [&](int job) {
      const int p = job / episodes;
      const int e = job % episodes;
      const std::uint64_t seed = derive_seed(cfg.seed, {1, static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(p),
                                                        static_cast<std::uint64_t>(e)});
      std::span<const double> m = pm.candidates[p % lambda_m];
      std::span<const double> w = ckpt.worker_es ? std::span<const double>(pw.candidates[worker_of[p]])
                                                 : std::span<const double>();
      const EpisodeResult r = evaluate_one(m, w, seed);
      rm[job] = r.manager_return;
      rw[job] = r.worker_return;
      seeds[job] = seed;
    });

    std::vector<double> pair_m(pairs, 0.0), pair_w(pairs, 0.0);
    for (int p = 0; p < pairs; ++p) {
      for (int e = 0; e < episodes; ++e) {
        pair_m[p] += rm[static_cast<std::size_t>(p) * episodes + e];
        pair_w[p] += rw[static_cast<std::size_t>(p) * episodes + e];
      }
      pair_m[p] /= episodes;
      pair_w[p] /= episodes;
    }

    std::vector<double> fit_m(lambda_m, 0.0), fit_w(lambda_w, 0.0);
    std::vector<int> count_m(lambda_m, 0), count_w(lambda_w, 0);
    for (int p = 0; p < pairs; ++p) {
      fit_m[p % lambda_m] += pair_m[p];
      ++count_m[p % lambda_m];
      fit_w[worker_of[p]] += pair_w[p];
      ++count_w[worker_of[p]];
    }
    for (int k = 0; k < lambda_m; ++k) fit_m[k] = -fit_m[k] / count_m[k];
    for (int k = 0; k < lambda_w; ++k) fit_w[k] = -fit_w[k] / std::max(count_w[k], 1);
    mgr.tell(fit_m);
    if (ckpt.worker_es) ckpt.worker_es->tell(fit_w);

    GenerationRecord rec;
    rec.generation = g;
    rec.evaluations = ckpt.evaluations + static_cast<std::uint64_t>(rm.size());
    const auto best_it = std::max_element(pair_m.begin(), pair_m.end());
    rec.best_manager_return = *best_it;
    rec.mean_manager_return = std::accumulate(pair_m.begin(), pair_m.end(), 0.0) / pairs;
    double var = 0.0;
    for (double v : pair_m) var += (v - rec.mean_manager_return) * (v - rec.mean_manager_return);
    rec.std_manager_return = std::sqrt(var / pairs);
    rec.best_worker_return = *std::max_element(pair_w.begin(), pair_w.end());
    rec.mean_worker_return = std::accumulate(pair_w.begin(), pair_w.end(), 0.0) / pairs;

    const int best_pair = static_cast<int>(best_it - pair_m.begin());
    if (ckpt.best_generation < 0 || *best_it > ckpt.best_return) {
      ckpt.best_return = *best_it;
      ckpt.best_generation = g;
      ckpt.best_manager = pm.candidates[best_pair % lambda_m];
      ckpt.best_worker = ckpt.worker_es ? pw.candidates[worker_of[best_pair]] : ParamVector{};
      ckpt.best_seeds.assign(seeds.begin() + static_cast<std::ptrdiff_t>(best_pair) * episodes,
                             seeds.begin() + static_cast<std::ptrdiff_t>(best_pair + 1) * episodes);
    }

    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ckpt.evaluations = rec.evaluations;
    ckpt.records.push_back(rec);
    ckpt.generations_done = g + 1;

    if (options.log_progress) {
      spdlog::info("gen {:4d}  best R_M {:9.4f}  mean R_M {:9.4f}  mean R_W {:9.3f}  sigma {:.4f}  {:.2f}s", g,
                   rec.best_manager_return, rec.mean_manager_return, rec.mean_worker_return, mgr.sigma(),
                   rec.wall_seconds);
    }
    if (ckpt.generations_done % cfg.checkpoint_every == 0 || ckpt.generations_done == stop_at) {
      persist(options.out_dir, ckpt);
    }
  }
  if (ckpt.generations_done == stop_at) persist(options.out_dir, ckpt);

  TrainResult result;
  result.completed = ckpt.generations_done >= cfg.generations;
  result.checkpoint = std::move(ckpt);
  return result;
}

}  // namespace fgrl

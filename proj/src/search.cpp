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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "fgrl/error.hpp"
#include "fgrl/harness.hpp"

namespace fgrl {
namespace {

void append_ledger(const std::string& dir, std::uint64_t search_seed, const SearchSpace& space, const SearchTrial& t) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path path = fs::path(dir) / "search_ledger.csv";
  const bool fresh = !fs::exists(path);
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to " + path.string());
  if (fresh) {
    out << "# fgrl " << kVersion << " search ledger (append-only)\n"
        << "search_seed,index,trial_seed,sigma_min,sigma_max,sigma0,width,best_return,final_mean_return\n";
  }
  char line[512];
  std::snprintf(line, sizeof(line), "%llu,%d,%llu,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n",
                static_cast<unsigned long long>(search_seed), t.index, static_cast<unsigned long long>(t.seed),
                space.sigma_min, space.sigma_max, t.sigma0, t.width, t.best_return, t.final_mean_return);
  out << line;
}

}  // namespace

SearchTrial sample_trial(const SearchSpace& space, std::uint64_t search_seed, int index) {
  if (!(space.sigma_min > 0.0) || space.sigma_max < space.sigma_min || space.widths.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "search space needs 0 < sigma_min <= sigma_max and at least one width");
  }
  std::mt19937_64 rng(derive_seed(search_seed, {static_cast<std::uint64_t>(index)}));
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const auto w = std::uniform_int_distribution<std::size_t>(0, space.widths.size() - 1)(rng);
  SearchTrial t;
  t.index = index;
  t.seed = derive_seed(search_seed, {static_cast<std::uint64_t>(index), 1});
  t.sigma0 = space.sigma_min + (space.sigma_max - space.sigma_min) * u;
  t.width = space.widths[w];
  return t;
}

std::vector<SearchTrial> random_search(const SearchSpace& space, int budget, const ExperimentConfig& base,
                                       std::uint64_t search_seed, const std::string& out_dir, int parallel) {
  if (budget < 1) throw Error(ErrorCode::kInvalidArgument, "budget must be >= 1");
  std::vector<SearchTrial> trials;
  for (int k = 0; k < budget; ++k) {
    SearchTrial t = sample_trial(space, search_seed, k);
    ExperimentConfig cfg = base;
    cfg.seed = t.seed;
    cfg.sigma0_manager = cfg.sigma0_worker = t.sigma0;
    cfg.policy.mlp_width = t.width;
    TrainOptions opts;
    opts.parallel = parallel;
    const TrainResult r = train(cfg, opts);
    t.best_return = r.checkpoint.best_return;
    t.final_mean_return = r.checkpoint.records.back().mean_manager_return;
    if (!out_dir.empty()) append_ledger(out_dir, search_seed, space, t);
    trials.push_back(t);
  }
  std::stable_sort(trials.begin(), trials.end(),
                   [](const SearchTrial& a, const SearchTrial& b) { return a.best_return > b.best_return; });
  return trials;
}

}  // namespace fgrl

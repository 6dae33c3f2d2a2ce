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
// Writes the fine-step gait trajectory used as the environment regression
// fixture: fgrl_make_golden <output.csv>
#include <cstdio>
#include <string>
#include <vector>

#include "fgrl/harness.hpp"
#include "oracles/golden_gait.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <output.csv>\n", argv[0]);
    return 2;
  }
  fgrl::ExperimentConfig cfg;
  cfg.env = oracle::gait_config(10);
  cfg.policy = fgrl::PolicyConfig::for_observation(fgrl::kLimbStateDim, fgrl::kLimbFeatureDim);
  std::vector<fgrl::StepTrace> trace;
  for (const auto& row : oracle::run_gait(cfg.env)) {
    fgrl::StepTrace t;
    t.step = row.step;
    t.com = {row.com_x, row.com_y};
    t.env_reward = row.env_reward;
    t.angles = row.angles;
    t.angular_velocities = row.angular_velocities;
    trace.push_back(std::move(t));
  }
  fgrl::write_trajectory_csv(argv[1], fgrl::config_hash(cfg), trace);
  std::printf("%zu steps, final com_x %.17g\n", trace.size(), trace.back().com.x());
  return 0;
}

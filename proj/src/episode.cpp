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
#include <vector>

#include "fgrl/error.hpp"
#include "fgrl/harness.hpp"
#include "fgrl/reward.hpp"

namespace fgrl {
namespace {

Matrix state_rows(const Observation& obs) {
  Matrix s(obs.worker_count(), obs.state_dim);
  for (int i = 0; i < s.rows; ++i) {
    auto src = obs.state(i);
    std::copy(src.begin(), src.end(), s.row(i).begin());
  }
  return s;
}

}  // namespace

EpisodeResult run_episode(const SnakeConfig& env_cfg, const FeudalPolicy& policy, std::span<const double> manager,
                          std::span<const double> worker, std::uint64_t seed, bool record_trace) {
  const Hierarchy& hier = policy.hierarchy();
  if (hier.worker_count() != env_cfg.limb_count) {
    throw Error(ErrorCode::kGraphStateMismatch, "policy hierarchy and environment disagree on limb count");
  }
  const bool has_goals = policy.config().variant != Variant::kDeepSetMlp;
  const int workers = hier.worker_count();
  const int levels = hier.level_count();

  SnakeEnv env(env_cfg, hier.base());
  Observation obs = env.reset(seed);
  RewardLedger ledger(workers, levels);
  EpisodeResult result;
  std::vector<double> worker_rewards(workers, 0.0);

  for (;;) {
    PolicyOutput out = policy.step(obs, manager, worker);
    std::vector<double> actions = out.actions.flatten();
    StepResult next = env.step(actions);
    if (next.crashed) {
      result.crashed = true;
      break;
    }
    const Matrix s = state_rows(obs);
    const Matrix s_next = state_rows(next.obs);
    if (has_goals) {
      for (int i = 0; i < workers; ++i) worker_rewards[i] = supervisor_reward(out.goals, s, s_next, hier, i);
    }
    ledger.accumulate(next.reward, worker_rewards);
    for (int level = 1; level + 1 < levels; ++level) {
      std::vector<double> level_rewards(hier.level_size(level));
      for (int k = 0; k < hier.level_size(level); ++k) {
        level_rewards[k] = supervisor_reward(out.goals, s, s_next, hier, hier.level_offset(level) + k);
      }
      ledger.accumulate_level(level, level_rewards);
    }

    if (record_trace) {
      StepTrace t;
      t.step = next.state.step;
      t.observation = obs.x;
      t.goals = out.goals;
      t.actions = actions;
      t.env_reward = next.reward;
      t.worker_rewards = worker_rewards;
      t.com = next.state.com;
      for (const auto& link : next.state.links) {
        t.angles.push_back(link.angle);
        t.angular_velocities.push_back(link.angular_velocity);
      }
      result.trace.push_back(std::move(t));
    }
    obs = std::move(next.obs);
    if (next.done) break;
  }

  result.manager_return = ledger.manager_return();
  result.worker_return = ledger.worker_return();
  result.level_returns = ledger.level_returns();
  result.steps = ledger.steps();
  return result;
}

}  // namespace fgrl

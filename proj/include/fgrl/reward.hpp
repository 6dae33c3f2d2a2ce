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
#ifndef FGRL_REWARD_HPP_
#define FGRL_REWARD_HPP_

#include <span>
#include <vector>

#include "fgrl/graph.hpp"
#include "fgrl/mlp.hpp"
#include "fgrl/policy.hpp"

namespace fgrl {

/// Norm below which a cosine is treated as undefined (reward 1).
inline constexpr double kCosineEpsilon = 1e-9;

/// 1 + cos(goal, s_next - s), in [0, 2].
double worker_reward(std::span<const double> goal, std::span<const double> state,
                     std::span<const double> next_state);

/// Mean over the node's supervisors of 1 + cos(g_{j->i}, s' - s). `states`
/// and `next_states` are K x d_s worker states; above level 0 a node's state
/// is the sum of its descendant workers' states.
double supervisor_reward(const GoalSet& goals, const Matrix& states, const Matrix& next_states,
                         const Hierarchy& hierarchy, int node);

/// Undiscarded per-episode returns.
class RewardLedger {
 public:
  explicit RewardLedger(int worker_count = 0, int level_count = 2);

  /// R_M += env_reward; R_W += mean(worker_rewards). Throws kLengthMismatch.
  void accumulate(double env_reward, std::span<const double> worker_rewards);
  /// Adds the mean reward of one intermediate level (1 .. L-2) for this step.
  void accumulate_level(int level, std::span<const double> node_rewards);

  double manager_return() const { return manager_return_; }
  double worker_return() const { return worker_return_; }
  /// Per level returns; index 0 mirrors worker_return(), the top mirrors manager_return().
  const std::vector<double>& level_returns() const { return level_returns_; }
  const std::vector<double>& last_worker_rewards() const { return last_worker_rewards_; }
  int steps() const { return steps_; }

 private:
  int worker_count_;
  double manager_return_ = 0.0;
  double worker_return_ = 0.0;
  std::vector<double> level_returns_;
  std::vector<double> last_worker_rewards_;
  int steps_ = 0;
};

}  // namespace fgrl

#endif  // FGRL_REWARD_HPP_

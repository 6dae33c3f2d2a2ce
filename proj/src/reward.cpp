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
#include "fgrl/reward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fgrl/error.hpp"

namespace fgrl {
namespace {

double cosine_reward(std::span<const double> goal, std::span<const double> delta) {
  double dot = 0.0, gg = 0.0, dd = 0.0;
  for (std::size_t k = 0; k < goal.size(); ++k) {
    dot += goal[k] * delta[k];
    gg += goal[k] * goal[k];
    dd += delta[k] * delta[k];
  }
  const double ng = std::sqrt(gg);
  const double nd = std::sqrt(dd);
  if (ng < kCosineEpsilon || nd < kCosineEpsilon) return 1.0;
  const double cosine = std::clamp(dot / (ng * nd), -1.0, 1.0);
  return 1.0 + cosine;
}

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kNonFiniteInput, std::string(what) + " has a non-finite entry");
  }
}

}  // namespace

double worker_reward(std::span<const double> goal, std::span<const double> state,
                     std::span<const double> next_state) {
  if (goal.size() != state.size() || state.size() != next_state.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "goal and state vectors must share one dimension");
  }
  check_finite(goal, "goal");
  check_finite(state, "state");
  check_finite(next_state, "next state");
  thread_local std::vector<double> delta;
  delta.resize(state.size());
  for (std::size_t k = 0; k < state.size(); ++k) delta[k] = next_state[k] - state[k];
  return cosine_reward(goal, delta);
}

double supervisor_reward(const GoalSet& goals, const Matrix& states, const Matrix& next_states,
                         const Hierarchy& hierarchy, int node) {
  if (node < 0 || node >= hierarchy.node_count()) {
    throw Error(ErrorCode::kIndexOutOfRange, "node " + std::to_string(node) + " out of range");
  }
  const auto parents = hierarchy.parents(node);
  if (parents.empty()) throw Error(ErrorCode::kNoParent, "node " + std::to_string(node) + " has no supervisor");
  if (states.rows != hierarchy.worker_count() || next_states.rows != states.rows ||
      next_states.cols != states.cols) {
    throw Error(ErrorCode::kDimensionMismatch, "state matrices do not match the worker count");
  }

  std::vector<double> s(states.cols, 0.0), s_next(states.cols, 0.0);
  if (hierarchy.is_worker(node)) {
    auto a = states.row(node);
    auto b = next_states.row(node);
    s.assign(a.begin(), a.end());
    s_next.assign(b.begin(), b.end());
  } else {
    for (int w : hierarchy.descendant_workers(node)) {
      for (int c = 0; c < states.cols; ++c) {
        s[c] += states(w, c);
        s_next[c] += next_states(w, c);
      }
    }
  }

  double total = 0.0;
  for (std::size_t p = 0; p < parents.size(); ++p) {
    const int e = hierarchy.edge_index(node, static_cast<int>(p));
    if (static_cast<std::size_t>(e) >= goals.size() || goals.edges[e] != NodePair{parents[p], node}) {
      throw Error(ErrorCode::kMissingGoal, "no goal for edge " + std::to_string(parents[p]) + "->" +
                                               std::to_string(node));
    }
    total += worker_reward(goals.goal(e), s, s_next);
  }
  return total / static_cast<double>(parents.size());
}

RewardLedger::RewardLedger(int worker_count, int level_count)
    : worker_count_(worker_count), level_returns_(std::max(level_count, 2), 0.0) {}

void RewardLedger::accumulate(double env_reward, std::span<const double> worker_rewards) {
  if (static_cast<int>(worker_rewards.size()) != worker_count_) {
    throw Error(ErrorCode::kLengthMismatch, "expected " + std::to_string(worker_count_) + " worker rewards, got " +
                                                std::to_string(worker_rewards.size()));
  }
  double sum = 0.0;
  for (double r : worker_rewards) sum += r;
  manager_return_ += env_reward;
  if (worker_count_ > 0) worker_return_ += sum / static_cast<double>(worker_count_);
  level_returns_.front() = worker_return_;
  level_returns_.back() = manager_return_;
  last_worker_rewards_.assign(worker_rewards.begin(), worker_rewards.end());
  ++steps_;
}

void RewardLedger::accumulate_level(int level, std::span<const double> node_rewards) {
  if (level < 1 || level + 1 >= static_cast<int>(level_returns_.size())) {
    throw Error(ErrorCode::kIndexOutOfRange, "level " + std::to_string(level) + " is not intermediate");
  }
  if (node_rewards.empty()) return;
  double sum = 0.0;
  for (double r : node_rewards) sum += r;
  level_returns_[level] += sum / static_cast<double>(node_rewards.size());
}

}  // namespace fgrl

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
#ifndef FGRL_POLICY_HPP_
#define FGRL_POLICY_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fgrl/graph.hpp"
#include "fgrl/mlp.hpp"

namespace fgrl {

enum class Variant { kFeudGraph, kFeudDeepSet, kDeepSetMlp };
enum class Aggregation { kSum, kMean };
/// kIdentity: the new representation is the aggregated message itself.
/// kResidual: messages are added to the current representation.
enum class UpdateRule { kIdentity, kResidual };

Variant parse_variant(const std::string& name);
const char* to_string(Variant v);
Aggregation parse_aggregation(const std::string& name);
const char* to_string(Aggregation a);
UpdateRule parse_update_rule(const std::string& name);
const char* to_string(UpdateRule u);

struct PolicyConfig {
  Variant variant = Variant::kFeudGraph;
  int state_dim = 5;    // d_s
  int feature_dim = 1;  // d_f; observation x_i = s_i || f_i
  int hidden_dim = 6;   // d_h
  int goal_dim = 5;     // d_g, goals live in state-delta space
  int action_dim = 1;
  int rounds = 1;       // L_r
  Aggregation aggregation = Aggregation::kSum;
  UpdateRule update = UpdateRule::kIdentity;
  int mlp_width = 16;
  int mlp_hidden_layers = 1;
  Activation hidden_activation = Activation::kTanh;
  bool w1_identity = true;
  bool action_uses_representation = false;
  /// When false, rho, phi and psi get one parameter block per hierarchy level.
  bool share_across_levels = true;

  int obs_dim() const { return state_dim + feature_dim; }
  /// Throws kInvalidConfig.
  void validate() const;

  /// Defaults wired for an observation layout: d_h = d_x, d_g = d_s.
  static PolicyConfig for_observation(int state_dim, int feature_dim, Variant variant = Variant::kFeudGraph);

  bool operator==(const PolicyConfig&) const = default;
};

/// Per-worker observation vectors x_i; the first state_dim columns are s_i.
struct Observation {
  int state_dim = 0;
  Matrix x;

  int worker_count() const { return x.rows; }
  std::span<const double> state(int worker) const { return x.row(worker).first(state_dim); }
};

/// h[round][node]: rounds.front() is the initial representation, rounds.back()
/// the one after the last message-passing round.
struct NodeRepresentations {
  std::vector<Matrix> rounds;

  const Matrix& initial() const { return rounds.front(); }
  const Matrix& last() const { return rounds.back(); }
};

/// One goal per hierarchical (parent, child) edge, in Hierarchy::hierarchical_edges() order.
struct GoalSet {
  std::vector<NodePair> edges;
  Matrix goals;

  std::size_t size() const { return edges.size(); }
  std::span<const double> goal(std::size_t edge) const { return goals.row(static_cast<int>(edge)); }
  /// Goal parent -> child, or nullopt.
  std::optional<std::span<const double>> find(int parent, int child) const;
};

/// Actions for level-1 nodes; non-actuated nodes carry an empty vector.
struct ActionSet {
  std::vector<std::vector<double>> per_worker;

  /// Concatenated actions of actuated nodes in node order.
  std::vector<double> flatten() const;
};

struct PolicyOutput {
  ActionSet actions;
  GoalSet goals;
};

struct ParamBlock {
  MlpSpec spec;
  std::size_t offset = 0;
  std::size_t size = 0;

  std::span<const double> view(std::span<const double> params) const { return params.subspan(offset, size); }
};

/// Placement of every function inside the manager and worker vectors.
/// Manager vector: [W1 if learned] rho, phi_neighbor, [phi_children], psi.
/// Worker vector: mu. For DeepSetMlp the manager vector holds rho and mu and
/// the worker vector is empty.
class PolicyLayout {
 public:
  PolicyLayout(const PolicyConfig& config, int level_count);

  std::size_t manager_size() const { return manager_size_; }
  std::size_t worker_size() const { return worker_size_; }

  const std::optional<ParamBlock>& w1() const { return w1_; }
  /// Levels are zero-based (0 = workers). rho/psi are indexed by the level of
  /// the node that owns them (the parent), phi_neighbor by the node's level.
  const ParamBlock& rho(int level) const;
  const ParamBlock* phi_neighbor(int level) const;
  const ParamBlock* phi_children(int level) const;
  const ParamBlock& psi(int level) const;
  const ParamBlock& mu() const { return mu_; }
  /// All manager-vector blocks in packing order.
  std::vector<const ParamBlock*> manager_blocks() const;

 private:
  int levels_;
  bool shared_;
  std::optional<ParamBlock> w1_;
  std::vector<ParamBlock> rho_;
  std::vector<ParamBlock> phi_neighbor_;
  std::vector<ParamBlock> phi_children_;
  std::vector<ParamBlock> psi_;
  ParamBlock mu_;
  std::size_t manager_size_ = 0;
  std::size_t worker_size_ = 0;
};

/// Order-independent aggregation: each component is summed over the operands
/// sorted by value, so any permutation of `terms` gives bit-identical output.
/// Empty input yields zeros.
void aggregate(Aggregation aggregation, std::span<const std::span<const double>> terms, std::span<double> out);

/// The feudal pipeline bound to one hierarchy. Immutable and thread-safe.
class FeudalPolicy {
 public:
  FeudalPolicy(PolicyConfig config, Hierarchy hierarchy);

  const PolicyConfig& config() const { return config_; }
  const Hierarchy& hierarchy() const { return hierarchy_; }
  const PolicyLayout& layout() const { return layout_; }

  NodeRepresentations init_representations(const Observation& obs, std::span<const double> manager) const;
  NodeRepresentations propagate(NodeRepresentations reps, std::span<const double> manager) const;
  GoalSet generate_goals(const NodeRepresentations& reps, std::span<const double> manager) const;
  ActionSet generate_actions(const GoalSet& goals, const NodeRepresentations& reps,
                             std::span<const double> worker) const;
  PolicyOutput step(const Observation& obs, std::span<const double> manager, std::span<const double> worker) const;

 private:
  void check_observation(const Observation& obs) const;
  void check_manager(std::span<const double> manager) const;
  ActionSet deep_set_actions(const Observation& obs, std::span<const double> manager) const;

  PolicyConfig config_;
  Hierarchy hierarchy_;
  PolicyLayout layout_;
};

NodeRepresentations init_representations(const PolicyConfig& cfg, const Hierarchy& hier, const Observation& obs,
                                         std::span<const double> manager);
NodeRepresentations propagate(const PolicyConfig& cfg, const Hierarchy& hier, const NodeRepresentations& reps,
                              std::span<const double> manager);
GoalSet generate_goals(const PolicyConfig& cfg, const Hierarchy& hier, const NodeRepresentations& reps,
                       std::span<const double> manager);
ActionSet generate_actions(const PolicyConfig& cfg, const Hierarchy& hier, const GoalSet& goals,
                           const NodeRepresentations& reps, std::span<const double> worker);
PolicyOutput policy_step(const PolicyConfig& cfg, const Hierarchy& hier, const Observation& obs,
                         std::span<const double> manager, std::span<const double> worker);

}  // namespace fgrl

#endif  // FGRL_POLICY_HPP_

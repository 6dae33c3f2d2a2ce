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
#include "fgrl/policy.hpp"

#include <algorithm>
#include <cmath>

#include "fgrl/error.hpp"

namespace fgrl {
namespace {

MlpSpec make_spec(const PolicyConfig& cfg, int in, int out, Activation output) {
  MlpSpec spec;
  spec.layer_sizes.push_back(in);
  for (int i = 0; i < cfg.mlp_hidden_layers; ++i) spec.layer_sizes.push_back(cfg.mlp_width);
  spec.layer_sizes.push_back(out);
  spec.hidden = cfg.hidden_activation;
  spec.output = output;
  return spec;
}

void concat(std::span<const double> a, std::span<const double> b, std::vector<double>& out) {
  out.resize(a.size() + b.size());
  std::copy(a.begin(), a.end(), out.begin());
  std::copy(b.begin(), b.end(), out.begin() + static_cast<std::ptrdiff_t>(a.size()));
}

void concat(std::span<const double> a, std::span<const double> b, std::span<const double> c,
            std::vector<double>& out) {
  out.resize(a.size() + b.size() + c.size());
  auto it = std::copy(a.begin(), a.end(), out.begin());
  it = std::copy(b.begin(), b.end(), it);
  std::copy(c.begin(), c.end(), it);
}

}  // namespace

Variant parse_variant(const std::string& name) {
  if (name == "feudgraph") return Variant::kFeudGraph;
  if (name == "feuddeepset") return Variant::kFeudDeepSet;
  if (name == "deepsetmlp") return Variant::kDeepSetMlp;
  throw Error(ErrorCode::kInvalidConfig, "unknown variant '" + name + "'");
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::kFeudGraph: return "feudgraph";
    case Variant::kFeudDeepSet: return "feuddeepset";
    case Variant::kDeepSetMlp: return "deepsetmlp";
  }
  return "feudgraph";
}

Aggregation parse_aggregation(const std::string& name) {
  if (name == "sum") return Aggregation::kSum;
  if (name == "mean") return Aggregation::kMean;
  throw Error(ErrorCode::kInvalidConfig, "unknown aggregation '" + name + "'");
}

const char* to_string(Aggregation a) { return a == Aggregation::kSum ? "sum" : "mean"; }

UpdateRule parse_update_rule(const std::string& name) {
  if (name == "identity") return UpdateRule::kIdentity;
  if (name == "residual") return UpdateRule::kResidual;
  throw Error(ErrorCode::kInvalidConfig, "unknown update rule '" + name + "'");
}

const char* to_string(UpdateRule u) { return u == UpdateRule::kIdentity ? "identity" : "residual"; }

void PolicyConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (state_dim < 1 || feature_dim < 0) fail("state_dim must be >= 1 and feature_dim >= 0");
  if (hidden_dim < 1 || goal_dim < 1 || action_dim < 1) fail("hidden, goal and action dims must be >= 1");
  if (rounds < 1) fail("rounds must be >= 1");
  if (mlp_width < 1 || mlp_hidden_layers < 0) fail("invalid MLP width/depth");
  if (w1_identity && hidden_dim != obs_dim()) {
    fail("identity W1 requires hidden_dim == obs_dim (" + std::to_string(obs_dim()) + ")");
  }
}

PolicyConfig PolicyConfig::for_observation(int state_dim, int feature_dim, Variant variant) {
  PolicyConfig cfg;
  cfg.variant = variant;
  cfg.state_dim = state_dim;
  cfg.feature_dim = feature_dim;
  cfg.hidden_dim = state_dim + feature_dim;
  cfg.goal_dim = state_dim;
  return cfg;
}

std::optional<std::span<const double>> GoalSet::find(int parent, int child) const {
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].first == parent && edges[e].second == child) return goal(e);
  }
  return std::nullopt;
}

std::vector<double> ActionSet::flatten() const {
  std::vector<double> out;
  for (const auto& a : per_worker) out.insert(out.end(), a.begin(), a.end());
  return out;
}

PolicyLayout::PolicyLayout(const PolicyConfig& cfg, int level_count)
    : levels_(level_count), shared_(cfg.share_across_levels) {
  cfg.validate();
  std::size_t cursor = 0;
  auto place = [&cursor](MlpSpec spec) {
    ParamBlock b{std::move(spec), cursor, 0};
    b.size = param_count(b.spec);
    cursor += b.size;
    return b;
  };

  const int dh = cfg.hidden_dim;
  if (cfg.variant == Variant::kDeepSetMlp) {
    rho_.push_back(place(make_spec(cfg, cfg.obs_dim(), dh, Activation::kIdentity)));
    mu_ = place(make_spec(cfg, cfg.obs_dim() + dh, cfg.action_dim, Activation::kTanh));
    manager_size_ = cursor;
    worker_size_ = 0;
    return;
  }
  if (level_count < 2) throw Error(ErrorCode::kInvalidConfig, "feudal policies need at least two levels");

  if (!cfg.w1_identity) {
    // Bias-free linear map d_h x d_x; the spec only records its shape.
    MlpSpec shape{{cfg.obs_dim(), dh}, Activation::kIdentity, Activation::kIdentity};
    ParamBlock b{shape, cursor, static_cast<std::size_t>(dh) * cfg.obs_dim()};
    cursor += b.size;
    w1_ = b;
  }
  const int per_level = shared_ ? 1 : level_count - 1;
  for (int i = 0; i < per_level; ++i) rho_.push_back(place(make_spec(cfg, dh, dh, Activation::kIdentity)));
  if (cfg.variant == Variant::kFeudGraph) {
    for (int i = 0; i < per_level; ++i) {
      phi_neighbor_.push_back(place(make_spec(cfg, 2 * dh, dh, Activation::kIdentity)));
    }
  }
  if (level_count > 2) {
    for (int i = 0; i < per_level; ++i) {
      phi_children_.push_back(place(make_spec(cfg, 2 * dh, dh, Activation::kIdentity)));
    }
  }
  for (int i = 0; i < per_level; ++i) psi_.push_back(place(make_spec(cfg, 3 * dh, cfg.goal_dim, Activation::kIdentity)));
  manager_size_ = cursor;

  cursor = 0;
  const int mu_in = cfg.goal_dim + (cfg.action_uses_representation ? dh : 0);
  mu_ = place(make_spec(cfg, mu_in, cfg.action_dim, Activation::kTanh));
  worker_size_ = cursor;
}

const ParamBlock& PolicyLayout::rho(int level) const {
  if (rho_.size() == 1) return rho_.front();
  return rho_.at(level - 1);
}

const ParamBlock* PolicyLayout::phi_neighbor(int level) const {
  if (phi_neighbor_.empty()) return nullptr;
  return shared_ ? &phi_neighbor_.front() : &phi_neighbor_.at(level);
}

const ParamBlock* PolicyLayout::phi_children(int level) const {
  if (phi_children_.empty() || level < 1) return nullptr;
  return shared_ ? &phi_children_.front() : &phi_children_.at(level - 1);
}

const ParamBlock& PolicyLayout::psi(int level) const {
  return shared_ ? psi_.front() : psi_.at(level - 1);
}

std::vector<const ParamBlock*> PolicyLayout::manager_blocks() const {
  std::vector<const ParamBlock*> out;
  if (w1_) out.push_back(&*w1_);
  for (const auto* group : {&rho_, &phi_neighbor_, &phi_children_, &psi_}) {
    for (const auto& b : *group) out.push_back(&b);
  }
  if (worker_size_ == 0) out.push_back(&mu_);
  return out;
}

void aggregate(Aggregation aggregation, std::span<const std::span<const double>> terms, std::span<double> out) {
  const std::size_t n = terms.size();
  if (n == 0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  if (n == 1) {
    std::copy(terms[0].begin(), terms[0].end(), out.begin());
    return;
  }
  thread_local std::vector<double> column;
  column.resize(n);
  for (std::size_t c = 0; c < out.size(); ++c) {
    for (std::size_t k = 0; k < n; ++k) column[k] = terms[k][c];
    std::sort(column.begin(), column.end());
    double acc = 0.0;
    for (double v : column) acc += v;
    out[c] = aggregation == Aggregation::kMean ? acc / static_cast<double>(n) : acc;
  }
}

FeudalPolicy::FeudalPolicy(PolicyConfig config, Hierarchy hierarchy)
    : config_(std::move(config)), hierarchy_(std::move(hierarchy)), layout_(config_, hierarchy_.level_count()) {}

void FeudalPolicy::check_observation(const Observation& obs) const {
  if (obs.x.rows != hierarchy_.worker_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "observation has " + std::to_string(obs.x.rows) +
                                                   " workers, hierarchy has " +
                                                   std::to_string(hierarchy_.worker_count()));
  }
  if (obs.x.cols != config_.obs_dim() || obs.state_dim != config_.state_dim) {
    throw Error(ErrorCode::kDimensionMismatch, "observation width " + std::to_string(obs.x.cols) +
                                                   " does not match d_x = " + std::to_string(config_.obs_dim()));
  }
  for (double v : obs.x.data) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteInput, "observation contains a non-finite value");
  }
}

void FeudalPolicy::check_manager(std::span<const double> manager) const {
  if (manager.size() != layout_.manager_size()) {
    throw Error(ErrorCode::kDimensionMismatch, "manager vector has " + std::to_string(manager.size()) +
                                                   " entries, expected " + std::to_string(layout_.manager_size()));
  }
}

NodeRepresentations FeudalPolicy::init_representations(const Observation& obs, std::span<const double> manager) const {
  if (config_.variant == Variant::kDeepSetMlp) {
    throw Error(ErrorCode::kInvalidConfig, "deepsetmlp has no hierarchical representations");
  }
  check_observation(obs);
  check_manager(manager);
  const int dh = config_.hidden_dim;
  const int dx = config_.obs_dim();
  Matrix h(hierarchy_.node_count(), dh);

  for (int i = 0; i < hierarchy_.worker_count(); ++i) {
    auto x = obs.x.row(i);
    auto out = h.row(i);
    if (const auto& w1 = layout_.w1()) {
      auto w = w1->view(manager);
      for (int r = 0; r < dh; ++r) {
        double acc = 0.0;
        for (int c = 0; c < dx; ++c) acc += w[static_cast<std::size_t>(r) * dx + c] * x[c];
        out[r] = acc;
      }
    } else {
      std::copy(x.begin(), x.end(), out.begin());
    }
  }

  // Upper nodes: AGGR over children of rho(h_child), bottom-up.
  Matrix transformed(hierarchy_.node_count(), dh);
  std::vector<std::span<const double>> terms;
  for (int level = 1; level < hierarchy_.level_count(); ++level) {
    const auto& rho = layout_.rho(level);
    const auto params = rho.view(manager);
    for (int i = hierarchy_.level_offset(level - 1); i < hierarchy_.level_offset(level); ++i) {
      forward(rho.spec, params, h.row(i), transformed.row(i));
    }
    for (int i = hierarchy_.level_offset(level); i < hierarchy_.level_offset(level + 1); ++i) {
      terms.clear();
      for (int c : hierarchy_.children(i)) terms.push_back(transformed.row(c));
      aggregate(config_.aggregation, terms, h.row(i));
    }
  }
  NodeRepresentations reps;
  reps.rounds.push_back(std::move(h));
  return reps;
}

NodeRepresentations FeudalPolicy::propagate(NodeRepresentations reps, std::span<const double> manager) const {
  check_manager(manager);
  const int dh = config_.hidden_dim;
  if (reps.rounds.empty() || reps.rounds.front().rows != hierarchy_.node_count() ||
      reps.rounds.front().cols != dh) {
    throw Error(ErrorCode::kDimensionMismatch, "initial representations do not match the hierarchy");
  }
  reps.rounds.resize(1);
  const int top = hierarchy_.level_count() - 1;
  std::vector<std::vector<double>> messages;
  std::vector<std::span<const double>> terms;
  std::vector<double> pair;
  std::vector<double> neighbor_msg(dh), child_msg(dh);

  for (int round = 0; round < config_.rounds; ++round) {
    const Matrix& h = reps.rounds.back();
    Matrix next(h.rows, dh);
    for (int i = 0; i < hierarchy_.node_count(); ++i) {
      const int level = hierarchy_.level_of(i);
      const bool neighbor_term = level < top;
      const ParamBlock* phi_c = layout_.phi_children(level);
      const bool child_term = phi_c != nullptr;
      auto out = next.row(i);
      if (!neighbor_term && !child_term) {
        auto cur = h.row(i);
        std::copy(cur.begin(), cur.end(), out.begin());
        continue;
      }

      if (neighbor_term) {
        // FeudDeepSet runs the same update with every neighbourhood empty.
        const ParamBlock* phi_n = layout_.phi_neighbor(level);
        std::span<const int> nbrs;
        if (phi_n != nullptr) nbrs = hierarchy_.neighbors(i);
        messages.resize(nbrs.size());
        terms.clear();
        for (std::size_t k = 0; k < nbrs.size(); ++k) {
          concat(h.row(i), h.row(nbrs[k]), pair);
          messages[k].resize(dh);
          forward(phi_n->spec, phi_n->view(manager), pair, messages[k]);
          terms.emplace_back(messages[k]);
        }
        aggregate(config_.aggregation, terms, neighbor_msg);
      }
      if (child_term) {
        auto kids = hierarchy_.children(i);
        messages.resize(kids.size());
        terms.clear();
        for (std::size_t k = 0; k < kids.size(); ++k) {
          concat(h.row(i), h.row(kids[k]), pair);
          messages[k].resize(dh);
          forward(phi_c->spec, phi_c->view(manager), pair, messages[k]);
          terms.emplace_back(messages[k]);
        }
        aggregate(config_.aggregation, terms, child_msg);
      }

      for (int c = 0; c < dh; ++c) {
        double m;
        if (neighbor_term && child_term) {
          m = neighbor_msg[c] + child_msg[c];
        } else {
          m = neighbor_term ? neighbor_msg[c] : child_msg[c];
        }
        out[c] = config_.update == UpdateRule::kResidual ? h(i, c) + m : m;
      }
    }
    reps.rounds.push_back(std::move(next));
  }
  return reps;
}

GoalSet FeudalPolicy::generate_goals(const NodeRepresentations& reps, std::span<const double> manager) const {
  check_manager(manager);
  if (reps.rounds.empty() || reps.last().rows != hierarchy_.node_count() || reps.last().cols != config_.hidden_dim) {
    throw Error(ErrorCode::kDimensionMismatch, "representations do not match the hierarchy");
  }
  const auto& edges = hierarchy_.hierarchical_edges();
  GoalSet goals{edges, Matrix(static_cast<int>(edges.size()), config_.goal_dim)};
  const Matrix& last = reps.last();
  const Matrix& first = reps.initial();
  std::vector<double> input;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [parent, child] = edges[e];
    const auto& psi = layout_.psi(hierarchy_.level_of(parent));
    concat(last.row(parent), last.row(child), first.row(child), input);
    forward(psi.spec, psi.view(manager), input, goals.goals.row(static_cast<int>(e)));
  }
  return goals;
}

ActionSet FeudalPolicy::generate_actions(const GoalSet& goals, const NodeRepresentations& reps,
                                         std::span<const double> worker) const {
  if (worker.size() != layout_.worker_size()) {
    throw Error(ErrorCode::kDimensionMismatch, "worker vector has " + std::to_string(worker.size()) +
                                                   " entries, expected " + std::to_string(layout_.worker_size()));
  }
  if (goals.edges != hierarchy_.hierarchical_edges()) {
    throw Error(ErrorCode::kMissingGoal, "goal set does not cover the hierarchy's edges");
  }
  if (goals.goals.cols != config_.goal_dim) {
    throw Error(ErrorCode::kDimensionMismatch, "goal width does not match d_g");
  }
  const auto& mu = layout_.mu();
  const auto params = mu.view(worker);
  const int k = hierarchy_.worker_count();
  ActionSet actions;
  actions.per_worker.resize(k);
  std::vector<std::span<const double>> terms;
  std::vector<double> goal(config_.goal_dim);
  std::vector<double> input;
  std::vector<double> out(config_.action_dim);
  for (int i = 0; i < k; ++i) {
    const auto parents = hierarchy_.parents(i);
    if (parents.empty()) throw Error(ErrorCode::kMissingGoal, "worker " + std::to_string(i) + " has no supervisor");
    terms.clear();
    for (std::size_t p = 0; p < parents.size(); ++p) {
      terms.push_back(goals.goal(hierarchy_.edge_index(i, static_cast<int>(p))));
    }
    aggregate(config_.aggregation, terms, goal);
    if (config_.action_uses_representation) {
      concat(goal, reps.last().row(i), input);
      forward(mu.spec, params, input, out);
    } else {
      forward(mu.spec, params, goal, out);
    }
    if (hierarchy_.base().actuated(i)) actions.per_worker[i] = out;
  }
  return actions;
}

ActionSet FeudalPolicy::deep_set_actions(const Observation& obs, std::span<const double> manager) const {
  check_observation(obs);
  check_manager(manager);
  const int k = obs.worker_count();
  const auto& rho = layout_.rho(1);
  const auto& mu = layout_.mu();
  Matrix encoded(k, config_.hidden_dim);
  std::vector<std::span<const double>> terms;
  for (int i = 0; i < k; ++i) {
    forward(rho.spec, rho.view(manager), obs.x.row(i), encoded.row(i));
    terms.push_back(encoded.row(i));
  }
  std::vector<double> pooled(config_.hidden_dim);
  aggregate(config_.aggregation, terms, pooled);
  ActionSet actions;
  actions.per_worker.resize(k);
  std::vector<double> input;
  std::vector<double> out(config_.action_dim);
  for (int i = 0; i < k; ++i) {
    concat(obs.x.row(i), pooled, input);
    forward(mu.spec, mu.view(manager), input, out);
    if (hierarchy_.base().actuated(i)) actions.per_worker[i] = out;
  }
  return actions;
}

PolicyOutput FeudalPolicy::step(const Observation& obs, std::span<const double> manager,
                                std::span<const double> worker) const {
  if (config_.variant == Variant::kDeepSetMlp) {
    if (!worker.empty()) throw Error(ErrorCode::kDimensionMismatch, "deepsetmlp has no worker vector");
    return {deep_set_actions(obs, manager), GoalSet{}};
  }
  auto reps = propagate(init_representations(obs, manager), manager);
  auto goals = generate_goals(reps, manager);
  auto actions = generate_actions(goals, reps, worker);
  return {std::move(actions), std::move(goals)};
}

NodeRepresentations init_representations(const PolicyConfig& cfg, const Hierarchy& hier, const Observation& obs,
                                         std::span<const double> manager) {
  return FeudalPolicy(cfg, hier).init_representations(obs, manager);
}

NodeRepresentations propagate(const PolicyConfig& cfg, const Hierarchy& hier, const NodeRepresentations& reps,
                              std::span<const double> manager) {
  return FeudalPolicy(cfg, hier).propagate(reps, manager);
}

GoalSet generate_goals(const PolicyConfig& cfg, const Hierarchy& hier, const NodeRepresentations& reps,
                       std::span<const double> manager) {
  return FeudalPolicy(cfg, hier).generate_goals(reps, manager);
}

ActionSet generate_actions(const PolicyConfig& cfg, const Hierarchy& hier, const GoalSet& goals,
                           const NodeRepresentations& reps, std::span<const double> worker) {
  return FeudalPolicy(cfg, hier).generate_actions(goals, reps, worker);
}

PolicyOutput policy_step(const PolicyConfig& cfg, const Hierarchy& hier, const Observation& obs,
                         std::span<const double> manager, std::span<const double> worker) {
  return FeudalPolicy(cfg, hier).step(obs, manager, worker);
}

}  // namespace fgrl

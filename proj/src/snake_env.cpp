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
#include "fgrl/snake_env.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "fgrl/error.hpp"

namespace fgrl {
namespace {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

Vec2 tangent(double angle) { return {std::cos(angle), std::sin(angle)}; }
Vec2 normal(double angle) { return {-std::sin(angle), std::cos(angle)}; }

// Joint j joins the rear end of link j to the front end of link j+1. With
// the link angles held fixed, the mass-weighted closest chain to any set of
// centres is the rigid chain translated onto the centre of mass, so this is
// the position projection.
void place_links(EnvState& state, const SnakeConfig& cfg) {
  const double half = 0.5 * cfg.link_length;
  auto& links = state.links;
  const std::size_t n = links.size();
  links[0].position.setZero();
  for (std::size_t j = 0; j + 1 < n; ++j) {
    links[j + 1].position = links[j].position - half * (tangent(links[j].angle) + tangent(links[j + 1].angle));
  }
  Vec2 mean = Vec2::Zero();
  for (const auto& l : links) mean += l.position;
  mean /= static_cast<double>(n);
  const Vec2 shift = state.com - mean;
  for (auto& l : links) l.position += shift;
}

// Removes the component of the generalized velocity that violates the joint
// velocity constraints, i.e. the projection onto the constraint null space in
// the kinetic-energy metric. The 2x2 block-tridiagonal system is solved with
// the block Thomas algorithm.
void project_velocities(EnvState& state, const SnakeConfig& cfg) {
  auto& links = state.links;
  const int joints = static_cast<int>(links.size()) - 1;
  if (joints < 1) return;
  const double half = 0.5 * cfg.link_length;
  const double inv_m = 1.0 / cfg.link_mass;
  const double inv_i = 1.0 / cfg.link_inertia();
  const double arm = half * half * inv_i;

  std::vector<Vec2> normals(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) normals[i] = normal(links[i].angle);

  std::vector<Mat2> diag(joints), upper(std::max(joints - 1, 0));
  std::vector<Vec2> rhs(joints);
  for (int j = 0; j < joints; ++j) {
    const Vec2& na = normals[j];
    const Vec2& nb = normals[j + 1];
    diag[j] = 2.0 * inv_m * Mat2::Identity() + arm * (na * na.transpose() + nb * nb.transpose());
    if (j + 1 < joints) upper[j] = -inv_m * Mat2::Identity() + arm * (nb * nb.transpose());
    rhs[j] = links[j].velocity - half * links[j].angular_velocity * na - links[j + 1].velocity -
             half * links[j + 1].angular_velocity * nb;
  }

  std::vector<Mat2> pivot_inv(joints);
  pivot_inv[0] = diag[0].inverse();
  for (int j = 1; j < joints; ++j) {
    const Mat2 g = upper[j - 1].transpose() * pivot_inv[j - 1];
    diag[j] -= g * upper[j - 1];
    rhs[j] -= g * rhs[j - 1];
    pivot_inv[j] = diag[j].inverse();
  }
  std::vector<Vec2> lambda(joints);
  lambda[joints - 1] = pivot_inv[joints - 1] * rhs[joints - 1];
  for (int j = joints - 2; j >= 0; --j) lambda[j] = pivot_inv[j] * (rhs[j] - upper[j] * lambda[j + 1]);

  for (int j = 0; j < joints; ++j) {
    const Vec2& f = lambda[j];
    links[j].velocity -= inv_m * f;
    links[j].angular_velocity += half * normals[j].dot(f) * inv_i;
    links[j + 1].velocity += inv_m * f;
    links[j + 1].angular_velocity += half * normals[j + 1].dot(f) * inv_i;
  }
}

bool state_finite(const EnvState& state) {
  if (!state.com.allFinite()) return false;
  for (const auto& l : state.links) {
    if (!l.position.allFinite() || !l.velocity.allFinite() || !std::isfinite(l.angle) ||
        !std::isfinite(l.angular_velocity)) {
      return false;
    }
  }
  return true;
}

std::atomic<bool> g_clamp_warned{false};

}  // namespace

void SnakeConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (limb_count < 1 || limb_count > 16) fail("limb_count must be in [1, 16]");
  if (!(dt > 0.0)) fail("dt must be positive");
  if (substeps < 1) fail("substeps must be >= 1");
  if (!(link_length > 0.0) || !(link_mass > 0.0)) fail("link length and mass must be positive");
  if (!(drag_tangential > 0.0) || !(drag_normal > drag_tangential)) {
    fail("drag coefficients must satisfy c_n > c_t > 0");
  }
  if (!(torque_scale >= 0.0)) fail("torque_scale must be non-negative");
  if (max_steps < 1) fail("max_steps must be >= 1");
  if (!(reset_noise >= 0.0)) fail("reset_noise must be non-negative");
}

MorphGraph make_morphology(int limb_count) {
  if (limb_count < 1 || limb_count > 16) {
    throw Error(ErrorCode::kInvalidLimbCount, "limb count " + std::to_string(limb_count) + " outside [1, 16]");
  }
  std::vector<NodePair> edges;
  for (int i = 0; i + 1 < limb_count; ++i) edges.emplace_back(i, i + 1);
  std::vector<bool> actuated(limb_count, true);
  actuated[0] = false;
  return build_morph_graph(limb_count, edges, actuated, 0);
}

EnvState reset(const SnakeConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  EnvState state;
  state.links.resize(cfg.limb_count);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-cfg.reset_noise, cfg.reset_noise);
  double angle = 0.0;
  for (int i = 0; i < cfg.limb_count; ++i) {
    if (i > 0 && !cfg.zero_perturbation) angle += noise(rng);
    state.links[i].angle = angle;
  }
  state.com.setZero();
  place_links(state, cfg);
  return state;
}

void integrate_substep(EnvState& state, std::span<const double> torques, const SnakeConfig& cfg) {
  const double h = cfg.dt;
  const double m = cfg.link_mass;
  const double inertia = cfg.link_inertia();
  const double rot_drag = cfg.drag_normal * cfg.link_length * cfg.link_length / 12.0;
  auto& links = state.links;
  const std::size_t n = links.size();

  for (std::size_t i = 0; i < n; ++i) {
    auto& l = links[i];
    const Vec2 t = tangent(l.angle);
    const Vec2 nn = normal(l.angle);
    const Vec2 force = -cfg.drag_tangential * l.velocity.dot(t) * t - cfg.drag_normal * l.velocity.dot(nn) * nn;
    double torque = -rot_drag * l.angular_velocity;
    if (i + 1 < n) torque -= torques[i];  // joint i pushes link i back
    if (i > 0) torque += torques[i - 1];  // and link i+1 forward
    l.velocity += (h / m) * force;
    l.angular_velocity += (h / inertia) * torque;
  }

  project_velocities(state, cfg);

  Vec2 mean_velocity = Vec2::Zero();
  for (const auto& l : links) mean_velocity += l.velocity;
  mean_velocity /= static_cast<double>(n);
  state.com += h * mean_velocity;
  for (auto& l : links) l.angle += h * l.angular_velocity;
  place_links(state, cfg);
}

StepResult step(const EnvState& state, std::span<const double> actions, const SnakeConfig& cfg,
                const MorphGraph& graph) {
  if (static_cast<int>(state.links.size()) != cfg.limb_count) {
    throw Error(ErrorCode::kGraphStateMismatch, "state does not match limb_count");
  }
  if (static_cast<int>(actions.size()) != cfg.joint_count()) {
    throw Error(ErrorCode::kActionDimensionMismatch, "expected " + std::to_string(cfg.joint_count()) +
                                                         " actions, got " + std::to_string(actions.size()));
  }
  std::vector<double> torques(actions.size());
  for (std::size_t j = 0; j < actions.size(); ++j) {
    double a = actions[j];
    if (!std::isfinite(a)) throw Error(ErrorCode::kNonFiniteInput, "action is not finite");
    if (a < -1.0 || a > 1.0) {
      if (cfg.strict_actions) {
        throw Error(ErrorCode::kActionOutOfRange, "action " + std::to_string(a) + " outside [-1, 1]");
      }
      if (!g_clamp_warned.exchange(true)) {
        spdlog::warn("action {} outside [-1, 1] clamped (further clamps are silent)", a);
      }
      a = std::clamp(a, -1.0, 1.0);
    }
    torques[j] = a * cfg.torque_scale;
  }

  StepResult result;
  result.state = state;
  for (int s = 0; s < cfg.substeps; ++s) integrate_substep(result.state, torques, cfg);
  result.state.step = state.step + 1;

  const bool finite = state_finite(result.state);
  const bool crashed = !finite || max_joint_gap(result.state, cfg) > kCrashJointGap;
  result.state.crashed = crashed;
  result.crashed = crashed;
  result.reward = (result.state.com.x() - state.com.x()) / cfg.control_period();
  result.done = crashed || result.state.step >= cfg.max_steps;
  result.obs = observe(result.state, graph);
  return result;
}

Observation observe(const EnvState& state, const MorphGraph& graph) {
  const int n = static_cast<int>(state.links.size());
  if (graph.node_count() != n) {
    throw Error(ErrorCode::kGraphStateMismatch, "graph has " + std::to_string(graph.node_count()) +
                                                    " nodes, state has " + std::to_string(n) + " links");
  }
  const auto hops = hop_distances_to_torso(graph);
  Observation obs{kLimbStateDim, Matrix(n, kLimbStateDim + kLimbFeatureDim)};
  for (int i = 0; i < n; ++i) {
    const auto& l = state.links[i];
    const Vec2 t = tangent(l.angle);
    const Vec2 nn = normal(l.angle);
    auto row = obs.x.row(i);
    row[0] = t.y();
    row[1] = t.x();
    row[2] = l.angular_velocity;
    row[3] = l.velocity.dot(t);
    row[4] = l.velocity.dot(nn);
    row[5] = static_cast<double>(hops[i]) / static_cast<double>(n);
  }
  return obs;
}

double kinetic_energy(const EnvState& state, const SnakeConfig& cfg) {
  double e = 0.0;
  for (const auto& l : state.links) {
    e += 0.5 * cfg.link_mass * l.velocity.squaredNorm() + 0.5 * cfg.link_inertia() * l.angular_velocity * l.angular_velocity;
  }
  return e;
}

double max_joint_gap(const EnvState& state, const SnakeConfig& cfg) {
  const double half = 0.5 * cfg.link_length;
  double gap = 0.0;
  for (std::size_t j = 0; j + 1 < state.links.size(); ++j) {
    const auto& a = state.links[j];
    const auto& b = state.links[j + 1];
    const Vec2 rear = a.position - half * tangent(a.angle);
    const Vec2 front = b.position + half * tangent(b.angle);
    const double d = (rear - front).norm();
    if (!(d <= gap)) gap = d;  // NaN propagates
  }
  return gap;
}

SnakeEnv::SnakeEnv(SnakeConfig cfg, MorphGraph graph) : cfg_(cfg), graph_(std::move(graph)) {
  cfg_.validate();
  if (graph_.node_count() != cfg_.limb_count) {
    throw Error(ErrorCode::kGraphStateMismatch, "graph node count differs from limb_count");
  }
  state_ = fgrl::reset(cfg_, 0);
}

Observation SnakeEnv::reset(std::uint64_t seed) {
  state_ = fgrl::reset(cfg_, seed);
  return observe(state_, graph_);
}

StepResult SnakeEnv::step(std::span<const double> actions) {
  auto result = fgrl::step(state_, actions, cfg_, graph_);
  state_ = result.state;
  return result;
}

}  // namespace fgrl

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
#ifndef FGRL_SNAKE_ENV_HPP_
#define FGRL_SNAKE_ENV_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fgrl/graph.hpp"
#include "fgrl/policy.hpp"

namespace fgrl {

/// Planar chain of rigid links swimming in a viscous medium with
/// anisotropic (resistive-force) drag. Link 0 is the head/torso.
struct SnakeConfig {
  int limb_count = 5;
  double link_length = 0.5;       // m
  double link_mass = 1.0;         // kg
  double dt = 0.01;               // s, integration step
  int substeps = 5;               // integration steps per action
  double drag_tangential = 0.1;   // N s / m
  double drag_normal = 3.0;       // N s / m
  double torque_scale = 1.0;      // N m per unit action
  int max_steps = 1000;
  double reset_noise = 0.01;      // rad, per joint
  bool zero_perturbation = false;
  bool strict_actions = false;

  double control_period() const { return dt * substeps; }
  double link_inertia() const { return link_mass * link_length * link_length / 12.0; }
  int joint_count() const { return limb_count - 1; }
  /// Throws kInvalidConfig.
  void validate() const;

  bool operator==(const SnakeConfig&) const = default;
};

inline constexpr int kLimbStateDim = 5;  // sin, cos, omega, v_forward, v_lateral
inline constexpr int kLimbFeatureDim = 1;  // hop distance to torso / N
inline constexpr double kJointTolerance = 1e-9;
inline constexpr double kCrashJointGap = 1e-6;

struct LinkState {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // centre, m
  double angle = 0.0;                                  // rad, world frame
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();  // m/s
  double angular_velocity = 0.0;                       // rad/s
};

struct EnvState {
  std::vector<LinkState> links;
  Eigen::Vector2d com = Eigen::Vector2d::Zero();
  int step = 0;
  bool crashed = false;
};

struct StepResult {
  EnvState state;
  double reward = 0.0;
  bool done = false;
  bool crashed = false;
  Observation obs;
};

/// Chain 0-1-...-(N-1), torso 0 unactuated, limb i > 0 owns joint i-1.
/// Throws kInvalidLimbCount (N outside [1, 16]); N = 1 surfaces kNoActuator.
MorphGraph make_morphology(int limb_count);

/// Collinear chain along +x with seeded joint perturbation, at rest, COM at 0.
EnvState reset(const SnakeConfig& cfg, std::uint64_t seed);

/// One control step. Actions: one scalar per joint in [-1, 1].
/// Throws kActionDimensionMismatch, or kActionOutOfRange in strict mode
/// (otherwise out-of-range actions are clamped with a warning).
StepResult step(const EnvState& state, std::span<const double> actions, const SnakeConfig& cfg,
                const MorphGraph& graph);

/// One integration step with constant joint torques (already scaled).
void integrate_substep(EnvState& state, std::span<const double> torques, const SnakeConfig& cfg);

/// Per-limb (sin, cos, omega, v_forward, v_lateral) plus hop distance / N.
/// Throws kGraphStateMismatch.
Observation observe(const EnvState& state, const MorphGraph& graph);

double kinetic_energy(const EnvState& state, const SnakeConfig& cfg);
/// Largest distance between coincident joint endpoints.
double max_joint_gap(const EnvState& state, const SnakeConfig& cfg);

/// Stateful wrapper owning configuration, graph and current state.
class SnakeEnv {
 public:
  SnakeEnv(SnakeConfig cfg, MorphGraph graph);

  Observation reset(std::uint64_t seed);
  StepResult step(std::span<const double> actions);

  const EnvState& state() const { return state_; }
  void set_state(EnvState state) { state_ = std::move(state); }
  const SnakeConfig& config() const { return cfg_; }
  const MorphGraph& graph() const { return graph_; }

 private:
  SnakeConfig cfg_;
  MorphGraph graph_;
  EnvState state_;
};

}  // namespace fgrl

#endif  // FGRL_SNAKE_ENV_HPP_

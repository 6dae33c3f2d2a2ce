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
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Geometry>

#include "doctest.h"
#include "fgrl/policy.hpp"
#include "fgrl/snake_env.hpp"
#include "oracles/golden_gait.hpp"
#include "test_support.hpp"

namespace {

using fgrl::ErrorCode;
using Vec = std::vector<double>;

fgrl::SnakeConfig config(int n) {
  fgrl::SnakeConfig cfg;
  cfg.limb_count = n;
  return cfg;
}

// A reachable state: a random bent chain moving with constraint-consistent velocities.
fgrl::EnvState random_state(std::mt19937_64& rng, const fgrl::SnakeConfig& cfg) {
  auto bent = cfg;
  bent.reset_noise = 0.8;
  auto state = fgrl::reset(bent, rng());
  std::normal_distribution<double> normal;
  for (auto& l : state.links) {
    l.velocity = {normal(rng), normal(rng)};
    l.angular_velocity = normal(rng);
  }
  const Vec zero(cfg.joint_count(), 0.0);
  fgrl::integrate_substep(state, zero, cfg);
  return state;
}

bool states_equal(const fgrl::EnvState& a, const fgrl::EnvState& b) {
  if (a.links.size() != b.links.size() || a.step != b.step || a.com != b.com) return false;
  for (std::size_t i = 0; i < a.links.size(); ++i) {
    const auto &x = a.links[i], &y = b.links[i];
    if (x.position != y.position || x.velocity != y.velocity || x.angle != y.angle ||
        x.angular_velocity != y.angular_velocity) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("morphology for a snake") {
  const auto g3 = fgrl::make_morphology(3);
  CHECK(g3.edges() == std::vector<fgrl::NodePair>{{0, 1}, {1, 2}});
  CHECK(g3.actuator_count() == 2);
  CHECK_FALSE(g3.actuated(0));
  CHECK(g3.torso() == 0);
  CHECK(fgrl::make_morphology(7).actuator_count() == 6);
  CHECK_ERROR_CODE(fgrl::make_morphology(1), ErrorCode::kNoActuator);
  CHECK_ERROR_CODE(fgrl::make_morphology(0), ErrorCode::kInvalidLimbCount);
  CHECK_ERROR_CODE(fgrl::make_morphology(17), ErrorCode::kInvalidLimbCount);
}

TEST_CASE("config validation") {
  auto cfg = config(5);
  cfg.drag_normal = cfg.drag_tangential;
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::kInvalidConfig);
  cfg = config(5);
  cfg.drag_tangential = 0.0;
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::kInvalidConfig);
  cfg = config(5);
  cfg.dt = 0.0;
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::kInvalidConfig);
  cfg = config(17);
  CHECK_ERROR_CODE(fgrl::reset(cfg, 0), ErrorCode::kInvalidConfig);
  CHECK(config(5).control_period() == doctest::Approx(0.05));
}

TEST_CASE("reset") {
  for (int n = 3; n <= 7; ++n) {
    const auto cfg = config(n);
    const auto a = fgrl::reset(cfg, 99), b = fgrl::reset(cfg, 99), c = fgrl::reset(cfg, 100);
    CHECK(states_equal(a, b));
    CHECK_FALSE(states_equal(a, c));
    CHECK(fgrl::max_joint_gap(a, cfg) <= fgrl::kJointTolerance);
    CHECK(a.step == 0);
    CHECK(a.links[0].angle == 0.0);
    for (int i = 0; i < n; ++i) {
      CHECK(a.links[i].velocity.isZero(0.0));
      CHECK(a.links[i].angular_velocity == 0.0);
      if (i > 0) CHECK(std::fabs(a.links[i].angle - a.links[i - 1].angle) <= cfg.reset_noise);
    }

    auto straight_cfg = cfg;
    straight_cfg.zero_perturbation = true;
    const auto s = fgrl::reset(straight_cfg, 5);
    CHECK(s.com.isZero(0.0));
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (int i = 0; i < n; ++i) {
      CHECK(s.links[i].angle == 0.0);
      CHECK(s.links[i].position.y() == 0.0);
      if (i > 0) CHECK(s.links[i - 1].position.x() - s.links[i].position.x() == doctest::Approx(cfg.link_length));
      mean += s.links[i].position;
    }
    CHECK((mean / n).norm() <= 1e-15);
  }
}

TEST_CASE("zero actions from rest do nothing") {
  for (int n = 2; n <= 7; ++n) {
    const auto cfg = config(n);
    const auto graph = fgrl::make_morphology(n);
    const auto s0 = fgrl::reset(cfg, 3);
    const auto r = fgrl::step(s0, Vec(n - 1, 0.0), cfg, graph);
    CHECK(r.reward == 0.0);
    CHECK_FALSE(r.crashed);
    CHECK_FALSE(r.done);
    CHECK(r.state.step == 1);
    for (const auto& l : r.state.links) {
      CHECK(l.velocity.isZero(0.0));
      CHECK(l.angular_velocity == 0.0);
    }
  }
}

TEST_CASE("kinetic energy never increases without actuation") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cfg = config(2 + trial % 7);
    auto state = random_state(rng, cfg);
    const Vec zero(cfg.joint_count(), 0.0);
    double energy = fgrl::kinetic_energy(state, cfg);
    for (int s = 0; s < 25; ++s) {
      fgrl::integrate_substep(state, zero, cfg);
      const double next = fgrl::kinetic_energy(state, cfg);
      CHECK(next <= energy * (1.0 + 1e-12));
      energy = next;
    }
  }
}

TEST_CASE("steps are deterministic and keep the joints together") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> action(-1.0, 1.0);
  for (int n : {2, 3, 5, 7, 12, 16}) {
    const auto cfg = config(n);
    const auto graph = fgrl::make_morphology(n);
    auto state = fgrl::reset(cfg, n);
    for (int t = 0; t < 300; ++t) {
      Vec a(n - 1);
      for (double& x : a) x = action(rng);
      const auto r1 = fgrl::step(state, a, cfg, graph);
      const auto r2 = fgrl::step(state, a, cfg, graph);
      REQUIRE(states_equal(r1.state, r2.state));
      CHECK(testing::bit_equal(r1.reward, r2.reward));
      CHECK_FALSE(r1.crashed);
      CHECK(fgrl::max_joint_gap(r1.state, cfg) <= fgrl::kJointTolerance);
      state = r1.state;
    }
  }
}

TEST_CASE("episodes end after max_steps") {
  auto cfg = config(3);
  cfg.max_steps = 4;
  fgrl::SnakeEnv env(cfg, fgrl::make_morphology(3));
  env.reset(0);
  for (int t = 1; t <= 4; ++t) CHECK(env.step(Vec{0.1, -0.1}).done == (t == 4));
  CHECK(env.state().step == 4);
}

TEST_CASE("non-finite states crash") {
  const auto cfg = config(4);
  const auto graph = fgrl::make_morphology(4);
  auto state = fgrl::reset(cfg, 0);
  state.links[2].velocity.x() = std::nan("");
  const auto r = fgrl::step(state, Vec(3, 0.0), cfg, graph);
  CHECK(r.crashed);
  CHECK(r.done);
  CHECK(r.state.crashed);
}

TEST_CASE("action checks") {
  auto cfg = config(4);
  const auto graph = fgrl::make_morphology(4);
  const auto s = fgrl::reset(cfg, 0);
  CHECK_ERROR_CODE(fgrl::step(s, Vec(2, 0.0), cfg, graph), ErrorCode::kActionDimensionMismatch);
  CHECK_ERROR_CODE(fgrl::step(s, Vec(4, 0.0), cfg, graph), ErrorCode::kActionDimensionMismatch);
  const auto clamped = fgrl::step(s, Vec{3.0, -0.5, -7.0}, cfg, graph);
  const auto bounded = fgrl::step(s, Vec{1.0, -0.5, -1.0}, cfg, graph);
  CHECK(states_equal(clamped.state, bounded.state));
  cfg.strict_actions = true;
  CHECK_ERROR_CODE(fgrl::step(s, Vec{3.0, -0.5, -7.0}, cfg, graph), ErrorCode::kActionOutOfRange);
  CHECK_ERROR_CODE(fgrl::step(s, Vec{std::nan(""), 0.0, 0.0}, cfg, graph), ErrorCode::kNonFiniteInput);
  CHECK_ERROR_CODE(fgrl::step(s, Vec(3, 0.0), config(5), fgrl::make_morphology(5)), ErrorCode::kGraphStateMismatch);
}

TEST_CASE("observation layout") {
  for (int n = 2; n <= 7; ++n) {
    auto cfg = config(n);
    cfg.zero_perturbation = true;
    const auto obs = fgrl::observe(fgrl::reset(cfg, 0), fgrl::make_morphology(n));
    CHECK(obs.state_dim == 5);
    REQUIRE(obs.x.cols == 6);
    for (int i = 0; i < n; ++i) {
      const auto s = obs.state(i);
      CHECK(Vec(s.begin(), s.end()) == Vec{0, 1, 0, 0, 0});
      CHECK(obs.x(i, 5) == static_cast<double>(i) / n);
    }
    CHECK(obs.x(0, 5) == 0.0);
    CHECK(obs.x(n - 1, 5) == static_cast<double>(n - 1) / n);
  }
  CHECK_ERROR_CODE(fgrl::observe(fgrl::reset(config(3), 0), fgrl::make_morphology(4)), ErrorCode::kGraphStateMismatch);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto cfg = config(5);
    const auto obs = fgrl::observe(random_state(rng, cfg), fgrl::make_morphology(5));
    for (int i = 0; i < 5; ++i) CHECK(std::fabs(obs.x(i, 0) * obs.x(i, 0) + obs.x(i, 1) * obs.x(i, 1) - 1.0) <= 1e-9);
  }
}

TEST_CASE("translating the world changes neither observations nor rewards") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> action(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cfg = config(5);
    const auto graph = fgrl::make_morphology(5);
    auto a = random_state(rng, cfg);
    auto b = a;
    const Eigen::Vector2d shift(std::normal_distribution<double>(0, 10)(rng), std::normal_distribution<double>(0, 10)(rng));
    b.com += shift;
    for (auto& l : b.links) l.position += shift;
    CHECK(fgrl::observe(a, graph).x == fgrl::observe(b, graph).x);
    for (int t = 0; t < 20; ++t) {
      Vec act(4);
      for (double& x : act) x = action(rng);
      const auto ra = fgrl::step(a, act, cfg, graph);
      const auto rb = fgrl::step(b, act, cfg, graph);
      CHECK(std::fabs(ra.reward - rb.reward) <= 1e-9);
      for (std::size_t k = 0; k < ra.obs.x.data.size(); ++k) {
        CHECK(std::fabs(ra.obs.x.data[k] - rb.obs.x.data[k]) <= 1e-9);
      }
      a = ra.state;
      b = rb.state;
    }
  }
}

TEST_CASE("rotating the world composes the heading entries") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  for (int trial = 0; trial < 200; ++trial) {
    const auto cfg = config(4);
    const auto graph = fgrl::make_morphology(4);
    const auto a = random_state(rng, cfg);
    const double alpha = angle(rng);
    const Eigen::Matrix2d rot = Eigen::Rotation2Dd(alpha).toRotationMatrix();
    auto b = a;
    b.com = rot * a.com;
    for (auto& l : b.links) {
      l.position = rot * l.position;
      l.velocity = rot * l.velocity;
      l.angle += alpha;
    }
    const auto oa = fgrl::observe(a, graph), ob = fgrl::observe(b, graph);
    for (int i = 0; i < 4; ++i) {
      const double s = oa.x(i, 0), c = oa.x(i, 1);
      CHECK(std::fabs(ob.x(i, 0) - (s * std::cos(alpha) + c * std::sin(alpha))) <= 1e-12);
      CHECK(std::fabs(ob.x(i, 1) - (c * std::cos(alpha) - s * std::sin(alpha))) <= 1e-12);
      for (int k = 2; k < 6; ++k) CHECK(std::fabs(ob.x(i, k) - oa.x(i, k)) <= 1e-12);
    }
  }
}

TEST_CASE("policies trained on one snake run on any other") {
  std::mt19937_64 rng(6);
  const auto cfg = fgrl::PolicyConfig::for_observation(fgrl::kLimbStateDim, fgrl::kLimbFeatureDim);
  const fgrl::PolicyLayout trained(cfg, 2);
  const auto manager = testing::random_vector(rng, trained.manager_size(), 0.3);
  const auto worker = testing::random_vector(rng, trained.worker_size(), 0.3);
  for (int n = 2; n <= 16; ++n) {
    const fgrl::FeudalPolicy policy(cfg, fgrl::two_level_hierarchy(fgrl::make_morphology(n)));
    fgrl::SnakeEnv env(config(n), fgrl::make_morphology(n));
    auto obs = env.reset(1);
    for (int t = 0; t < 5; ++t) {
      const auto actions = policy.step(obs, manager, worker).actions.flatten();
      REQUIRE(static_cast<int>(actions.size()) == n - 1);
      obs = env.step(actions).obs;
    }
  }
}

TEST_CASE("gait displacement matches the fine-step golden trajectory") {
  const auto golden = oracle::read_trajectory(std::string(FGRL_FIXTURE_DIR) + "/golden_snake5_fine.csv");
  REQUIRE(golden.size() == 1000);
  REQUIRE(golden.back().angles.size() == 5);
  const auto coarse = oracle::run_gait(oracle::gait_config(1));
  REQUIRE(coarse.size() == 1000);
  const double reference = golden.back().com_x;
  const double displacement = coarse.back().com_x;
  CHECK(reference > 0.0);
  CHECK(displacement > 0.0);
  CHECK(std::fabs(displacement - reference) <= 0.02 * std::fabs(reference));
  double reward_sum = 0.0;
  for (const auto& row : coarse) reward_sum += row.env_reward;
  CHECK(reward_sum * oracle::gait_config(1).control_period() == doctest::Approx(displacement).epsilon(1e-9));
}

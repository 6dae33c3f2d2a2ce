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
#ifndef FGRL_CMAES_HPP_
#define FGRL_CMAES_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace fgrl {

struct CmaesOptions {
  int dim = 1;
  double sigma0 = 0.5;
  std::optional<int> popsize;               // default 4 + floor(3 ln n)
  std::optional<std::vector<double>> mean;  // default zero vector
  std::uint64_t seed = 0;
};

struct Population {
  std::uint64_t generation = 0;
  std::vector<std::vector<double>> candidates;
};

/// mt19937_64 that counts draws, so its position can be checkpointed as
/// (seed, count) and restored with discard().
class CountingEngine {
 public:
  using result_type = std::mt19937_64::result_type;
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  explicit CountingEngine(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}
  result_type operator()() {
    ++count_;
    return engine_();
  }
  void restore(std::uint64_t seed, std::uint64_t count) {
    seed_ = seed;
    count_ = count;
    engine_.seed(seed);
    engine_.discard(count);
  }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t count() const { return count_; }

 private:
  std::uint64_t seed_;
  std::uint64_t count_ = 0;
  std::mt19937_64 engine_;
};

/// Covariance matrix adaptation evolution strategy with the default strategy
/// parameters of Hansen's tutorial (weighted recombination, cumulative
/// step-size adaptation, rank-one plus rank-mu covariance update).
/// Minimizes. ask() and tell() must alternate.
class Cmaes {
 public:
  /// Throws kInvalidDimension / kInvalidSigma.
  explicit Cmaes(const CmaesOptions& options);

  /// Samples lambda candidates m + sigma * B * D * z. Throws kAskBeforeTell if
  /// the previous population has not been told.
  Population ask();
  /// Ranks the outstanding population (stable, ties keep sampling order).
  /// Throws kTellWithoutAsk, kLengthMismatch or kNonFiniteFitness.
  void tell(std::span<const double> fitness);

  int dim() const { return n_; }
  int popsize() const { return lambda_; }
  int parents() const { return mu_; }
  double mu_eff() const { return mu_eff_; }
  const std::vector<double>& weights() const { return weights_; }
  double sigma() const { return sigma_; }
  std::uint64_t generation() const { return generation_; }
  bool pending() const { return pending_; }
  std::vector<double> mean() const;
  const Eigen::VectorXd& mean_vector() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return C_; }
  const Eigen::VectorXd& path_sigma() const { return p_sigma_; }
  const Eigen::VectorXd& path_c() const { return p_c_; }
  double min_eigenvalue() const;

  struct StrategyParameters {
    double c_sigma, d_sigma, c_c, c_1, c_mu, chi_n;
  };
  const StrategyParameters& strategy() const { return sp_; }

  /// Full state for exact resume (no outstanding population allowed).
  nlohmann::json to_json() const;
  static Cmaes from_json(const nlohmann::json& doc);

 private:
  Cmaes() = default;
  void init_strategy();
  void update_eigensystem();

  int n_ = 0;
  int lambda_ = 0;
  int mu_ = 0;
  std::vector<double> weights_;
  double mu_eff_ = 0.0;
  StrategyParameters sp_{};

  Eigen::VectorXd mean_;
  double sigma_ = 0.0;
  Eigen::MatrixXd C_;
  Eigen::MatrixXd B_;
  Eigen::VectorXd D_;
  Eigen::VectorXd p_sigma_;
  Eigen::VectorXd p_c_;
  std::uint64_t generation_ = 0;
  std::uint64_t eigen_generation_ = 0;
  int eigen_interval_ = 1;

  CountingEngine rng_;
  bool pending_ = false;
  Eigen::MatrixXd pending_steps_;  // n x lambda, (x_k - m) / sigma
};

}  // namespace fgrl

#endif  // FGRL_CMAES_HPP_

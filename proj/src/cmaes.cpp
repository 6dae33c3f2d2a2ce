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
#include "fgrl/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fgrl/error.hpp"

namespace fgrl {
namespace {

constexpr double kEigenFloor = 1e-14;

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> flatten_rows(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

Eigen::MatrixXd unflatten_rows(const std::vector<double>& v, int n) {
  if (v.size() != static_cast<std::size_t>(n) * n) {
    throw Error(ErrorCode::kParse, "CMA-ES matrix has wrong size");
  }
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m(r, c) = v[static_cast<std::size_t>(r) * n + c];
  }
  return m;
}

}  // namespace

Cmaes::Cmaes(const CmaesOptions& options) : rng_(options.seed) {
  if (options.dim < 1) throw Error(ErrorCode::kInvalidDimension, "dimension must be >= 1");
  if (!(options.sigma0 > 0.0) || !std::isfinite(options.sigma0)) {
    throw Error(ErrorCode::kInvalidSigma, "sigma0 must be positive and finite");
  }
  n_ = options.dim;
  lambda_ = options.popsize.value_or(4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(n_)))));
  if (lambda_ < 2) throw Error(ErrorCode::kInvalidConfig, "population size must be >= 2");
  sigma_ = options.sigma0;
  if (options.mean) {
    if (static_cast<int>(options.mean->size()) != n_) {
      throw Error(ErrorCode::kInvalidDimension, "initial mean has wrong dimension");
    }
    mean_ = to_eigen(*options.mean);
  } else {
    mean_ = Eigen::VectorXd::Zero(n_);
  }
  C_ = Eigen::MatrixXd::Identity(n_, n_);
  B_ = Eigen::MatrixXd::Identity(n_, n_);
  D_ = Eigen::VectorXd::Ones(n_);
  p_sigma_ = Eigen::VectorXd::Zero(n_);
  p_c_ = Eigen::VectorXd::Zero(n_);
  init_strategy();
}

void Cmaes::init_strategy() {
  const double n = n_;
  mu_ = lambda_ / 2;
  weights_.resize(mu_);
  for (int i = 0; i < mu_; ++i) {
    weights_[i] = std::log((lambda_ + 1.0) / 2.0) - std::log(i + 1.0);
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  double sq = 0.0;
  for (double& w : weights_) {
    w /= total;
    sq += w * w;
  }
  mu_eff_ = 1.0 / sq;

  sp_.c_sigma = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
  sp_.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) - 1.0) + sp_.c_sigma;
  sp_.c_c = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
  sp_.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
  sp_.c_mu = std::min(1.0 - sp_.c_1, 2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) / ((n + 2.0) * (n + 2.0) + mu_eff_));
  sp_.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
  eigen_interval_ = std::max(1, static_cast<int>(std::ceil(n / (10.0 * lambda_))));
}

void Cmaes::update_eigensystem() {
  C_ = 0.5 * (C_ + C_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(C_);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::kInternal, "covariance eigendecomposition failed");
  Eigen::VectorXd eigenvalues = solver.eigenvalues();
  B_ = solver.eigenvectors();
  if (eigenvalues.minCoeff() < kEigenFloor) {
    eigenvalues = eigenvalues.cwiseMax(kEigenFloor);
    C_ = B_ * eigenvalues.asDiagonal() * B_.transpose();
  }
  D_ = eigenvalues.cwiseSqrt();
  eigen_generation_ = generation_;
}

Population Cmaes::ask() {
  if (pending_) throw Error(ErrorCode::kAskBeforeTell, "previous population has not been told");
  if (generation_ - eigen_generation_ >= static_cast<std::uint64_t>(eigen_interval_)) update_eigensystem();

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd z(n_, lambda_);
  for (int k = 0; k < lambda_; ++k) {
    for (int i = 0; i < n_; ++i) z(i, k) = normal(rng_);
  }
  pending_steps_ = B_ * (D_.asDiagonal() * z);

  Population pop;
  pop.generation = generation_;
  pop.candidates.resize(lambda_);
  for (int k = 0; k < lambda_; ++k) {
    Eigen::VectorXd x = mean_ + sigma_ * pending_steps_.col(k);
    pop.candidates[k] = to_std(x);
  }
  pending_ = true;
  return pop;
}

void Cmaes::tell(std::span<const double> fitness) {
  if (!pending_) throw Error(ErrorCode::kTellWithoutAsk, "tell() requires an outstanding population");
  if (static_cast<int>(fitness.size()) != lambda_) {
    throw Error(ErrorCode::kLengthMismatch,
                "expected " + std::to_string(lambda_) + " fitness values, got " + std::to_string(fitness.size()));
  }
  for (double f : fitness) {
    if (!std::isfinite(f)) throw Error(ErrorCode::kNonFiniteFitness, "fitness values must be finite");
  }

  std::vector<int> order(lambda_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fitness[a] < fitness[b]; });

  const double n = n_;
  Eigen::VectorXd y_w = Eigen::VectorXd::Zero(n_);
  Eigen::MatrixXd selected(n_, mu_);
  for (int i = 0; i < mu_; ++i) {
    selected.col(i) = pending_steps_.col(order[i]);
    y_w += weights_[i] * selected.col(i);
  }

  mean_ += sigma_ * y_w;

  // C^{-1/2} y_w = B D^{-1} B^T y_w
  const Eigen::VectorXd whitened = B_ * (B_.transpose() * y_w).cwiseQuotient(D_);
  p_sigma_ = (1.0 - sp_.c_sigma) * p_sigma_ + std::sqrt(sp_.c_sigma * (2.0 - sp_.c_sigma) * mu_eff_) * whitened;
  const double ps_norm = p_sigma_.norm();
  const double decay = 1.0 - std::pow(1.0 - sp_.c_sigma, 2.0 * static_cast<double>(generation_ + 1));
  const bool h_sigma = ps_norm / std::sqrt(decay) / sp_.chi_n < 1.4 + 2.0 / (n + 1.0);

  p_c_ = (1.0 - sp_.c_c) * p_c_;
  if (h_sigma) p_c_ += std::sqrt(sp_.c_c * (2.0 - sp_.c_c) * mu_eff_) * y_w;
  const double delta = h_sigma ? 0.0 : sp_.c_c * (2.0 - sp_.c_c);

  Eigen::MatrixXd rank_mu = selected * Eigen::Map<const Eigen::VectorXd>(weights_.data(), mu_).asDiagonal() *
                            selected.transpose();
  C_ = (1.0 - sp_.c_1 - sp_.c_mu + sp_.c_1 * delta) * C_ + sp_.c_1 * (p_c_ * p_c_.transpose()) + sp_.c_mu * rank_mu;

  sigma_ *= std::exp((sp_.c_sigma / sp_.d_sigma) * (ps_norm / sp_.chi_n - 1.0));
  ++generation_;
  pending_ = false;
  pending_steps_.resize(0, 0);
}

std::vector<double> Cmaes::mean() const { return to_std(mean_); }

double Cmaes::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (C_ + C_.transpose()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

nlohmann::json Cmaes::to_json() const {
  if (pending_) throw Error(ErrorCode::kAskBeforeTell, "cannot serialize with an outstanding population");
  nlohmann::json doc;
  doc["dim"] = n_;
  doc["popsize"] = lambda_;
  doc["mean"] = to_std(mean_);
  doc["sigma"] = sigma_;
  doc["covariance"] = flatten_rows(C_);
  doc["eigenvectors"] = flatten_rows(B_);
  doc["eigen_sqrt"] = to_std(D_);
  doc["path_sigma"] = to_std(p_sigma_);
  doc["path_c"] = to_std(p_c_);
  doc["generation"] = generation_;
  doc["eigen_generation"] = eigen_generation_;
  doc["rng_seed"] = rng_.seed();
  doc["rng_counter"] = rng_.count();
  return doc;
}

Cmaes Cmaes::from_json(const nlohmann::json& doc) {
  try {
    Cmaes es;
    es.n_ = doc.at("dim").get<int>();
    es.lambda_ = doc.at("popsize").get<int>();
    if (es.n_ < 1) throw Error(ErrorCode::kInvalidDimension, "dimension must be >= 1");
    if (es.lambda_ < 2) throw Error(ErrorCode::kInvalidConfig, "population size must be >= 2");
    es.init_strategy();
    es.mean_ = to_eigen(doc.at("mean").get<std::vector<double>>());
    es.sigma_ = doc.at("sigma").get<double>();
    es.C_ = unflatten_rows(doc.at("covariance").get<std::vector<double>>(), es.n_);
    es.B_ = unflatten_rows(doc.at("eigenvectors").get<std::vector<double>>(), es.n_);
    es.D_ = to_eigen(doc.at("eigen_sqrt").get<std::vector<double>>());
    es.p_sigma_ = to_eigen(doc.at("path_sigma").get<std::vector<double>>());
    es.p_c_ = to_eigen(doc.at("path_c").get<std::vector<double>>());
    es.generation_ = doc.at("generation").get<std::uint64_t>();
    es.eigen_generation_ = doc.at("eigen_generation").get<std::uint64_t>();
    es.rng_.restore(doc.at("rng_seed").get<std::uint64_t>(), doc.at("rng_counter").get<std::uint64_t>());
    if (es.mean_.size() != es.n_ || es.D_.size() != es.n_ || es.p_sigma_.size() != es.n_ || es.p_c_.size() != es.n_) {
      throw Error(ErrorCode::kParse, "CMA-ES vector has wrong size");
    }
    if (!(es.sigma_ > 0.0)) throw Error(ErrorCode::kInvalidSigma, "sigma must be positive");
    return es;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("CMA-ES state: ") + e.what());
  }
}

}  // namespace fgrl

// Copyright 2026 The asgd-sim Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Smooth stochastic optimization problems with known or estimated constants:
// the Lipschitz constant L of the gradient and the gradient-noise bound σ².

#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "asgd/random.hpp"

namespace asgd {

// Server parameter state. Matrix parameters are stored row-major.
using ParamVector = Eigen::VectorXd;
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string_view Kind() const = 0;

  Eigen::Index Dimension() const { return dimension_; }
  double Lipschitz() const { return lipschitz_; }
  double Sigma2() const { return sigma2_; }
  std::optional<double> OptimumValue() const { return optimum_value_; }
  const ParamVector& StartPoint() const { return start_; }

  // f(x). Deterministic for a fixed x.
  virtual double Objective(const ParamVector& x) const = 0;
  // ∇f(x).
  virtual ParamVector FullGradient(const ParamVector& x) const = 0;
  // Sum of `count` independent stochastic gradients G(x; ξ), each unbiased
  // for ∇f(x). Implementations draw the sum directly from its distribution
  // where the noise model allows it.
  virtual ParamVector StochasticGradientSum(const ParamVector& x,
                                            std::int64_t count,
                                            Rng& rng) const = 0;
  ParamVector StochasticGradient(const ParamVector& x, Rng& rng) const {
    return StochasticGradientSum(x, 1, rng);
  }
  // Whether x is an admissible iterate. Problems with an open feasible set
  // (the SPD cone) override this.
  virtual bool Feasible(const ParamVector& x) const;

 protected:
  void CheckDimension(const ParamVector& x) const;

  Eigen::Index dimension_ = 0;
  double lipschitz_ = 0.0;
  double sigma2_ = 0.0;
  std::optional<double> optimum_value_;
  ParamVector start_;
};

using ProblemPtr = std::shared_ptr<const Problem>;

// f(x) = ½ xᵀHx with additive isotropic N(0, σ_g² I) gradient noise.
// L = λ_max(H), σ² = d σ_g², x* = 0, f(x*) = 0, all exact.
class QuadraticProblem final : public Problem {
 public:
  QuadraticProblem(Eigen::MatrixXd curvature, double noise_std,
                   ParamVector start);

  std::string_view Kind() const override { return "quadratic"; }
  double Objective(const ParamVector& x) const override;
  ParamVector FullGradient(const ParamVector& x) const override;
  ParamVector StochasticGradientSum(const ParamVector& x, std::int64_t count,
                                    Rng& rng) const override;

  const Eigen::MatrixXd& Curvature() const { return curvature_; }
  double NoiseStd() const { return noise_std_; }

 private:
  Eigen::MatrixXd curvature_;
  double noise_std_;
};

// Symmetric rank-p factorization: minimize E‖A − YYᵀ‖²_F over Y ∈ R^{n×p}
// with A = E[A] + ε, E[A] = Y*Y*ᵀ and ε a symmetric matrix whose upper
// triangle is i.i.d. N(0, noise_std²). The objective is measured against
// E[A], so f(Y*) = 0.
class MatrixCompletionProblem final : public Problem {
 public:
  struct Options {
    std::int64_t n = 20;
    std::int64_t rank = 1;
    double noise_std = 1.0;
    // Standard deviation of the entries of the ground-truth factor Y*.
    double truth_scale = 1.0;
    std::uint64_t seed = 1;
  };

  explicit MatrixCompletionProblem(const Options& options);

  std::string_view Kind() const override { return "matrix_completion"; }
  double Objective(const ParamVector& x) const override;
  ParamVector FullGradient(const ParamVector& x) const override;
  ParamVector StochasticGradientSum(const ParamVector& x, std::int64_t count,
                                    Rng& rng) const override;

  std::int64_t n() const { return n_; }
  std::int64_t rank() const { return rank_; }
  const RowMajorMatrix& TruthFactor() const { return truth_; }
  const Eigen::MatrixXd& ExpectedObservation() const { return expected_a_; }
  ParamVector TruthVector() const;

 private:
  std::int64_t n_;
  std::int64_t rank_;
  double noise_std_;
  RowMajorMatrix truth_;
  Eigen::MatrixXd expected_a_;
};

// Covariance MLE: minimize ln|Σ| + tr(Σ⁻¹ S̄) over symmetric positive definite
// Σ (flattened row-major, p² entries), where S̄ is the scatter of a fixed
// sample set about the known mean. A stochastic gradient uses one sample
// drawn uniformly from the set. The iterate is symmetrized before decoding,
// so gradients are symmetric.
class MvnMleProblem final : public Problem {
 public:
  MvnMleProblem(Eigen::MatrixXd true_covariance, Eigen::VectorXd mean,
                std::int64_t num_samples, std::uint64_t seed);

  std::string_view Kind() const override { return "mvn_mle"; }
  double Objective(const ParamVector& x) const override;
  ParamVector FullGradient(const ParamVector& x) const override;
  ParamVector StochasticGradientSum(const ParamVector& x, std::int64_t count,
                                    Rng& rng) const override;
  bool Feasible(const ParamVector& x) const override;

  Eigen::Index p() const { return mean_.size(); }
  const Eigen::MatrixXd& Scatter() const { return scatter_; }
  const Eigen::MatrixXd& Centered() const { return centered_; }
  Eigen::MatrixXd Decode(const ParamVector& x) const;
  static ParamVector Encode(const Eigen::MatrixXd& sigma);

 private:
  Eigen::VectorXd mean_;
  // One centered sample (x_i − μ)ᵀ per row.
  Eigen::MatrixXd centered_;
  Eigen::MatrixXd scatter_;
};

ProblemPtr MakeQuadratic(const Eigen::MatrixXd& curvature, double noise_std,
                         std::optional<ParamVector> start = std::nullopt);
ProblemPtr MakeMatrixCompletion(std::int64_t n, std::int64_t rank,
                                double noise_std, std::uint64_t seed,
                                double truth_scale = 1.0);
ProblemPtr MakeMvnMle(std::int64_t num_samples,
                      const Eigen::MatrixXd& true_covariance,
                      const Eigen::VectorXd& mean, std::uint64_t seed);

// Largest secant ratio ‖∇f(x) − ∇f(y)‖ / ‖x − y‖ over `pairs` random pairs
// drawn by `sampler(rng)`.
template <typename Sampler>
double MaxSecantRatio(const Problem& problem, Sampler&& sampler, int pairs,
                      Rng& rng) {
  double best = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const ParamVector x = sampler(rng);
    const ParamVector y = sampler(rng);
    const double dist = (x - y).norm();
    if (dist == 0.0) continue;
    best = std::max(
        best, (problem.FullGradient(x) - problem.FullGradient(y)).norm() / dist);
  }
  return best;
}

// Mean of ‖G(x; ξ) − ∇f(x)‖² over `draws` single-sample gradients.
double EmpiricalGradientVariance(const Problem& problem, const ParamVector& x,
                                 int draws, Rng& rng);

}  // namespace asgd

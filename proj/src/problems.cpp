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

#include "asgd/problems.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "asgd/errors.hpp"

namespace asgd {

namespace {

// Safety factor applied to estimated L and σ².
constexpr double kEstimateSafety = 1.5;
constexpr int kLipschitzPairs = 1000;
constexpr int kVarianceDraws = 1000;

Eigen::VectorXd StandardNormalVector(Eigen::Index size, Rng& rng) {
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = rng.Normal();
  return v;
}

}  // namespace

bool Problem::Feasible(const ParamVector& x) const {
  return x.size() == dimension_ && x.allFinite();
}

void Problem::CheckDimension(const ParamVector& x) const {
  if (x.size() != dimension_) {
    throw DimensionMismatch("expected parameter of length " +
                            std::to_string(dimension_) + ", got " +
                            std::to_string(x.size()));
  }
}

double EmpiricalGradientVariance(const Problem& problem, const ParamVector& x,
                                 int draws, Rng& rng) {
  const ParamVector grad = problem.FullGradient(x);
  double total = 0.0;
  for (int i = 0; i < draws; ++i) {
    total += (problem.StochasticGradient(x, rng) - grad).squaredNorm();
  }
  return total / draws;
}

// ---------------------------------------------------------------------------
// Quadratic

QuadraticProblem::QuadraticProblem(Eigen::MatrixXd curvature, double noise_std,
                                   ParamVector start)
    : curvature_(std::move(curvature)), noise_std_(noise_std) {
  if (curvature_.rows() == 0 || curvature_.rows() != curvature_.cols()) {
    throw std::invalid_argument("quadratic: curvature must be square");
  }
  if (!curvature_.isApprox(curvature_.transpose(), 1e-12)) {
    throw std::invalid_argument("quadratic: curvature must be symmetric");
  }
  if (!(noise_std_ >= 0.0)) {
    throw std::invalid_argument("quadratic: noise_std must be >= 0");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(curvature_,
                                                     Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw std::invalid_argument("quadratic: curvature must be positive definite");
  }
  dimension_ = curvature_.rows();
  lipschitz_ = eig.eigenvalues().maxCoeff();
  sigma2_ = static_cast<double>(dimension_) * noise_std_ * noise_std_;
  optimum_value_ = 0.0;
  start_ = std::move(start);
  if (start_.size() == 0) start_ = ParamVector::Ones(dimension_);
  CheckDimension(start_);
}

double QuadraticProblem::Objective(const ParamVector& x) const {
  CheckDimension(x);
  return 0.5 * x.dot(curvature_ * x);
}

ParamVector QuadraticProblem::FullGradient(const ParamVector& x) const {
  CheckDimension(x);
  return curvature_ * x;
}

ParamVector QuadraticProblem::StochasticGradientSum(const ParamVector& x,
                                                    std::int64_t count,
                                                    Rng& rng) const {
  CheckDimension(x);
  const double c = static_cast<double>(count);
  ParamVector g = c * (curvature_ * x);
  // The sum of `count` independent N(0, σ_g² I) draws is N(0, count σ_g² I).
  if (noise_std_ > 0.0 && count > 0) {
    g += (noise_std_ * std::sqrt(c)) * StandardNormalVector(dimension_, rng);
  }
  return g;
}

ProblemPtr MakeQuadratic(const Eigen::MatrixXd& curvature, double noise_std,
                         std::optional<ParamVector> start) {
  return std::make_shared<QuadraticProblem>(
      curvature, noise_std, start.value_or(ParamVector()));
}

// ---------------------------------------------------------------------------
// Matrix completion

MatrixCompletionProblem::MatrixCompletionProblem(const Options& options)
    : n_(options.n), rank_(options.rank), noise_std_(options.noise_std) {
  if (!(n_ >= rank_ && rank_ >= 1)) {
    throw std::invalid_argument("matrix_completion: need n >= rank >= 1");
  }
  if (!(noise_std_ > 0.0) || !(options.truth_scale > 0.0)) {
    throw std::invalid_argument(
        "matrix_completion: noise_std and truth_scale must be positive");
  }
  Rng data_rng = Rng::ForStream(options.seed, Stream::kProblemData);
  truth_.resize(n_, rank_);
  for (Eigen::Index i = 0; i < truth_.size(); ++i) {
    truth_.data()[i] = options.truth_scale * data_rng.Normal();
  }
  expected_a_ = truth_ * truth_.transpose();

  dimension_ = n_ * rank_;
  optimum_value_ = 0.0;
  // Y₀ entries i.i.d. N(0, 1/n): standard deviation 1/√n.
  const double start_std = 1.0 / std::sqrt(static_cast<double>(n_));
  start_ = start_std * StandardNormalVector(dimension_, data_rng);

  Rng est_rng = Rng::ForStream(options.seed, Stream::kEstimation);
  const double half_width =
      std::max(1.0, truth_.cwiseAbs().maxCoeff());
  auto in_box = [&](Rng& rng) {
    ParamVector y = start_;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y[i] += half_width * (2.0 * rng.Uniform() - 1.0);
    }
    return y;
  };
  lipschitz_ =
      kEstimateSafety * MaxSecantRatio(*this, in_box, kLipschitzPairs, est_rng);
  sigma2_ = kEstimateSafety *
            EmpiricalGradientVariance(*this, start_, kVarianceDraws, est_rng);
}

ParamVector MatrixCompletionProblem::TruthVector() const {
  return Eigen::Map<const ParamVector>(truth_.data(), truth_.size());
}

double MatrixCompletionProblem::Objective(const ParamVector& x) const {
  CheckDimension(x);
  Eigen::Map<const RowMajorMatrix> y(x.data(), n_, rank_);
  return (expected_a_ - y * y.transpose()).squaredNorm();
}

ParamVector MatrixCompletionProblem::FullGradient(const ParamVector& x) const {
  CheckDimension(x);
  Eigen::Map<const RowMajorMatrix> y(x.data(), n_, rank_);
  // 4 (YYᵀ − E[A]) Y, with YYᵀY formed as Y (YᵀY).
  RowMajorMatrix g = 4.0 * (y * (y.transpose() * y) - expected_a_ * y);
  return Eigen::Map<const ParamVector>(g.data(), g.size());
}

ParamVector MatrixCompletionProblem::StochasticGradientSum(
    const ParamVector& x, std::int64_t count, Rng& rng) const {
  ParamVector g = static_cast<double>(count) * FullGradient(x);
  if (count <= 0) return g;
  // Σ_m 4(YYᵀ − E[A] − ε_m)Y = count ∇f(Y) − 4 (Σ_m ε_m) Y, and the sum of
  // `count` symmetric noise matrices has upper-triangular entries
  // N(0, count σ²).
  const double std = noise_std_ * std::sqrt(static_cast<double>(count));
  Eigen::MatrixXd noise(n_, n_);
  for (Eigen::Index j = 0; j < n_; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      noise(i, j) = std * rng.Normal();
      noise(j, i) = noise(i, j);
    }
  }
  Eigen::Map<const RowMajorMatrix> y(x.data(), n_, rank_);
  RowMajorMatrix correction = -4.0 * (noise * y);
  g += Eigen::Map<const ParamVector>(correction.data(), correction.size());
  return g;
}

ProblemPtr MakeMatrixCompletion(std::int64_t n, std::int64_t rank,
                                double noise_std, std::uint64_t seed,
                                double truth_scale) {
  MatrixCompletionProblem::Options options;
  options.n = n;
  options.rank = rank;
  options.noise_std = noise_std;
  options.seed = seed;
  options.truth_scale = truth_scale;
  return std::make_shared<MatrixCompletionProblem>(options);
}

// ---------------------------------------------------------------------------
// MVN covariance MLE

MvnMleProblem::MvnMleProblem(Eigen::MatrixXd true_covariance,
                             Eigen::VectorXd mean, std::int64_t num_samples,
                             std::uint64_t seed)
    : mean_(std::move(mean)) {
  const Eigen::Index p = true_covariance.rows();
  if (p == 0 || true_covariance.cols() != p || mean_.size() != p) {
    throw std::invalid_argument("mvn_mle: covariance/mean shape mismatch");
  }
  if (!true_covariance.isApprox(true_covariance.transpose(), 1e-12)) {
    throw std::invalid_argument("mvn_mle: covariance must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(true_covariance);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("mvn_mle: covariance must be positive definite");
  }
  if (num_samples <= p) {
    throw std::invalid_argument("mvn_mle: need more samples than dimensions");
  }

  Rng data_rng = Rng::ForStream(seed, Stream::kProblemData);
  const Eigen::MatrixXd chol = llt.matrixL();
  centered_.resize(num_samples, p);
  for (Eigen::Index i = 0; i < num_samples; ++i) {
    // Samples are drawn from N(μ, Σ) and stored centered at the known μ.
    centered_.row(i) = (chol * StandardNormalVector(p, data_rng)).transpose();
  }
  scatter_ = centered_.transpose() * centered_ /
             static_cast<double>(num_samples);

  dimension_ = p * p;
  Eigen::LLT<Eigen::MatrixXd> scatter_llt(scatter_);
  if (scatter_llt.info() != Eigen::Success) {
    throw std::invalid_argument("mvn_mle: sample scatter is not SPD");
  }
  const double log_det =
      2.0 * scatter_llt.matrixLLT().diagonal().array().log().sum();
  optimum_value_ = log_det + static_cast<double>(p);
  start_ = Encode(Eigen::MatrixXd::Identity(p, p));

  Rng est_rng = Rng::ForStream(seed, Stream::kEstimation);
  // Symmetric perturbations with entries in [−r, r] have spectral norm at
  // most p r = 0.4, so every sampled point stays inside the SPD cone.
  const double radius = 0.4 / static_cast<double>(p);
  auto around_start = [&](Rng& rng) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index i = 0; i <= j; ++i) {
        s(i, j) += radius * (2.0 * rng.Uniform() - 1.0);
        s(j, i) = s(i, j);
      }
    }
    return Encode(s);
  };
  lipschitz_ = kEstimateSafety *
               MaxSecantRatio(*this, around_start, kLipschitzPairs, est_rng);
  sigma2_ = kEstimateSafety *
            EmpiricalGradientVariance(*this, start_, kVarianceDraws, est_rng);
}

Eigen::MatrixXd MvnMleProblem::Decode(const ParamVector& x) const {
  CheckDimension(x);
  Eigen::Map<const RowMajorMatrix> m(x.data(), p(), p());
  return 0.5 * (m + m.transpose());
}

ParamVector MvnMleProblem::Encode(const Eigen::MatrixXd& sigma) {
  RowMajorMatrix m = sigma;
  return Eigen::Map<const ParamVector>(m.data(), m.size());
}

bool MvnMleProblem::Feasible(const ParamVector& x) const {
  if (x.size() != dimension_ || !x.allFinite()) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(Decode(x));
  return llt.info() == Eigen::Success &&
         (llt.matrixLLT().diagonal().array() > 0.0).all();
}

namespace {

Eigen::LLT<Eigen::MatrixXd> FactorOrThrow(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success ||
      !(llt.matrixLLT().diagonal().array() > 0.0).all()) {
    throw InfeasibleIterate("mvn_mle: Σ is not positive definite");
  }
  return llt;
}

}  // namespace

double MvnMleProblem::Objective(const ParamVector& x) const {
  const Eigen::LLT<Eigen::MatrixXd> llt = FactorOrThrow(Decode(x));
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return log_det + llt.solve(scatter_).trace();
}

ParamVector MvnMleProblem::FullGradient(const ParamVector& x) const {
  const Eigen::LLT<Eigen::MatrixXd> llt = FactorOrThrow(Decode(x));
  const Eigen::MatrixXd inv =
      llt.solve(Eigen::MatrixXd::Identity(p(), p()));
  Eigen::MatrixXd g = inv - inv * scatter_ * inv;
  return Encode(0.5 * (g + g.transpose()));
}

ParamVector MvnMleProblem::StochasticGradientSum(const ParamVector& x,
                                                 std::int64_t count,
                                                 Rng& rng) const {
  const Eigen::LLT<Eigen::MatrixXd> llt = FactorOrThrow(Decode(x));
  const Eigen::MatrixXd inv =
      llt.solve(Eigen::MatrixXd::Identity(p(), p()));
  const auto num_samples = static_cast<std::uint64_t>(centered_.rows());
  Eigen::MatrixXd scatter_sum = Eigen::MatrixXd::Zero(p(), p());
  if (count > 0 && static_cast<std::uint64_t>(count) <= num_samples) {
    for (std::int64_t m = 0; m < count; ++m) {
      const auto i = static_cast<Eigen::Index>(rng.UniformInt(num_samples));
      scatter_sum.noalias() += centered_.row(i).transpose() * centered_.row(i);
    }
  } else if (count > 0) {
    // Large batches: multiplicity of each sample is multinomial.
    const std::vector<double> weights(num_samples, 1.0);
    const std::vector<std::int64_t> counts = rng.Multinomial(count, weights);
    Eigen::VectorXd w(static_cast<Eigen::Index>(num_samples));
    for (std::size_t i = 0; i < counts.size(); ++i) {
      w[static_cast<Eigen::Index>(i)] = static_cast<double>(counts[i]);
    }
    scatter_sum = centered_.transpose() * w.asDiagonal() * centered_;
  }
  Eigen::MatrixXd g =
      static_cast<double>(count) * inv - inv * scatter_sum * inv;
  return Encode(0.5 * (g + g.transpose()));
}

ProblemPtr MakeMvnMle(std::int64_t num_samples,
                      const Eigen::MatrixXd& true_covariance,
                      const Eigen::VectorXd& mean, std::uint64_t seed) {
  return std::make_shared<MvnMleProblem>(true_covariance, mean, num_samples,
                                         seed);
}

}  // namespace asgd

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

// Gradient checks shared by the unit tests and the acceptance binary.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Core>

#include "asgd/problems.hpp"
#include "asgd/random.hpp"

namespace asgd::testing {

// ‖∇f_fd(x) − ∇f(x)‖ / ‖∇f(x)‖ with central differences, step h·max(1, |x_i|).
inline double FiniteDifferenceError(const Problem& problem, const ParamVector& x,
                                    double h = 1e-5) {
  const ParamVector g = problem.FullGradient(x);
  ParamVector fd(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    ParamVector up = x, down = x;
    up[i] += step;
    down[i] -= step;
    fd[i] = (problem.Objective(up) - problem.Objective(down)) / (2.0 * step);
  }
  return (fd - g).norm() / std::max(g.norm(), 1e-300);
}

struct UnbiasednessResult {
  double mean_deviation = 0.0;  // along the test direction
  double standard_error = 0.0;
  bool passes = false;  // |mean_deviation| ≤ 3 SE
};

// Projects G(x; ξ) − ∇f(x) onto the unit direction `u` over `draws`
// single-sample gradients.
inline UnbiasednessResult CheckUnbiased(const Problem& problem,
                                        const ParamVector& x,
                                        const ParamVector& u, int draws,
                                        Rng& rng) {
  const ParamVector g = problem.FullGradient(x);
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double d = u.dot(problem.StochasticGradient(x, rng) - g);
    sum += d;
    sum2 += d * d;
  }
  UnbiasednessResult r;
  r.mean_deviation = sum / draws;
  const double var = (sum2 - draws * r.mean_deviation * r.mean_deviation) /
                     (draws - 1);
  r.standard_error = std::sqrt(std::max(var, 0.0) / draws);
  r.passes = std::abs(r.mean_deviation) <= 3.0 * r.standard_error;
  return r;
}

inline ParamVector RandomUnit(Eigen::Index n, Rng& rng) {
  ParamVector u(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = rng.Normal();
  return u / u.norm();
}

// Points where the checks are evaluated. For the covariance problem these
// stay well inside the SPD cone.
inline ParamVector RandomPoint(const Problem& problem, Rng& rng) {
  const Eigen::Index n = problem.Dimension();
  if (const auto* mvn = dynamic_cast<const MvnMleProblem*>(&problem)) {
    const Eigen::Index p = mvn->p();
    Eigen::MatrixXd b(p, p);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.Normal();
    const Eigen::MatrixXd sigma =
        mvn->Scatter() * (0.5 + rng.Uniform()) +
        0.1 * b * b.transpose() / static_cast<double>(p);
    return MvnMleProblem::Encode(sigma);
  }
  ParamVector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.Normal();
  return x;
}

}  // namespace asgd::testing

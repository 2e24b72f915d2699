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

// Lyapunov function, Monte-Carlo check of its one-step expected decrease,
// log-log rate fitting and threshold comparisons over seed ensembles.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asgd/delay_models.hpp"
#include "asgd/engine.hpp"
#include "asgd/problems.hpp"

namespace asgd {

struct LyapunovValue {
  double value = 0.0;
  double optimality_error = 0.0;      // f(x_k) − f*
  double asynchronicity_error = 0.0;  // Σ_j c_j ‖x_{k+1−j} − x_{k−j}‖²
  // Fewer past iterates were available than the weights call for.
  bool truncated = false;
  // f* was replaced by the smallest objective in `history`.
  bool optimum_estimated = false;
};

// ζ^k for history = (x_{k−h}, ..., x_k) ending at version k. Terms needing
// iterates before x_{k−h} are dropped and flagged, except when the history
// reaches back to x_0 (k ≤ h), where the sum is complete.
LyapunovValue ComputeLyapunov(const Problem& problem,
                              std::span<const ParamVector> history,
                              std::int64_t k, std::span<const double> weights);

struct Lemma1Setup {
  DelayModel delay;
  double gamma = 0.0;
  std::int64_t m = 1;
  // Batch multiplier n_k; the noise term is divided by it.
  std::int64_t n = 1;
  // Weights c_1, c_2, ... built for (delay, gamma, m, L).
  CSequence c;
};

struct Lemma1Report {
  double lhs = 0.0;  // E[ζ^{k+1}] + (γM/2)‖∇f(x_k)‖²
  double rhs = 0.0;  // ζ^k + (c₁γ²M + Lγ²M/2)σ²/n
  double margin = 0.0;  // rhs − lhs
  double standard_error = 0.0;
  bool holds = false;  // lhs ≤ rhs + 3 SE
};

// Estimates E[ζ^{k+1} | history] with n_mc independent one-step simulations
// from the frozen state history = (x_0, ..., x_k). Refuses n_mc < 100.
Lemma1Report CheckLemma1(const Problem& problem,
                         std::span<const ParamVector> history,
                         const Lemma1Setup& setup, std::int64_t n_mc,
                         std::uint64_t seed);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::int64_t first_k = 0;
  std::int64_t last_k = 0;
  std::int64_t points = 0;
  // Non-positive values left out of the log-log fit.
  std::int64_t excluded = 0;
};

// Least-squares fit of log y against log k over the last `window_fraction`
// of k ∈ [1, k_max]. Needs k_max ≥ 100 and at least 10 usable points.
RateFit FitRate(std::span<const std::int64_t> k, std::span<const double> y,
                double window_fraction);

struct Ensemble {
  std::string label;
  std::vector<std::int64_t> k;
  std::vector<double> mean;       // ensemble-mean grad_norm_sq
  std::vector<double> std_error;  // standard error of that mean
  std::vector<double> vtime;      // ensemble-mean virtual time
  std::int64_t seeds = 0;
};

// Row-wise mean over traces of equal length.
Ensemble EnsembleMean(const std::vector<std::vector<TraceRow>>& traces,
                      std::string label);

RateFit FitEnsembleRate(const Ensemble& ensemble, double window_fraction);

struct CompareEntry {
  std::string label;
  std::optional<std::int64_t> iteration;  // first k with mean < threshold
  std::optional<double> vtime;            // ensemble-mean vtime at that k
  bool censored = true;
  int rank_iterations = 0;  // 1 = fastest; ties share a rank
  int rank_vtime = 0;
};

struct CompareReport {
  double threshold = 0.0;
  std::vector<CompareEntry> entries;
  // e.g. "a < b = c", censored runs last.
  std::string ordering_iterations;
  std::string ordering_vtime;
};

CompareReport CompareRuns(const std::vector<Ensemble>& ensembles,
                          double threshold);

}  // namespace asgd

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

// Gradient staleness models, the c-sequence weights that couple delay
// probabilities to the Lyapunov function, and step-size admissibility.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "asgd/random.hpp"
#include "asgd/schedules.hpp"

namespace asgd {

// Delays on 0..T. Empty `weights` means uniform; otherwise weights[i] is the
// (unnormalized) weight of delay i and must have length T + 1.
struct BoundedDelay {
  std::int64_t max_delay = 0;
  std::vector<double> weights;
};

struct PoissonDelay {
  double rate = 1.0;
};

// P(τ_k = i) = 1/k for i = 1..k.
struct GrowingUniformDelay {};

// Delays dominated by a fixed series a_i. The series is also the sampling
// law: a discretized continuous law P(i ≤ X < i + 1), a zeta law
// i^{-α}/ζ(α) on i ≥ 1, or an explicit list a_1, a_2, ... whose leftover mass
// 1 − Σ a_i (if any) sits at delay 0. An explicit list summing above 1 is
// normalized for sampling, which keeps every probability below a_i.
struct SeriesBoundedDelay {
  enum class Family { kExplicit, kLogNormal, kWeibull, kZeta };
  Family family = Family::kExplicit;
  std::vector<double> explicit_series;  // a_1, a_2, ...
  double log_mu = 0.0;                  // log-normal location
  double log_sigma = 1.0;               // log-normal scale
  double weibull_shape = 1.0;
  double weibull_scale = 1.0;
  double zeta_exponent = 4.0;
};

// N simulated workers; delays emerge from the event loop in the engine.
struct SystemDelay {
  std::int64_t num_workers = 10;
  // Redraw λ ~ Gamma(2, 1) for every task instead of once per worker.
  bool redraw_rate_per_task = false;
};

using DelayModel = std::variant<BoundedDelay, PoissonDelay, GrowingUniformDelay,
                                SeriesBoundedDelay, SystemDelay>;

void ValidateDelayModel(const DelayModel& model);
std::string DelayModelName(const DelayModel& model);
bool IsSystem(const DelayModel& model);
// True when every delay is 0 (Bounded with T = 0).
bool IsZeroDelay(const DelayModel& model);

// P(τ_k = i) with the mass beyond k moved onto delay k. Throws
// AnalysisUnavailable for the System model.
double DelayPmf(const DelayModel& model, std::int64_t k, std::int64_t i);

// `batch` i.i.d. delays for iteration k ≥ 1, clipped to k − 1.
std::vector<std::int64_t> SampleDelays(const DelayModel& model, std::int64_t k,
                                       std::int64_t batch, Rng& rng);

// Batch delays in aggregated form: (delay, count) pairs with count > 0 and
// delays ascending. Large batches are drawn as one multinomial count vector
// rather than one delay at a time.
class DelaySampler {
 public:
  explicit DelaySampler(DelayModel model);

  std::vector<std::pair<std::int64_t, std::int64_t>> Sample(std::int64_t k,
                                                            std::int64_t batch,
                                                            Rng& rng) const;
  // One delay before clipping.
  std::int64_t DrawUnclipped(std::int64_t k, Rng& rng) const;
  const DelayModel& model() const { return model_; }

 private:
  // Clipped PMF over 0..k−1 for multinomial draws.
  std::vector<double> ClippedPmf(std::int64_t k) const;

  DelayModel model_;
  // Unclipped PMF table for stationary models, up to where the remaining
  // mass is below double resolution.
  std::vector<double> table_;
  std::vector<double> cdf_;
};

// Dominating series a_i for i ≥ 1 in the weight recursion.
struct DominatingSeries {
  std::vector<double> a;  // a[0] is a_1
  bool infinite_support = false;
  // Σ i² a_i < ∞.
  bool second_moment_finite = true;
  // Upper bound on Σ_{i > len} i² a_i.
  double tail_bound = 0.0;
};

struct SeriesOptions {
  // Stop at the smallest H with tail ≤ tolerance · head.
  double relative_tolerance = 1e-12;
  std::int64_t max_terms = 1'000'000;
  // Length used for GrowingUniform, whose series is not summable.
  std::int64_t divergent_horizon = 10'000;
};

DominatingSeries BuildDominatingSeries(const DelayModel& model,
                                       const SeriesOptions& options = {});

struct CSequence {
  std::vector<double> c;  // c[0] is c_1; c_{H+1} = 0 implied
  bool c1_finite = true;
  double gamma_used = 0.0;
  // Bound on the part of c_1 lost to truncating the series.
  double truncation_error_bound = 0.0;
  double c1() const;
};

// c_j = c_{j+1} + (γ M L² / 2) Σ_{i=j}^{H} i a_i, built backwards from
// c_{H+1} = 0. The sequence length is the larger of `horizon` and the series
// length.
CSequence ComputeCSequence(const DelayModel& model, double gamma,
                           std::int64_t m, double lipschitz,
                           std::int64_t horizon,
                           const SeriesOptions& options = {});

// 1/(2 M c1 + M L); zero when c1 is infinite.
double StepSizeCap(double c1, std::int64_t m, double lipschitz);

// Largest constant γ with γ ≤ 1/(2 M c1(γ) + M L), where c1 grows linearly
// in γ. Zero when the second moment of the series diverges.
double MaxAdmissibleStep(const DelayModel& model, std::int64_t m,
                         double lipschitz, const SeriesOptions& options = {});

struct AdmissibilityVerdict {
  bool admissible = false;
  double c1 = 0.0;
  double gamma_cap = 0.0;
  std::string reason;
  CSequence sequence;
};

// c1 from the schedule's largest step γ_1, then γ_k ≤ cap for k = 1..horizon.
AdmissibilityVerdict AdmissibilityCheck(const DelayModel& model,
                                        const StepSchedule& schedule,
                                        std::int64_t m, double lipschitz,
                                        std::int64_t horizon,
                                        const SeriesOptions& options = {});

// ζ(s) for s > 1.
double RiemannZeta(double s);

}  // namespace asgd

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

// Sequential virtual-time executor for synchronous SGD, asynchronous SGD with
// a fixed batch, and asynchronous SGD with an increasing batch.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "asgd/delay_models.hpp"
#include "asgd/problems.hpp"
#include "asgd/schedules.hpp"
#include "asgd/workers.hpp"

namespace asgd {

enum class Algorithm { kSync, kAsync, kAsyncIncreasing };

std::string AlgorithmName(Algorithm algorithm);
// Accepts "sync", "async", "async_i". Throws std::invalid_argument.
Algorithm ParseAlgorithm(const std::string& name);

using DelayGroups = std::vector<std::pair<std::int64_t, std::int64_t>>;

struct RunConfig {
  ProblemPtr problem;
  DelayModel delay = BoundedDelay{};
  StepSchedule step;
  BatchSchedule batch = FixedBatch{};
  Algorithm algorithm = Algorithm::kAsync;
  // Divide the gradient sum by M as well (sensitivity option; the plain
  // rules sum the M gradients).
  bool average = false;
  std::int64_t iterations = 100;
  std::uint64_t seed = 1;
  std::int64_t history_capacity = 4096;
  bool allow_inadmissible = false;
  bool record_lyapunov = true;
  bool record_delays = false;
  bool record_iterates = false;
  // Worker-pool settings for System delays; num_workers comes from the model.
  WorkerPoolOptions workers;
};

struct TraceRow {
  std::int64_t k = 0;
  double gamma = 0.0;
  std::int64_t batch = 0;
  double grad_norm_sq = 0.0;
  double objective = 0.0;
  double lyapunov = 0.0;
  std::int64_t max_delay = 0;
  double mean_delay = 0.0;
  double vtime = 0.0;
  std::int64_t rejections = 0;
};

enum class AdmissibilityStatus { kAdmissible, kInadmissible, kUnavailable };

std::string AdmissibilityStatusName(AdmissibilityStatus status);

struct RunSummary {
  std::string algorithm;
  std::string delay_model;
  std::string step_rule;
  std::uint64_t seed = 0;
  std::int64_t iterations = 0;
  double lipschitz = 0.0;
  double sigma2 = 0.0;
  AdmissibilityStatus admissibility = AdmissibilityStatus::kUnavailable;
  std::string admissibility_reason;
  double c1 = 0.0;
  double gamma_cap = 0.0;
  double final_grad_norm_sq = 0.0;
  double final_objective = 0.0;
  double final_vtime = 0.0;
  std::int64_t total_rejections = 0;
  // Gradients whose delay pointed past the retained history.
  std::int64_t history_overflow = 0;
  std::int64_t max_delay = 0;
  std::int64_t total_gradients = 0;
  int rng_version = 0;
};

struct RunTrace {
  std::vector<TraceRow> rows;  // k = 0..K
  RunSummary summary;
  std::vector<DelayGroups> delays;      // per iteration, when recorded
  std::vector<ParamVector> iterates;    // x_0..x_K, when recorded
  ParamVector final_x;
};

// Admissibility of the configuration as run: the effective step (γ_k / M when
// averaging) against the cap for the delay model, or against the zero-delay
// cap for Sync. Unavailable for System delays.
struct RunAdmissibility {
  AdmissibilityStatus status = AdmissibilityStatus::kUnavailable;
  double c1 = 0.0;
  double gamma_cap = 0.0;
  std::string reason;
  std::optional<CSequence> sequence;
};
RunAdmissibility CheckRunAdmissibility(const RunConfig& config);

// Throw InadmissibleConfig when the check fails and allow_inadmissible is
// off; std::invalid_argument on malformed configs.
RunTrace RunSyncSgd(const RunConfig& config);
RunTrace RunAsyncSgd(const RunConfig& config);
RunTrace RunAsyncSgdi(const RunConfig& config);
// Dispatch on config.algorithm.
RunTrace Run(const RunConfig& config);

// Σ over groups of `count` stochastic gradients at iterate_at(delay).
ParamVector AggregateGradient(
    const Problem& problem,
    const std::function<const ParamVector&(std::int64_t delay)>& iterate_at,
    const DelayGroups& groups, Rng& rng);

struct UpdateResult {
  ParamVector x;
  std::int64_t rejections = 0;
};

// x − scale · g, halving the step while the result is infeasible (at most 20
// halvings, each counted); keeps x if every attempt is infeasible.
UpdateResult ApplyUpdate(const Problem& problem, const ParamVector& x,
                         const ParamVector& gradient_sum, double scale);

// Multiplier applied to the gradient sum in iteration k: γ_k / n_k, further
// divided by M when averaging.
double UpdateScale(const RunConfig& config, std::int64_t k);

// Re-applies the update rule with recorded per-iteration delays and the
// run's gradient-noise stream. Returns x_0..x_K.
std::vector<ParamVector> ReplayIterates(const RunConfig& config,
                                        const std::vector<DelayGroups>& delays);

}  // namespace asgd

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

// Step-size and batch-size schedules, plus the convergence-condition checks
// that depend only on their shape.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace asgd {

struct ConstantStep {
  double gamma0 = 1e-3;
};

// γ₀ / ⌈k / decay_every⌉.
struct InvKStep {
  double gamma0 = 1e-3;
  std::int64_t decay_every = 1;
};

// γ₀ / (√j · ln(j + log_shift)) with j = ⌈k / decay_every⌉. With
// log_shift = 0 the first block uses γ₀ and the rule is clamped from above by
// γ₀ afterwards, since √2·ln 2 < 1.
struct InvSqrtKLogStep {
  double gamma0 = 1e-3;
  std::int64_t decay_every = 1;
  std::int64_t log_shift = 0;
};

using StepRule = std::variant<ConstantStep, InvKStep, InvSqrtKLogStep>;

struct StepSchedule {
  StepRule rule = ConstantStep{};
  // Optional upper clamp applied after the rule.
  std::optional<double> cap;
};

// Throws std::invalid_argument on non-positive γ₀ or decay period.
void ValidateStepSchedule(const StepSchedule& schedule);
// γ_k for k ≥ 1.
double StepAt(const StepSchedule& schedule, std::int64_t k);
// Same schedule with γ_k replaced by min(γ_k, cap). Clamping twice with the
// same cap is the same as clamping once.
StepSchedule Clamped(StepSchedule schedule, double cap);
// γ_k multiplied by `factor` (γ₀ and cap both scaled).
StepSchedule Scaled(StepSchedule schedule, double factor);
std::string StepRuleName(const StepSchedule& schedule);

struct FixedBatch {
  std::int64_t m = 1;
};

// n_k M gradients per update with n_k = ⌈α j^p⌉, j = ⌈k / change_every⌉, or
// n_k taken from `explicit_n` (the last entry repeats).
struct IncreasingBatch {
  std::int64_t m = 1;
  double alpha = 1.0;
  double power = 2.0;
  std::int64_t change_every = 1;
  std::vector<std::int64_t> explicit_n;
};

using BatchSchedule = std::variant<FixedBatch, IncreasingBatch>;

void ValidateBatchSchedule(const BatchSchedule& batch);
// M, the per-round base count.
std::int64_t BaseBatch(const BatchSchedule& batch);
// n_k (1 for a fixed batch).
std::int64_t BatchMultiplier(const BatchSchedule& batch, std::int64_t k);
// n_k M, the number of gradients collected in iteration k.
std::int64_t BatchAt(const BatchSchedule& batch, std::int64_t k);
bool IsIncreasing(const BatchSchedule& batch);

struct Theorem1Report {
  double cap = 0.0;
  bool cap_respected = false;          // γ_k ≤ cap for k = 1..horizon
  std::int64_t first_violation = 0;    // first offending k, 0 if none
  bool sum_diverges = false;           // Σ γ_k = ∞
  bool squares_summable = false;       // Σ γ_k² < ∞
  bool passes = false;
  std::string reason;
};

// Conditions are decided from the rule tag, not from partial sums. Requires
// finite c1.
Theorem1Report ValidateTheorem1(const StepSchedule& schedule, double c1,
                                std::int64_t m, double lipschitz,
                                std::int64_t horizon);

struct Theorem2Report {
  double cap = 0.0;
  bool reciprocals_summable = false;  // Σ 1/n_k < ∞
  bool constant_step = false;
  bool cap_respected = false;
  bool passes = false;
  std::string reason;
};

Theorem2Report ValidateTheorem2(const BatchSchedule& batch,
                                const StepSchedule& schedule, double c1,
                                std::int64_t m, double lipschitz);

}  // namespace asgd

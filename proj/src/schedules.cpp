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

#include "asgd/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "asgd/delay_models.hpp"

namespace asgd {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::int64_t Block(std::int64_t k, std::int64_t period) {
  return (k + period - 1) / period;
}

double RawStep(const StepRule& rule, std::int64_t k) {
  return std::visit(
      Overloaded{
          [](const ConstantStep& s) { return s.gamma0; },
          [k](const InvKStep& s) {
            return s.gamma0 / static_cast<double>(Block(k, s.decay_every));
          },
          [k](const InvSqrtKLogStep& s) {
            const auto j = static_cast<double>(Block(k, s.decay_every));
            if (s.log_shift == 0) {
              if (j < 2.0) return s.gamma0;
              return s.gamma0 * std::min(1.0, 1.0 / (std::sqrt(j) * std::log(j)));
            }
            return s.gamma0 /
                   (std::sqrt(j) *
                    std::log(j + static_cast<double>(s.log_shift)));
          },
      },
      rule);
}

}  // namespace

void ValidateStepSchedule(const StepSchedule& schedule) {
  std::visit(Overloaded{
                 [](const ConstantStep& s) {
                   if (!(s.gamma0 > 0.0)) {
                     throw std::invalid_argument("step: gamma0 must be > 0");
                   }
                 },
                 [](const InvKStep& s) {
                   if (!(s.gamma0 > 0.0) || s.decay_every < 1) {
                     throw std::invalid_argument(
                         "step: gamma0 must be > 0 and decay_every >= 1");
                   }
                 },
                 [](const InvSqrtKLogStep& s) {
                   if (!(s.gamma0 > 0.0) || s.decay_every < 1 ||
                       s.log_shift < 0) {
                     throw std::invalid_argument(
                         "step: gamma0 must be > 0, decay_every >= 1, "
                         "log_shift >= 0");
                   }
                 },
             },
             schedule.rule);
  if (schedule.cap && !(*schedule.cap > 0.0)) {
    throw std::invalid_argument("step: cap must be > 0");
  }
}

double StepAt(const StepSchedule& schedule, std::int64_t k) {
  if (k < 1) throw std::invalid_argument("step: k must be >= 1");
  const double gamma = RawStep(schedule.rule, k);
  return schedule.cap ? std::min(gamma, *schedule.cap) : gamma;
}

StepSchedule Clamped(StepSchedule schedule, double cap) {
  schedule.cap = schedule.cap ? std::min(*schedule.cap, cap) : cap;
  return schedule;
}

StepSchedule Scaled(StepSchedule schedule, double factor) {
  std::visit([factor](auto& rule) { rule.gamma0 *= factor; }, schedule.rule);
  if (schedule.cap) *schedule.cap *= factor;
  return schedule;
}

std::string StepRuleName(const StepSchedule& schedule) {
  return std::visit(Overloaded{
                        [](const ConstantStep&) { return "constant"; },
                        [](const InvKStep&) { return "inv_k"; },
                        [](const InvSqrtKLogStep&) { return "inv_sqrt_k_log"; },
                    },
                    schedule.rule);
}

void ValidateBatchSchedule(const BatchSchedule& batch) {
  if (BaseBatch(batch) < 1) throw std::invalid_argument("batch: m must be >= 1");
  if (const auto* inc = std::get_if<IncreasingBatch>(&batch)) {
    if (inc->explicit_n.empty()) {
      if (!(inc->alpha > 0.0) || !(inc->power >= 0.0) || inc->change_every < 1) {
        throw std::invalid_argument(
            "batch: need alpha > 0, power >= 0, change_every >= 1");
      }
    } else {
      std::int64_t prev = 1;
      for (std::int64_t n : inc->explicit_n) {
        if (n < prev) {
          throw std::invalid_argument(
              "batch: explicit n_k must be >= 1 and non-decreasing");
        }
        prev = n;
      }
    }
  }
}

std::int64_t BaseBatch(const BatchSchedule& batch) {
  return std::visit([](const auto& b) { return b.m; }, batch);
}

std::int64_t BatchMultiplier(const BatchSchedule& batch, std::int64_t k) {
  const auto* inc = std::get_if<IncreasingBatch>(&batch);
  if (inc == nullptr) return 1;
  if (!inc->explicit_n.empty()) {
    const auto idx = static_cast<std::size_t>(
        std::min<std::int64_t>(k - 1, std::ssize(inc->explicit_n) - 1));
    return inc->explicit_n[idx];
  }
  const auto j = static_cast<double>(Block(k, inc->change_every));
  // Round away representation noise so that α j^p landing on an integer
  // is not pushed up by one.
  const double raw = inc->alpha * std::pow(j, inc->power);
  const double nearest = std::round(raw);
  const double n =
      std::abs(raw - nearest) <= 1e-9 * std::max(1.0, nearest) ? nearest
                                                                : std::ceil(raw);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
}

std::int64_t BatchAt(const BatchSchedule& batch, std::int64_t k) {
  return BatchMultiplier(batch, k) * BaseBatch(batch);
}

bool IsIncreasing(const BatchSchedule& batch) {
  return std::holds_alternative<IncreasingBatch>(batch);
}

Theorem1Report ValidateTheorem1(const StepSchedule& schedule, double c1,
                                std::int64_t m, double lipschitz,
                                std::int64_t horizon) {
  Theorem1Report report;
  report.cap = StepSizeCap(c1, m, lipschitz);
  report.cap_respected = true;
  for (std::int64_t k = 1; k <= horizon; ++k) {
    if (StepAt(schedule, k) > report.cap) {
      report.cap_respected = false;
      report.first_violation = k;
      break;
    }
  }
  std::visit(Overloaded{
                 [&](const ConstantStep&) {
                   report.sum_diverges = true;
                   report.squares_summable = false;
                 },
                 // 1/k and 1/(√k ln k) are not summable; their squares are.
                 [&](const InvKStep&) {
                   report.sum_diverges = true;
                   report.squares_summable = true;
                 },
                 [&](const InvSqrtKLogStep&) {
                   report.sum_diverges = true;
                   report.squares_summable = true;
                 },
             },
             schedule.rule);
  report.passes =
      report.cap_respected && report.sum_diverges && report.squares_summable;
  if (!report.cap_respected) {
    report.reason = "gamma_k exceeds the cap 1/(2 M c1 + M L) at k = " +
                    std::to_string(report.first_violation);
  } else if (!report.squares_summable) {
    report.reason = "sum of gamma_k^2 diverges for a constant step";
  } else if (!report.sum_diverges) {
    report.reason = "sum of gamma_k converges";
  }
  return report;
}

Theorem2Report ValidateTheorem2(const BatchSchedule& batch,
                                const StepSchedule& schedule, double c1,
                                std::int64_t m, double lipschitz) {
  Theorem2Report report;
  report.cap = StepSizeCap(c1, m, lipschitz);
  if (const auto* inc = std::get_if<IncreasingBatch>(&batch)) {
    // An explicit list repeats its last entry, so its reciprocals diverge.
    report.reciprocals_summable = inc->explicit_n.empty() && inc->power > 1.0;
  }
  report.constant_step = std::holds_alternative<ConstantStep>(schedule.rule);
  report.cap_respected =
      report.constant_step && StepAt(schedule, 1) <= report.cap;
  report.passes = report.reciprocals_summable && report.constant_step &&
                  report.cap_respected;
  if (!IsIncreasing(batch)) {
    report.reason = "batch size is fixed";
  } else if (!report.reciprocals_summable) {
    report.reason = "sum of 1/n_k diverges (need power > 1)";
  } else if (!report.constant_step) {
    report.reason = "step size is not constant";
  } else if (!report.cap_respected) {
    report.reason = "step exceeds the cap 1/(2 M c1 + M L)";
  }
  return report;
}

}  // namespace asgd

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

#include "asgd/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "asgd/errors.hpp"

namespace asgd {

namespace {

constexpr int kMaxHalvings = 20;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Iterates x_v for the last `capacity` versions v.
class HistoryRing {
 public:
  explicit HistoryRing(std::int64_t capacity)
      : slots_(static_cast<std::size_t>(capacity)) {}

  void Push(const ParamVector& x) {
    slots_[static_cast<std::size_t>(next_ % std::ssize(slots_))] = x;
    ++next_;
  }
  std::int64_t newest() const { return next_ - 1; }
  std::int64_t oldest() const {
    return std::max<std::int64_t>(0, next_ - std::ssize(slots_));
  }
  const ParamVector& At(std::int64_t version) const {
    return slots_[static_cast<std::size_t>(version % std::ssize(slots_))];
  }

 private:
  std::vector<ParamVector> slots_;
  std::int64_t next_ = 0;
};

void ValidateRunConfig(const RunConfig& config) {
  if (!config.problem) throw std::invalid_argument("run: problem is not set");
  if (config.iterations < 1) throw std::invalid_argument("run: K must be >= 1");
  if (config.history_capacity < 1) {
    throw std::invalid_argument("run: history capacity must be >= 1");
  }
  ValidateDelayModel(config.delay);
  ValidateStepSchedule(config.step);
  ValidateBatchSchedule(config.batch);
  if (config.algorithm == Algorithm::kAsync && IsIncreasing(config.batch)) {
    throw std::invalid_argument("run: async needs a fixed batch schedule");
  }
  if (config.algorithm == Algorithm::kAsyncIncreasing &&
      !IsIncreasing(config.batch)) {
    throw std::invalid_argument("run: async_i needs an increasing batch schedule");
  }
}

// Step schedule as seen by the update rule x − γ'_k Σ G.
StepSchedule EffectiveSchedule(const RunConfig& config) {
  if (!config.average) return config.step;
  return Scaled(config.step, 1.0 / static_cast<double>(BaseBatch(config.batch)));
}

RunTrace Execute(const RunConfig& config) {
  ValidateRunConfig(config);
  const RunAdmissibility admissibility = CheckRunAdmissibility(config);
  if (admissibility.status == AdmissibilityStatus::kInadmissible &&
      !config.allow_inadmissible) {
    throw InadmissibleConfig("inadmissible configuration: " +
                             admissibility.reason);
  }

  const Problem& problem = *config.problem;
  const bool sync = config.algorithm == Algorithm::kSync;
  const bool system = IsSystem(config.delay);

  Rng grad_rng = Rng::ForStream(config.seed, Stream::kGradientNoise);
  Rng delay_rng = Rng::ForStream(config.seed, Stream::kDelays);
  std::optional<DelaySampler> sampler;
  std::optional<WorkerPool> pool;
  if (system) {
    WorkerPoolOptions options = config.workers;
    const auto& sys = std::get<SystemDelay>(config.delay);
    options.num_workers = sys.num_workers;
    options.redraw_rate_per_task = sys.redraw_rate_per_task;
    pool.emplace(options, config.seed);
  } else if (!sync) {
    sampler.emplace(config.delay);
  }

  // Lyapunov weights c_1..c_H, with H limited by the retained history.
  std::vector<double> weights;
  bool lyapunov_defined = config.record_lyapunov && admissibility.sequence &&
                          admissibility.sequence->c1_finite;
  if (lyapunov_defined) {
    const auto& c = admissibility.sequence->c;
    const auto h = std::min<std::size_t>(
        c.size(), static_cast<std::size_t>(config.history_capacity));
    weights.assign(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(h));
    while (!weights.empty() && weights.back() == 0.0) weights.pop_back();
  }
  const std::optional<double> optimum = problem.OptimumValue();
  double running_min = std::numeric_limits<double>::infinity();
  std::deque<double> step_norms;  // front is ‖x_k − x_{k−1}‖²

  RunTrace trace;
  trace.rows.reserve(static_cast<std::size_t>(config.iterations + 1));
  HistoryRing history(config.history_capacity);
  ParamVector x = problem.StartPoint();
  history.Push(x);
  if (config.record_iterates) trace.iterates.push_back(x);

  RunSummary& summary = trace.summary;
  auto make_row = [&](std::int64_t k, double gamma, std::int64_t batch,
                      std::int64_t max_delay, double mean_delay, double vtime,
                      std::int64_t rejections) {
    TraceRow row;
    row.k = k;
    row.gamma = gamma;
    row.batch = batch;
    row.grad_norm_sq = problem.FullGradient(x).squaredNorm();
    row.objective = problem.Objective(x);
    running_min = std::min(running_min, row.objective);
    if (lyapunov_defined) {
      double zeta = row.objective - optimum.value_or(running_min);
      for (std::size_t j = 0; j < step_norms.size() && j < weights.size(); ++j) {
        zeta += weights[j] * step_norms[j];
      }
      row.lyapunov = zeta;
    } else {
      row.lyapunov = kNaN;
    }
    row.max_delay = max_delay;
    row.mean_delay = mean_delay;
    row.vtime = vtime;
    row.rejections = rejections;
    return row;
  };
  trace.rows.push_back(make_row(0, 0.0, 0, 0, 0.0, 0.0, 0));

  double vtime = 0.0;
  for (std::int64_t k = 1; k <= config.iterations; ++k) {
    const std::int64_t batch = BatchAt(config.batch, k);
    DelayGroups groups;
    if (sync) {
      groups.emplace_back(0, batch);
      vtime = system ? vtime + pool->SyncRound(batch) : static_cast<double>(k);
    } else if (system) {
      AsyncRound round = pool->CollectAsync(k - 1, batch);
      groups = std::move(round.groups);
      vtime = round.time;
    } else {
      groups = sampler->Sample(k, batch, delay_rng);
      vtime = static_cast<double>(k);
    }

    // Clip delays that point past the retained history.
    std::int64_t max_delay = 0;
    double delay_sum = 0.0;
    const std::int64_t reach = (k - 1) - history.oldest();
    for (auto& [delay, count] : groups) {
      if (delay > reach) {
        summary.history_overflow += count;
        delay = reach;
      }
      max_delay = std::max(max_delay, delay);
      delay_sum += static_cast<double>(delay) * static_cast<double>(count);
    }
    if (config.record_delays) trace.delays.push_back(groups);

    const ParamVector g = AggregateGradient(
        problem,
        [&](std::int64_t delay) -> const ParamVector& {
          return history.At(k - 1 - delay);
        },
        groups, grad_rng);
    UpdateResult update = ApplyUpdate(problem, x, g, UpdateScale(config, k));
    const double step_sq = (update.x - x).squaredNorm();
    x = std::move(update.x);
    history.Push(x);
    if (config.record_iterates) trace.iterates.push_back(x);
    if (lyapunov_defined) {
      step_norms.push_front(step_sq);
      if (step_norms.size() > weights.size()) step_norms.pop_back();
    }

    summary.total_rejections += update.rejections;
    summary.max_delay = std::max(summary.max_delay, max_delay);
    summary.total_gradients += batch;
    trace.rows.push_back(make_row(k, StepAt(config.step, k), batch, max_delay,
                                  delay_sum / static_cast<double>(batch), vtime,
                                  update.rejections));
  }

  summary.algorithm = AlgorithmName(config.algorithm);
  summary.delay_model = DelayModelName(config.delay);
  summary.step_rule = StepRuleName(config.step);
  summary.seed = config.seed;
  summary.iterations = config.iterations;
  summary.lipschitz = problem.Lipschitz();
  summary.sigma2 = problem.Sigma2();
  summary.admissibility = admissibility.status;
  summary.admissibility_reason = admissibility.reason;
  summary.c1 = admissibility.c1;
  summary.gamma_cap = admissibility.gamma_cap;
  summary.final_grad_norm_sq = trace.rows.back().grad_norm_sq;
  summary.final_objective = trace.rows.back().objective;
  summary.final_vtime = trace.rows.back().vtime;
  summary.rng_version = kRngVersion;
  trace.final_x = x;
  return trace;
}

}  // namespace

std::string AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kSync:
      return "sync";
    case Algorithm::kAsync:
      return "async";
    case Algorithm::kAsyncIncreasing:
      return "async_i";
  }
  return "unknown";
}

Algorithm ParseAlgorithm(const std::string& name) {
  if (name == "sync") return Algorithm::kSync;
  if (name == "async") return Algorithm::kAsync;
  if (name == "async_i") return Algorithm::kAsyncIncreasing;
  throw std::invalid_argument("unknown algorithm '" + name +
                              "' (expected sync, async or async_i)");
}

std::string AdmissibilityStatusName(AdmissibilityStatus status) {
  switch (status) {
    case AdmissibilityStatus::kAdmissible:
      return "admissible";
    case AdmissibilityStatus::kInadmissible:
      return "inadmissible";
    case AdmissibilityStatus::kUnavailable:
      return "unavailable";
  }
  return "unknown";
}

RunAdmissibility CheckRunAdmissibility(const RunConfig& config) {
  RunAdmissibility out;
  const bool sync = config.algorithm == Algorithm::kSync;
  if (IsSystem(config.delay) && !sync) {
    out.status = AdmissibilityStatus::kUnavailable;
    out.reason = "system delays have no closed-form law";
    return out;
  }
  const DelayModel model = sync ? DelayModel{BoundedDelay{0, {}}} : config.delay;
  const AdmissibilityVerdict verdict = AdmissibilityCheck(
      model, EffectiveSchedule(config), BaseBatch(config.batch),
      config.problem->Lipschitz(), config.iterations);
  out.status = verdict.admissible ? AdmissibilityStatus::kAdmissible
                                  : AdmissibilityStatus::kInadmissible;
  out.c1 = verdict.c1;
  out.gamma_cap = verdict.gamma_cap;
  out.reason = verdict.reason;
  out.sequence = verdict.sequence;
  return out;
}

RunTrace RunSyncSgd(const RunConfig& config) {
  RunConfig copy = config;
  copy.algorithm = Algorithm::kSync;
  return Execute(copy);
}

RunTrace RunAsyncSgd(const RunConfig& config) {
  RunConfig copy = config;
  copy.algorithm = Algorithm::kAsync;
  return Execute(copy);
}

RunTrace RunAsyncSgdi(const RunConfig& config) {
  RunConfig copy = config;
  copy.algorithm = Algorithm::kAsyncIncreasing;
  return Execute(copy);
}

RunTrace Run(const RunConfig& config) { return Execute(config); }

ParamVector AggregateGradient(
    const Problem& problem,
    const std::function<const ParamVector&(std::int64_t delay)>& iterate_at,
    const DelayGroups& groups, Rng& rng) {
  ParamVector sum = ParamVector::Zero(problem.Dimension());
  for (const auto& [delay, count] : groups) {
    sum += problem.StochasticGradientSum(iterate_at(delay), count, rng);
  }
  return sum;
}

UpdateResult ApplyUpdate(const Problem& problem, const ParamVector& x,
                         const ParamVector& gradient_sum, double scale) {
  UpdateResult result;
  double step = scale;
  for (int attempt = 0; attempt <= kMaxHalvings; ++attempt) {
    ParamVector proposal = x - step * gradient_sum;
    if (problem.Feasible(proposal)) {
      result.x = std::move(proposal);
      return result;
    }
    if (attempt == kMaxHalvings) break;
    step *= 0.5;
    ++result.rejections;
  }
  result.x = x;
  return result;
}

double UpdateScale(const RunConfig& config, std::int64_t k) {
  double scale = StepAt(config.step, k) /
                 static_cast<double>(BatchMultiplier(config.batch, k));
  if (config.average) scale /= static_cast<double>(BaseBatch(config.batch));
  return scale;
}

std::vector<ParamVector> ReplayIterates(const RunConfig& config,
                                        const std::vector<DelayGroups>& delays) {
  ValidateRunConfig(config);
  if (std::ssize(delays) != config.iterations) {
    throw std::invalid_argument("replay: need one delay record per iteration");
  }
  const Problem& problem = *config.problem;
  Rng grad_rng = Rng::ForStream(config.seed, Stream::kGradientNoise);
  std::vector<ParamVector> iterates{problem.StartPoint()};
  for (std::int64_t k = 1; k <= config.iterations; ++k) {
    const ParamVector g = AggregateGradient(
        problem,
        [&](std::int64_t delay) -> const ParamVector& {
          return iterates[static_cast<std::size_t>(k - 1 - delay)];
        },
        delays[static_cast<std::size_t>(k - 1)], grad_rng);
    iterates.push_back(
        ApplyUpdate(problem, iterates.back(), g, UpdateScale(config, k)).x);
  }
  return iterates;
}

}  // namespace asgd

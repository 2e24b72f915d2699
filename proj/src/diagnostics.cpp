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

#include "asgd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace asgd {

namespace {

constexpr std::int64_t kMinMonteCarlo = 100;
constexpr std::int64_t kMinFitPoints = 10;
constexpr std::int64_t kMinFitIterations = 100;

// Weighted sum Σ_{j=first..last} c_j ‖x_{k+1−j} − x_{k−j}‖² where x_v is
// history[v − base].
double WeightedSteps(std::span<const ParamVector> history, std::int64_t base,
                     std::int64_t k, std::span<const double> weights,
                     std::int64_t first, std::int64_t last) {
  double sum = 0.0;
  for (std::int64_t j = first; j <= last; ++j) {
    const auto newer = static_cast<std::size_t>(k + 1 - j - base);
    const auto older = static_cast<std::size_t>(k - j - base);
    sum += weights[static_cast<std::size_t>(j - 1)] *
           (history[newer] - history[older]).squaredNorm();
  }
  return sum;
}

std::string OrderingString(const std::vector<CompareEntry>& entries,
                           bool by_vtime) {
  std::vector<const CompareEntry*> sorted;
  for (const auto& e : entries) sorted.push_back(&e);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [by_vtime](const CompareEntry* a, const CompareEntry* b) {
                     return by_vtime ? a->rank_vtime < b->rank_vtime
                                     : a->rank_iterations < b->rank_iterations;
                   });
  std::string out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0) {
      const int prev = by_vtime ? sorted[i - 1]->rank_vtime
                                : sorted[i - 1]->rank_iterations;
      const int cur =
          by_vtime ? sorted[i]->rank_vtime : sorted[i]->rank_iterations;
      out += prev == cur ? " = " : " < ";
    }
    out += sorted[i]->label;
    if (sorted[i]->censored) out += " (censored)";
  }
  return out;
}

}  // namespace

LyapunovValue ComputeLyapunov(const Problem& problem,
                              std::span<const ParamVector> history,
                              std::int64_t k, std::span<const double> weights) {
  if (history.empty()) throw std::invalid_argument("lyapunov: empty history");
  const std::int64_t h = std::ssize(history) - 1;
  if (k < h) throw std::invalid_argument("lyapunov: history longer than k + 1");
  const std::int64_t base = k - h;

  LyapunovValue out;
  const double f = problem.Objective(history.back());
  if (const auto optimum = problem.OptimumValue()) {
    out.optimality_error = f - *optimum;
  } else {
    double best = f;
    for (const auto& x : history) best = std::min(best, problem.Objective(x));
    out.optimality_error = f - best;
    out.optimum_estimated = true;
  }
  // Trailing zero weights contribute nothing and need no history.
  std::int64_t needed = std::ssize(weights);
  while (needed > 0 && weights[static_cast<std::size_t>(needed - 1)] == 0.0) {
    --needed;
  }
  needed = std::min(needed, k);
  const std::int64_t usable = std::min(needed, h);
  out.truncated = usable < needed;
  out.asynchronicity_error = WeightedSteps(history, base, k, weights, 1, usable);
  out.value = out.optimality_error + out.asynchronicity_error;
  return out;
}

Lemma1Report CheckLemma1(const Problem& problem,
                         std::span<const ParamVector> history,
                         const Lemma1Setup& setup, std::int64_t n_mc,
                         std::uint64_t seed) {
  if (n_mc < kMinMonteCarlo) {
    throw std::invalid_argument("lemma check: n_mc must be >= 100");
  }
  if (history.empty()) throw std::invalid_argument("lemma check: empty history");
  if (!setup.c.c1_finite) {
    throw std::invalid_argument("lemma check: c1 must be finite");
  }
  const std::int64_t k = std::ssize(history) - 1;
  const std::span<const double> c(setup.c.c);
  const ParamVector& xk = history.back();
  const double f_star = problem.OptimumValue().value_or(0.0);

  const double zeta_k = ComputeLyapunov(problem, history, k, c).value;
  // Part of ζ^{k+1} fixed by the history: Σ_{j≥2} c_j ‖x_{k+2−j} − x_{k+1−j}‖².
  std::vector<double> shifted(c.begin() + std::min<std::ptrdiff_t>(1, std::ssize(c)),
                              c.end());
  const double carried =
      WeightedSteps(history, 0, k, shifted, 1,
                    std::min<std::int64_t>(k, std::ssize(shifted)));
  const double c1 = c.empty() ? 0.0 : c.front();

  const DelaySampler sampler(setup.delay);
  Rng delay_rng = Rng::ForStream(seed, Stream::kDelays);
  Rng grad_rng = Rng::ForStream(seed, Stream::kGradientNoise);
  const std::int64_t batch = setup.n * setup.m;
  const double scale = setup.gamma / static_cast<double>(setup.n);

  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t r = 1; r <= n_mc; ++r) {
    const DelayGroups groups = sampler.Sample(k + 1, batch, delay_rng);
    const ParamVector g = AggregateGradient(
        problem,
        [&](std::int64_t delay) -> const ParamVector& {
          return history[static_cast<std::size_t>(k - delay)];
        },
        groups, grad_rng);
    const ParamVector next = ApplyUpdate(problem, xk, g, scale).x;
    const double zeta_next = problem.Objective(next) - f_star +
                             c1 * (next - xk).squaredNorm() + carried;
    const double delta = zeta_next - mean;
    mean += delta / static_cast<double>(r);
    m2 += delta * (zeta_next - mean);
  }
  const double variance = m2 / static_cast<double>(n_mc - 1);

  Lemma1Report report;
  const auto mm = static_cast<double>(setup.m);
  const double gamma = setup.gamma;
  report.lhs =
      mean + gamma * mm / 2.0 * problem.FullGradient(xk).squaredNorm();
  report.rhs = zeta_k + (c1 * gamma * gamma * mm +
                         problem.Lipschitz() * gamma * gamma * mm / 2.0) *
                            problem.Sigma2() / static_cast<double>(setup.n);
  report.margin = report.rhs - report.lhs;
  report.standard_error = std::sqrt(variance / static_cast<double>(n_mc));
  report.holds = report.lhs <= report.rhs + 3.0 * report.standard_error;
  return report;
}

RateFit FitRate(std::span<const std::int64_t> k, std::span<const double> y,
                double window_fraction) {
  if (k.size() != y.size()) throw std::invalid_argument("rate fit: size mismatch");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw std::invalid_argument("rate fit: window fraction must be in (0, 1]");
  }
  const std::int64_t k_max = k.empty() ? 0 : *std::max_element(k.begin(), k.end());
  if (k_max < kMinFitIterations) {
    throw std::invalid_argument("rate fit: need at least 100 iterations");
  }
  const double k_lo = std::max(1.0, static_cast<double>(k_max) * (1.0 - window_fraction));

  RateFit fit;
  fit.first_k = k_max;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] < 1 || static_cast<double>(k[i]) < k_lo) continue;
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
      ++fit.excluded;
      continue;
    }
    lx.push_back(std::log(static_cast<double>(k[i])));
    ly.push_back(std::log(y[i]));
    fit.first_k = std::min(fit.first_k, k[i]);
    fit.last_k = std::max(fit.last_k, k[i]);
  }
  fit.points = std::ssize(lx);
  if (fit.points < kMinFitPoints) {
    throw std::invalid_argument("rate fit: fewer than 10 usable points");
  }
  const double n = static_cast<double>(fit.points);
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

Ensemble EnsembleMean(const std::vector<std::vector<TraceRow>>& traces,
                      std::string label) {
  if (traces.empty()) throw std::invalid_argument("ensemble: no traces");
  const std::size_t rows = traces.front().size();
  for (const auto& t : traces) {
    if (t.size() != rows) {
      throw std::invalid_argument("ensemble: traces differ in length");
    }
  }
  Ensemble out;
  out.label = std::move(label);
  out.seeds = std::ssize(traces);
  const double n = static_cast<double>(traces.size());
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0, vsum = 0.0;
    for (const auto& t : traces) {
      sum += t[r].grad_norm_sq;
      vsum += t[r].vtime;
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& t : traces) {
      ss += (t[r].grad_norm_sq - mean) * (t[r].grad_norm_sq - mean);
    }
    out.k.push_back(traces.front()[r].k);
    out.mean.push_back(mean);
    out.std_error.push_back(traces.size() > 1 ? std::sqrt(ss / (n - 1.0) / n)
                                              : 0.0);
    out.vtime.push_back(vsum / n);
  }
  return out;
}

RateFit FitEnsembleRate(const Ensemble& ensemble, double window_fraction) {
  return FitRate(ensemble.k, ensemble.mean, window_fraction);
}

CompareReport CompareRuns(const std::vector<Ensemble>& ensembles,
                          double threshold) {
  CompareReport report;
  report.threshold = threshold;
  for (const auto& e : ensembles) {
    CompareEntry entry;
    entry.label = e.label;
    for (std::size_t i = 0; i < e.k.size(); ++i) {
      if (e.mean[i] < threshold) {
        entry.iteration = e.k[i];
        entry.vtime = e.vtime[i];
        entry.censored = false;
        break;
      }
    }
    report.entries.push_back(entry);
  }
  // Dense ranks; censored entries share the last rank.
  auto assign = [&](bool by_vtime) {
    std::vector<double> keys;
    for (const auto& e : report.entries) {
      if (e.censored) continue;
      keys.push_back(by_vtime ? *e.vtime : static_cast<double>(*e.iteration));
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    for (auto& e : report.entries) {
      int rank = static_cast<int>(keys.size()) + 1;
      if (!e.censored) {
        const double key =
            by_vtime ? *e.vtime : static_cast<double>(*e.iteration);
        rank = static_cast<int>(
                   std::lower_bound(keys.begin(), keys.end(), key) - keys.begin()) +
               1;
      }
      (by_vtime ? e.rank_vtime : e.rank_iterations) = rank;
    }
  };
  assign(false);
  assign(true);
  report.ordering_iterations = OrderingString(report.entries, false);
  report.ordering_vtime = OrderingString(report.entries, true);
  return report;
}

}  // namespace asgd

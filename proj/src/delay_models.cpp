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

#include "asgd/delay_models.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "asgd/errors.hpp"

namespace asgd {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kInf = std::numeric_limits<double>::infinity();
// Batches up to this size are drawn one delay at a time.
constexpr std::int64_t kIndividualDrawLimit = 32;
constexpr std::size_t kMaxTableLength = std::size_t{1} << 20;

double UpperNormalTail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Σ_{j≥0} (q + j)^{-s} by Euler–Maclaurin after N direct terms.
double HurwitzZeta(double s, double q) {
  constexpr int kDirect = 64;
  double sum = 0.0;
  for (int j = kDirect - 1; j >= 0; --j) sum += std::pow(q + j, -s);
  const double a = q + kDirect;
  sum += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
  // Bernoulli corrections B_2k / (2k)! · s(s+1)...(s+2k−2) a^{-s-2k+1}.
  static constexpr double kB[] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0,
                                  -1.0 / 30.0, 5.0 / 66.0};
  double rising = s;  // s (s+1) ... (s + 2k − 2)
  double factorial = 2.0;
  double power = std::pow(a, -s - 1.0);
  for (int k = 1; k <= 5; ++k) {
    sum += kB[k - 1] / factorial * rising * power;
    rising *= (s + 2 * k - 1) * (s + 2 * k);
    factorial *= (2 * k + 1) * (2 * k + 2);
    power /= a * a;
  }
  return sum;
}

double PoissonPmf(double rate, std::int64_t i) {
  const auto x = static_cast<double>(i);
  return std::exp(x * std::log(rate) - rate - std::lgamma(x + 1.0));
}

double LogNormalSurvival(const SeriesBoundedDelay& s, double x) {
  if (x <= 0.0) return 1.0;
  return UpperNormalTail((std::log(x) - s.log_mu) / s.log_sigma);
}

double WeibullSurvival(const SeriesBoundedDelay& s, double x) {
  if (x <= 0.0) return 1.0;
  return std::exp(-std::pow(x / s.weibull_scale, s.weibull_shape));
}

double ExplicitNormalizer(const SeriesBoundedDelay& s) {
  const double total =
      std::accumulate(s.explicit_series.begin(), s.explicit_series.end(), 0.0);
  return std::max(1.0, total);
}

// Unclipped P(τ = i) for models whose law does not depend on k.
double StationaryPmf(const DelayModel& model, std::int64_t i) {
  if (i < 0) return 0.0;
  return std::visit(
      Overloaded{
          [i](const BoundedDelay& b) -> double {
            if (i > b.max_delay) return 0.0;
            if (b.weights.empty()) return 1.0 / static_cast<double>(b.max_delay + 1);
            const double total =
                std::accumulate(b.weights.begin(), b.weights.end(), 0.0);
            return b.weights[static_cast<std::size_t>(i)] / total;
          },
          [i](const PoissonDelay& p) { return PoissonPmf(p.rate, i); },
          [](const GrowingUniformDelay&) -> double {
            throw std::logic_error("growing-uniform law depends on k");
          },
          [i](const SeriesBoundedDelay& s) -> double {
            const auto x = static_cast<double>(i);
            switch (s.family) {
              case SeriesBoundedDelay::Family::kExplicit: {
                const double norm = ExplicitNormalizer(s);
                if (i == 0) {
                  double rest = 1.0;
                  for (double a : s.explicit_series) rest -= a / norm;
                  return std::max(0.0, rest);
                }
                if (i > std::ssize(s.explicit_series)) return 0.0;
                return s.explicit_series[static_cast<std::size_t>(i - 1)] / norm;
              }
              case SeriesBoundedDelay::Family::kLogNormal:
                return LogNormalSurvival(s, x) - LogNormalSurvival(s, x + 1.0);
              case SeriesBoundedDelay::Family::kWeibull:
                return WeibullSurvival(s, x) - WeibullSurvival(s, x + 1.0);
              case SeriesBoundedDelay::Family::kZeta:
                if (i == 0) return 0.0;
                return std::pow(x, -s.zeta_exponent) / RiemannZeta(s.zeta_exponent);
            }
            return 0.0;
          },
          [](const SystemDelay&) -> double {
            throw AnalysisUnavailable("system delay has no closed-form PMF");
          },
      },
      model);
}

// Unclipped P(τ ≥ i) for stationary models.
double StationaryTail(const DelayModel& model, std::int64_t i) {
  if (i <= 0) return 1.0;
  return std::visit(
      Overloaded{
          [&](const BoundedDelay& b) {
            double t = 0.0;
            for (std::int64_t j = b.max_delay; j >= i; --j) {
              t += StationaryPmf(model, j);
            }
            return t;
          },
          [i](const PoissonDelay& p) {
            // Sum upward until the terms no longer change the total.
            double t = 0.0;
            for (std::int64_t j = i;; ++j) {
              const double term = PoissonPmf(p.rate, j);
              t += term;
              if (static_cast<double>(j) > p.rate && term <= t * 1e-18) break;
              if (term == 0.0 && static_cast<double>(j) > p.rate) break;
            }
            return t;
          },
          [](const GrowingUniformDelay&) -> double {
            throw std::logic_error("growing-uniform law depends on k");
          },
          [&](const SeriesBoundedDelay& s) -> double {
            const auto x = static_cast<double>(i);
            switch (s.family) {
              case SeriesBoundedDelay::Family::kExplicit: {
                double t = 0.0;
                for (std::int64_t j = std::ssize(s.explicit_series); j >= i; --j) {
                  t += StationaryPmf(model, j);
                }
                return t;
              }
              case SeriesBoundedDelay::Family::kLogNormal:
                return LogNormalSurvival(s, x);
              case SeriesBoundedDelay::Family::kWeibull:
                return WeibullSurvival(s, x);
              case SeriesBoundedDelay::Family::kZeta:
                return HurwitzZeta(s.zeta_exponent, x) /
                       RiemannZeta(s.zeta_exponent);
            }
            return 0.0;
          },
          [](const SystemDelay&) -> double {
            throw AnalysisUnavailable("system delay has no closed-form PMF");
          },
      },
      model);
}

// Devroye's rejection sampler for P(X = i) ∝ i^{-α}, i ≥ 1.
std::int64_t SampleZeta(double alpha, Rng& rng) {
  const double b = std::pow(2.0, alpha - 1.0);
  constexpr double kMax = 9.0e18;
  while (true) {
    const double u = rng.UniformOpen();
    const double v = rng.Uniform();
    const double x = std::floor(std::pow(u, -1.0 / (alpha - 1.0)));
    if (!(x < kMax)) continue;
    const double t = std::pow(1.0 + 1.0 / x, alpha - 1.0);
    if (v * x * (t - 1.0) / (b - 1.0) <= t / b) {
      return static_cast<std::int64_t>(x);
    }
  }
}

std::int64_t FloorToDelay(double x) {
  constexpr double kMax = 9.0e18;
  if (!(x < kMax)) return static_cast<std::int64_t>(kMax);
  return static_cast<std::int64_t>(std::floor(std::max(0.0, x)));
}

}  // namespace

double RiemannZeta(double s) {
  if (!(s > 1.0)) throw std::invalid_argument("zeta: need s > 1");
  return HurwitzZeta(s, 1.0);
}

void ValidateDelayModel(const DelayModel& model) {
  std::visit(
      Overloaded{
          [](const BoundedDelay& b) {
            if (b.max_delay < 0) {
              throw std::invalid_argument("bounded delay: T must be >= 0");
            }
            if (!b.weights.empty()) {
              if (std::ssize(b.weights) != b.max_delay + 1) {
                throw std::invalid_argument(
                    "bounded delay: weights must have T + 1 entries");
              }
              double total = 0.0;
              for (double w : b.weights) {
                if (!(w >= 0.0) || !std::isfinite(w)) {
                  throw std::invalid_argument(
                      "bounded delay: weights must be finite and >= 0");
                }
                total += w;
              }
              if (!(total > 0.0)) {
                throw std::invalid_argument("bounded delay: weights sum to 0");
              }
            }
          },
          [](const PoissonDelay& p) {
            if (!(p.rate > 0.0) || !std::isfinite(p.rate)) {
              throw std::invalid_argument("poisson delay: rate must be > 0");
            }
          },
          [](const GrowingUniformDelay&) {},
          [](const SeriesBoundedDelay& s) {
            using F = SeriesBoundedDelay::Family;
            switch (s.family) {
              case F::kExplicit:
                for (double a : s.explicit_series) {
                  if (!(a >= 0.0) || !std::isfinite(a)) {
                    throw std::invalid_argument(
                        "series delay: entries must be finite and >= 0");
                  }
                }
                break;
              case F::kLogNormal:
                if (!(s.log_sigma > 0.0) || !std::isfinite(s.log_mu)) {
                  throw std::invalid_argument(
                      "series delay: log-normal needs sigma > 0");
                }
                break;
              case F::kWeibull:
                if (!(s.weibull_shape > 0.0) || !(s.weibull_scale > 0.0)) {
                  throw std::invalid_argument(
                      "series delay: weibull needs shape, scale > 0");
                }
                break;
              case F::kZeta:
                if (!(s.zeta_exponent > 1.0)) {
                  throw std::invalid_argument(
                      "series delay: zeta exponent must be > 1");
                }
                break;
            }
          },
          [](const SystemDelay& s) {
            if (s.num_workers < 1) {
              throw std::invalid_argument("system delay: need >= 1 worker");
            }
          },
      },
      model);
}

std::string DelayModelName(const DelayModel& model) {
  return std::visit(
      Overloaded{
          [](const BoundedDelay&) -> std::string { return "bounded"; },
          [](const PoissonDelay&) -> std::string { return "poisson"; },
          [](const GrowingUniformDelay&) -> std::string {
            return "growing_uniform";
          },
          [](const SeriesBoundedDelay&) -> std::string {
            return "series_bounded";
          },
          [](const SystemDelay&) -> std::string { return "system"; },
      },
      model);
}

bool IsSystem(const DelayModel& model) {
  return std::holds_alternative<SystemDelay>(model);
}

bool IsZeroDelay(const DelayModel& model) {
  const auto* b = std::get_if<BoundedDelay>(&model);
  return b != nullptr && b->max_delay == 0;
}

double DelayPmf(const DelayModel& model, std::int64_t k, std::int64_t i) {
  if (k < 1) throw std::invalid_argument("delay pmf: k must be >= 1");
  if (IsSystem(model)) {
    throw AnalysisUnavailable("system delay has no closed-form PMF");
  }
  if (i < 0 || i > k) return 0.0;
  if (std::holds_alternative<GrowingUniformDelay>(model)) {
    return i >= 1 ? 1.0 / static_cast<double>(k) : 0.0;
  }
  if (i == k) return StationaryTail(model, k);
  return StationaryPmf(model, i);
}

std::vector<std::int64_t> SampleDelays(const DelayModel& model, std::int64_t k,
                                       std::int64_t batch, Rng& rng) {
  std::vector<std::int64_t> delays;
  delays.reserve(static_cast<std::size_t>(std::max<std::int64_t>(batch, 0)));
  for (const auto& [delay, count] : DelaySampler(model).Sample(k, batch, rng)) {
    delays.insert(delays.end(), static_cast<std::size_t>(count), delay);
  }
  return delays;
}

DelaySampler::DelaySampler(DelayModel model) : model_(std::move(model)) {
  ValidateDelayModel(model_);
  if (IsSystem(model_)) {
    throw AnalysisUnavailable("system delays come from the worker event loop");
  }
  if (std::holds_alternative<GrowingUniformDelay>(model_)) return;
  // Tabulate until the remaining mass is negligible.
  double cumulative = 0.0;
  for (std::size_t i = 0; i < kMaxTableLength; ++i) {
    const double p = StationaryPmf(model_, static_cast<std::int64_t>(i));
    table_.push_back(p);
    cumulative += p;
    cdf_.push_back(cumulative);
    if (const auto* b = std::get_if<BoundedDelay>(&model_)) {
      if (static_cast<std::int64_t>(i) == b->max_delay) break;
    } else if (const auto* s = std::get_if<SeriesBoundedDelay>(&model_);
               s != nullptr &&
               s->family == SeriesBoundedDelay::Family::kExplicit) {
      if (static_cast<std::int64_t>(i) == std::ssize(s->explicit_series)) break;
    } else if (cumulative >= 1.0 - 1e-17 ||
               StationaryTail(model_, static_cast<std::int64_t>(i) + 1) <
                   1e-17) {
      break;
    }
  }
}

std::int64_t DelaySampler::DrawUnclipped(std::int64_t k, Rng& rng) const {
  return std::visit(
      Overloaded{
          [&](const BoundedDelay& b) -> std::int64_t {
            if (b.weights.empty()) {
              return static_cast<std::int64_t>(
                  rng.UniformInt(static_cast<std::uint64_t>(b.max_delay + 1)));
            }
            const double u = rng.Uniform() * cdf_.back();
            return std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
          },
          [&](const PoissonDelay& p) { return rng.Poisson(p.rate); },
          [&](const GrowingUniformDelay&) -> std::int64_t {
            return 1 + static_cast<std::int64_t>(
                           rng.UniformInt(static_cast<std::uint64_t>(k)));
          },
          [&](const SeriesBoundedDelay& s) -> std::int64_t {
            switch (s.family) {
              case SeriesBoundedDelay::Family::kExplicit: {
                const double u = rng.Uniform() * cdf_.back();
                const auto pos =
                    std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
                return std::min<std::int64_t>(pos, std::ssize(cdf_) - 1);
              }
              case SeriesBoundedDelay::Family::kLogNormal:
                return FloorToDelay(std::exp(rng.Normal(s.log_mu, s.log_sigma)));
              case SeriesBoundedDelay::Family::kWeibull:
                return FloorToDelay(
                    s.weibull_scale *
                    std::pow(-std::log(rng.UniformOpen()), 1.0 / s.weibull_shape));
              case SeriesBoundedDelay::Family::kZeta:
                return SampleZeta(s.zeta_exponent, rng);
            }
            return 0;
          },
          [](const SystemDelay&) -> std::int64_t {
            throw AnalysisUnavailable("system delays come from the event loop");
          },
      },
      model_);
}

std::vector<double> DelaySampler::ClippedPmf(std::int64_t k) const {
  // Categories 0..k−1; the last one absorbs every delay ≥ k − 1.
  if (std::holds_alternative<GrowingUniformDelay>(model_)) {
    std::vector<double> pmf(static_cast<std::size_t>(k), 1.0);
    pmf[0] = 0.0;
    if (k >= 2) pmf.back() = 2.0;
    return pmf;
  }
  const auto len = static_cast<std::int64_t>(table_.size());
  if (k - 1 < len) {
    std::vector<double> pmf(table_.begin(), table_.begin() + (k - 1));
    const double head = k >= 2 ? cdf_[static_cast<std::size_t>(k - 2)] : 0.0;
    pmf.push_back(std::max(0.0, 1.0 - head));
    return pmf;
  }
  std::vector<double> pmf = table_;
  pmf.back() += std::max(0.0, 1.0 - cdf_.back());
  return pmf;
}

std::vector<std::pair<std::int64_t, std::int64_t>> DelaySampler::Sample(
    std::int64_t k, std::int64_t batch, Rng& rng) const {
  if (k < 1) throw std::invalid_argument("sample delays: k must be >= 1");
  if (batch < 0) throw std::invalid_argument("sample delays: batch < 0");
  std::vector<std::pair<std::int64_t, std::int64_t>> groups;
  if (batch == 0) return groups;
  if (k == 1 || IsZeroDelay(model_)) {
    groups.emplace_back(0, batch);
    return groups;
  }
  const std::int64_t support =
      std::holds_alternative<GrowingUniformDelay>(model_)
          ? k
          : std::min<std::int64_t>(k, std::ssize(table_));
  if (batch <= kIndividualDrawLimit || batch < support) {
    std::vector<std::int64_t> delays(static_cast<std::size_t>(batch));
    for (auto& d : delays) d = std::min(DrawUnclipped(k, rng), k - 1);
    std::sort(delays.begin(), delays.end());
    for (std::int64_t d : delays) {
      if (groups.empty() || groups.back().first != d) {
        groups.emplace_back(d, 0);
      }
      ++groups.back().second;
    }
    return groups;
  }
  const std::vector<double> pmf = ClippedPmf(k);
  const std::vector<std::int64_t> counts = rng.Multinomial(batch, pmf);
  for (std::size_t d = 0; d < counts.size(); ++d) {
    if (counts[d] > 0) groups.emplace_back(static_cast<std::int64_t>(d), counts[d]);
  }
  return groups;
}

DominatingSeries BuildDominatingSeries(const DelayModel& model,
                                       const SeriesOptions& options) {
  ValidateDelayModel(model);
  DominatingSeries series;
  // Appends a_i for i = 1, 2, ... until `tail(H)` ≤ tolerance · head.
  auto truncate = [&](auto term, auto tail) {
    series.infinite_support = true;
    double head = 0.0;
    for (std::int64_t i = 1; i <= options.max_terms; ++i) {
      const double a = term(i);
      series.a.push_back(a);
      head += static_cast<double>(i) * static_cast<double>(i) * a;
      const double bound = tail(i);
      series.tail_bound = bound;
      if (head > 0.0 && bound <= options.relative_tolerance * head) break;
    }
  };
  auto divergent = [&](auto term) {
    series.infinite_support = true;
    series.second_moment_finite = false;
    series.tail_bound = kInf;
    for (std::int64_t i = 1; i <= options.divergent_horizon; ++i) {
      series.a.push_back(term(i));
    }
  };

  std::visit(
      Overloaded{
          [&](const BoundedDelay& b) {
            for (std::int64_t i = 1; i <= b.max_delay; ++i) {
              series.a.push_back(StationaryPmf(model, i));
            }
          },
          [&](const PoissonDelay& p) {
            truncate([&](std::int64_t i) { return PoissonPmf(p.rate, i); },
                     [&](std::int64_t h) {
                       // Term ratios t_{i+1}/t_i = (i+1)λ/i² fall below
                       // ρ for i > h, so the tail is geometric beyond h.
                       const auto x = static_cast<double>(h);
                       const double rho = (x + 2.0) * p.rate / ((x + 1.0) * (x + 1.0));
                       if (rho >= 1.0) return kInf;
                       return (x + 1.0) * (x + 1.0) * PoissonPmf(p.rate, h + 1) /
                              (1.0 - rho);
                     });
          },
          [&](const GrowingUniformDelay&) {
            // sup_k P(τ_k = i) = 1/i, attained at k = i.
            divergent([](std::int64_t i) { return 1.0 / static_cast<double>(i); });
          },
          [&](const SeriesBoundedDelay& s) {
            using F = SeriesBoundedDelay::Family;
            auto pmf = [&](std::int64_t i) { return StationaryPmf(model, i); };
            switch (s.family) {
              case F::kExplicit:
                series.a = s.explicit_series;
                break;
              case F::kLogNormal:
                // Σ_{i>h} i² a_i ≤ E[X² ; X ≥ h+1].
                truncate(pmf, [&](std::int64_t h) {
                  const double t = std::log(static_cast<double>(h + 1));
                  const double s2 = s.log_sigma * s.log_sigma;
                  return std::exp(2.0 * s.log_mu + 2.0 * s2) *
                         UpperNormalTail((t - s.log_mu - 2.0 * s2) / s.log_sigma);
                });
                break;
              case F::kWeibull:
                // Cauchy–Schwarz: E[X² ; X ≥ t] ≤ √(E[X⁴] P(X ≥ t)).
                truncate(pmf, [&](std::int64_t h) {
                  const double m4 = std::tgamma(1.0 + 4.0 / s.weibull_shape);
                  return s.weibull_scale * s.weibull_scale * std::sqrt(m4) *
                         std::sqrt(WeibullSurvival(s, static_cast<double>(h + 1)));
                });
                break;
              case F::kZeta: {
                const double alpha = s.zeta_exponent;
                if (alpha <= 3.0) {
                  divergent(pmf);
                  break;
                }
                const double zeta = RiemannZeta(alpha);
                // Σ_{i>h} i^{2−α} ≤ ∫_h^∞ x^{2−α} dx.
                truncate(pmf, [&](std::int64_t h) {
                  return std::pow(static_cast<double>(h), 3.0 - alpha) /
                         ((alpha - 3.0) * zeta);
                });
                break;
              }
            }
          },
          [](const SystemDelay&) {
            throw AnalysisUnavailable(
                "system delay has no dominating series; c-sequence unavailable");
          },
      },
      model);
  return series;
}

double CSequence::c1() const {
  if (!c1_finite) return kInf;
  return c.empty() ? 0.0 : c.front();
}

CSequence ComputeCSequence(const DelayModel& model, double gamma,
                           std::int64_t m, double lipschitz,
                           std::int64_t horizon, const SeriesOptions& options) {
  if (horizon < 1) throw std::invalid_argument("c-sequence: horizon must be >= 1");
  if (!(gamma > 0.0) || !(lipschitz > 0.0) || m < 1) {
    throw std::invalid_argument("c-sequence: need gamma, L > 0 and M >= 1");
  }
  const DominatingSeries series = BuildDominatingSeries(model, options);
  const double factor =
      gamma * static_cast<double>(m) * lipschitz * lipschitz / 2.0;

  CSequence out;
  out.gamma_used = gamma;
  out.c1_finite = series.second_moment_finite;
  out.truncation_error_bound =
      series.second_moment_finite ? factor * series.tail_bound : kInf;
  const auto h = std::max<std::size_t>(static_cast<std::size_t>(horizon),
                                       series.a.size());
  out.c.assign(h, 0.0);
  // Backward pass: suffix = Σ_{i=j}^{H} i a_i, c_j = c_{j+1} + factor·suffix.
  double suffix = 0.0;
  double next = 0.0;
  for (std::size_t idx = h; idx-- > 0;) {
    if (idx < series.a.size()) {
      suffix += static_cast<double>(idx + 1) * series.a[idx];
    }
    next = next + factor * suffix;
    out.c[idx] = next;
  }
  return out;
}

double StepSizeCap(double c1, std::int64_t m, double lipschitz) {
  if (!(lipschitz > 0.0) || m < 1 || !(c1 >= 0.0)) {
    throw std::invalid_argument("step cap: need c1 >= 0, M >= 1, L > 0");
  }
  if (!std::isfinite(c1)) return 0.0;
  const auto mm = static_cast<double>(m);
  return 1.0 / (2.0 * mm * c1 + mm * lipschitz);
}

double MaxAdmissibleStep(const DelayModel& model, std::int64_t m,
                         double lipschitz, const SeriesOptions& options) {
  const DominatingSeries series = BuildDominatingSeries(model, options);
  if (!series.second_moment_finite) return 0.0;
  double s = series.tail_bound;
  for (std::size_t idx = series.a.size(); idx-- > 0;) {
    const auto i = static_cast<double>(idx + 1);
    s += i * i * series.a[idx];
  }
  const double ml = static_cast<double>(m) * lipschitz;
  // Root of M²L²S γ² + ML γ − 1 = 0, nudged down so that rounding in the
  // c-sequence pass cannot put γ a few ulps above the resulting cap.
  const double root =
      s > 0.0 ? (std::sqrt(1.0 + 4.0 * s) - 1.0) / (2.0 * ml * s) : 1.0 / ml;
  return root * (1.0 - 1e-9);
}

AdmissibilityVerdict AdmissibilityCheck(const DelayModel& model,
                                        const StepSchedule& schedule,
                                        std::int64_t m, double lipschitz,
                                        std::int64_t horizon,
                                        const SeriesOptions& options) {
  AdmissibilityVerdict verdict;
  const double gamma_bar = StepAt(schedule, 1);
  verdict.sequence =
      ComputeCSequence(model, gamma_bar, m, lipschitz, horizon, options);
  verdict.c1 = verdict.sequence.c1();
  verdict.gamma_cap = StepSizeCap(verdict.c1, m, lipschitz);
  if (!verdict.sequence.c1_finite) {
    verdict.admissible = false;
    if (std::holds_alternative<GrowingUniformDelay>(model)) {
      verdict.reason =
          "c1 is infinite: c1 >= (gamma_k M L^2 / 2)(k+1)(2k+1)/6 for every k, "
          "which is unbounded unless gamma_k = O(1/k^2)";
    } else {
      verdict.reason = "c1 is infinite: sum of i^2 a_i diverges";
    }
    return verdict;
  }
  // Schedules are non-increasing, so the first violation (if any) is early;
  // the scan still covers the whole horizon.
  for (std::int64_t k = 1; k <= horizon; ++k) {
    if (StepAt(schedule, k) > verdict.gamma_cap) {
      std::ostringstream reason;
      reason << std::setprecision(6) << "gamma_k = " << StepAt(schedule, k)
             << " exceeds the cap " << verdict.gamma_cap << " at k = " << k;
      verdict.reason = reason.str();
      return verdict;
    }
  }
  verdict.admissible = true;
  return verdict;
}

}  // namespace asgd

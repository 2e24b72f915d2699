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

#include "asgd/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace asgd {

std::uint64_t SplitMix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::ForStream(std::uint64_t seed, Stream stream) {
  return ForStream(seed, static_cast<std::uint64_t>(stream));
}

Rng Rng::ForStream(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t state = seed ^ (stream_id * 0xD1B54A32D192ED03ULL);
  SplitMix64(state);
  return Rng(SplitMix64(state));
}

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::UniformOpen() {
  double u;
  do {
    u = Uniform();
  } while (u == 0.0);
  return u;
}

std::uint64_t Rng::UniformInt(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("UniformInt: empty range");
  // Rejection against the largest multiple of n keeps the draw exact.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

double Rng::Normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * Uniform() - 1.0;
    v = 2.0 * Uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * factor;
  has_spare_normal_ = true;
  return u * factor;
}

double Rng::Exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("Exponential: rate <= 0");
  return -std::log(UniformOpen()) / rate;
}

double Rng::Gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw std::invalid_argument("Gamma: shape and rate must be positive");
  }
  if (shape < 1.0) {
    // Boost to shape + 1 and scale back with U^(1/shape).
    const double g = Gamma(shape + 1.0, 1.0);
    return g * std::pow(UniformOpen(), 1.0 / shape) / rate;
  }
  // Marsaglia and Tsang (2000).
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = Normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = UniformOpen();
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v / rate;
    }
  }
}

namespace {

// Inversion with the search order mode, mode+1, mode-1, mode+2, ... The
// probability at the mode comes from lgamma; neighbours use ratio recurrences.
// `up(k)` returns p(k+1)/p(k) and `down(k)` returns p(k-1)/p(k).
template <typename Up, typename Down>
std::int64_t ChopDownFromMode(Rng& rng, std::int64_t mode, double p_mode,
                              std::int64_t lo, std::int64_t hi, Up up,
                              Down down) {
  while (true) {
    double u = rng.Uniform();
    u -= p_mode;
    if (u < 0.0) return mode;
    std::int64_t k_up = mode, k_down = mode;
    double p_up = p_mode, p_down = p_mode;
    bool up_open = mode < hi, down_open = mode > lo;
    while (up_open || down_open) {
      if (up_open) {
        p_up *= up(k_up);
        ++k_up;
        u -= p_up;
        if (u < 0.0) return k_up;
        up_open = k_up < hi && p_up > 0.0;
      }
      if (down_open) {
        p_down *= down(k_down);
        --k_down;
        u -= p_down;
        if (u < 0.0) return k_down;
        down_open = k_down > lo && p_down > 0.0;
      }
    }
    // Round-off left a sliver of mass unassigned; draw again.
  }
}

}  // namespace

std::int64_t Rng::Poisson(double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("Poisson: mean < 0");
  if (mean == 0.0) return 0;
  const auto mode = static_cast<std::int64_t>(std::floor(mean));
  const double log_p_mode = mode * std::log(mean) - mean -
                            std::lgamma(static_cast<double>(mode) + 1.0);
  return ChopDownFromMode(
      *this, mode, std::exp(log_p_mode), 0,
      std::numeric_limits<std::int64_t>::max(),
      [mean](std::int64_t k) { return mean / static_cast<double>(k + 1); },
      [mean](std::int64_t k) { return static_cast<double>(k) / mean; });
}

std::int64_t Rng::Binomial(std::int64_t trials, double p) {
  if (trials < 0) throw std::invalid_argument("Binomial: trials < 0");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("Binomial: p outside [0, 1]");
  }
  if (trials == 0 || p == 0.0) return 0;
  if (p == 1.0) return trials;
  const double q = 1.0 - p;
  const double n = static_cast<double>(trials);
  auto mode = static_cast<std::int64_t>(std::floor((n + 1.0) * p));
  mode = std::min(mode, trials);
  const double m = static_cast<double>(mode);
  const double log_p_mode = std::lgamma(n + 1.0) - std::lgamma(m + 1.0) -
                            std::lgamma(n - m + 1.0) + m * std::log(p) +
                            (n - m) * std::log1p(-p);
  const double odds = p / q;
  return ChopDownFromMode(
      *this, mode, std::exp(log_p_mode), 0, trials,
      [=](std::int64_t k) {
        return static_cast<double>(trials - k) / static_cast<double>(k + 1) *
               odds;
      },
      [=](std::int64_t k) {
        return static_cast<double>(k) / static_cast<double>(trials - k + 1) /
               odds;
      });
}

std::vector<std::int64_t> Rng::Multinomial(std::int64_t trials,
                                           std::span<const double> weights) {
  std::vector<std::int64_t> counts(weights.size(), 0);
  if (trials < 0) throw std::invalid_argument("Multinomial: trials < 0");
  std::ptrdiff_t last_positive = -1;
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0 || !std::isfinite(weights[i])) {
      throw std::invalid_argument("Multinomial: invalid weight");
    }
    if (weights[i] > 0.0) last_positive = static_cast<std::ptrdiff_t>(i);
    total += weights[i];
  }
  if (trials == 0) return counts;
  if (last_positive < 0) throw std::invalid_argument("Multinomial: no mass");

  std::int64_t remaining = trials;
  double remaining_mass = total;
  for (std::ptrdiff_t i = 0; i < last_positive && remaining > 0; ++i) {
    const double w = weights[static_cast<std::size_t>(i)];
    if (w <= 0.0) continue;
    const double p = std::clamp(w / remaining_mass, 0.0, 1.0);
    const std::int64_t c = Binomial(remaining, p);
    counts[static_cast<std::size_t>(i)] = c;
    remaining -= c;
    remaining_mass -= w;
    if (remaining_mass <= 0.0) break;
  }
  counts[static_cast<std::size_t>(last_positive)] += remaining;
  return counts;
}

}  // namespace asgd

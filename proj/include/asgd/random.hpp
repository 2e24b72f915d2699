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

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace asgd {

// Bumped whenever any sampler below changes the values it produces for a
// given seed. Traces record it so that golden files can be invalidated.
inline constexpr int kRngVersion = 1;

// Stream identifiers used to split one run seed into independent streams.
enum class Stream : std::uint64_t {
  kGradientNoise = 1,
  kDelays = 2,
  kWorkers = 3,
  kProblemData = 4,
  kEstimation = 5,
};

// Seeded random source. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; every distribution is implemented here rather
// than taken from <random>, whose distribution algorithms are unspecified and
// differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream derived from (seed, stream id) with SplitMix64.
  static Rng ForStream(std::uint64_t seed, Stream stream);
  static Rng ForStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  // Uniform on (0, 1).
  double UniformOpen();
  // Uniform integer on [0, n). n must be positive.
  std::uint64_t UniformInt(std::uint64_t n);

  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }
  double Exponential(double rate);
  // Gamma with shape/rate parameterization (mean shape / rate).
  double Gamma(double shape, double rate);
  std::int64_t Poisson(double mean);
  std::int64_t Binomial(std::int64_t trials, double p);

  // Counts of `trials` i.i.d. categorical draws with the given (possibly
  // unnormalized) weights. Categories after the last positive weight never
  // receive a count; the final category with positive weight absorbs
  // round-off.
  std::vector<std::int64_t> Multinomial(std::int64_t trials,
                                        std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

std::uint64_t SplitMix64(std::uint64_t& state);

}  // namespace asgd

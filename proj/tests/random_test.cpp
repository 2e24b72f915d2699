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

#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

namespace asgd {
namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments Sample(int n, const std::function<double()>& draw) {
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw();
    sum += x;
    sum2 += x * x;
  }
  Moments m;
  m.mean = sum / n;
  m.var = sum2 / n - m.mean * m.mean;
  return m;
}

// |sample mean − mean| within 5 standard errors.
void ExpectMean(const Moments& m, double mean, double var, int n) {
  EXPECT_NEAR(m.mean, mean, 5.0 * std::sqrt(var / n));
}

TEST(RngTest, SameSeedSameSequence) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.NextU64(), b.NextU64());
}

TEST(RngTest, StreamsDiffer) {
  Rng a = Rng::ForStream(7, Stream::kGradientNoise);
  Rng b = Rng::ForStream(7, Stream::kDelays);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a.NextU64() == b.NextU64();
  EXPECT_EQ(equal, 0);
}

TEST(RngTest, UniformRange) {
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = rng.UniformOpen();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

TEST(RngTest, UniformIntCoversRange) {
  Rng rng(2);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) ++hits[rng.UniformInt(7)];
  for (int h : hits) EXPECT_NEAR(h, 10000, 500);
}

TEST(RngTest, NormalMoments) {
  Rng rng(3);
  constexpr int n = 200000;
  const Moments m = Sample(n, [&] { return rng.Normal(); });
  ExpectMean(m, 0.0, 1.0, n);
  EXPECT_NEAR(m.var, 1.0, 0.02);
}

TEST(RngTest, ExponentialMoments) {
  Rng rng(4);
  constexpr int n = 200000;
  const Moments m = Sample(n, [&] { return rng.Exponential(2.5); });
  ExpectMean(m, 0.4, 0.16, n);
  EXPECT_NEAR(m.var, 0.16, 0.01);
}

class GammaMomentsTest : public ::testing::TestWithParam<double> {};

TEST_P(GammaMomentsTest, MeanAndVariance) {
  const double shape = GetParam();
  const double rate = 1.7;
  Rng rng(5);
  constexpr int n = 200000;
  const Moments m = Sample(n, [&] { return rng.Gamma(shape, rate); });
  const double var = shape / (rate * rate);
  ExpectMean(m, shape / rate, var, n);
  EXPECT_NEAR(m.var, var, 0.05 * var);
}

INSTANTIATE_TEST_SUITE_P(Shapes, GammaMomentsTest,
                         ::testing::Values(0.3, 1.0, 2.0, 17.5, 5000.0));

class PoissonMomentsTest : public ::testing::TestWithParam<double> {};

TEST_P(PoissonMomentsTest, MeanAndVariance) {
  const double lambda = GetParam();
  Rng rng(6);
  constexpr int n = 200000;
  const Moments m =
      Sample(n, [&] { return static_cast<double>(rng.Poisson(lambda)); });
  ExpectMean(m, lambda, lambda, n);
  EXPECT_NEAR(m.var, lambda, 0.05 * lambda);
}

INSTANTIATE_TEST_SUITE_P(Rates, PoissonMomentsTest,
                         ::testing::Values(0.5, 3.0, 10.0, 30.0, 250.0));

struct BinomialCase {
  std::int64_t trials;
  double p;
};

class BinomialMomentsTest : public ::testing::TestWithParam<BinomialCase> {};

TEST_P(BinomialMomentsTest, MeanAndVariance) {
  const auto [trials, p] = GetParam();
  Rng rng(7);
  constexpr int n = 100000;
  const Moments m =
      Sample(n, [&] { return static_cast<double>(rng.Binomial(trials, p)); });
  const double var = trials * p * (1 - p);
  ExpectMean(m, trials * p, var, n);
  EXPECT_NEAR(m.var, var, 0.05 * var + 1e-12);
}

INSTANTIATE_TEST_SUITE_P(
    Cases, BinomialMomentsTest,
    ::testing::Values(BinomialCase{10, 0.3}, BinomialCase{1000, 0.01},
                      BinomialCase{1000, 0.5}, BinomialCase{250000, 0.9},
                      BinomialCase{3, 0.999}));

TEST(RngTest, BinomialEdges) {
  Rng rng(8);
  EXPECT_EQ(rng.Binomial(0, 0.4), 0);
  EXPECT_EQ(rng.Binomial(17, 0.0), 0);
  EXPECT_EQ(rng.Binomial(17, 1.0), 17);
  EXPECT_THROW(rng.Binomial(-1, 0.5), std::invalid_argument);
  EXPECT_THROW(rng.Binomial(3, 1.5), std::invalid_argument);
}

TEST(RngTest, MultinomialConservesTrials) {
  Rng rng(9);
  const std::vector<double> w = {0.5, 0.0, 2.0, 1.5, 0.0};
  for (int rep = 0; rep < 200; ++rep) {
    const auto counts = rng.Multinomial(12345, w);
    ASSERT_EQ(counts.size(), w.size());
    EXPECT_EQ(std::accumulate(counts.begin(), counts.end(), std::int64_t{0}),
              12345);
    EXPECT_EQ(counts[1], 0);
    EXPECT_EQ(counts[4], 0);
  }
}

TEST(RngTest, MultinomialMeans) {
  Rng rng(10);
  const std::vector<double> w = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> total(4, 0.0);
  constexpr int reps = 20000;
  constexpr std::int64_t trials = 50;
  for (int rep = 0; rep < reps; ++rep) {
    const auto counts = rng.Multinomial(trials, w);
    for (int i = 0; i < 4; ++i) total[i] += static_cast<double>(counts[i]);
  }
  for (int i = 0; i < 4; ++i) {
    const double p = w[i] / 10.0;
    const double se = std::sqrt(trials * p * (1 - p) / reps);
    EXPECT_NEAR(total[i] / reps, trials * p, 5.0 * se);
  }
}

}  // namespace
}  // namespace asgd

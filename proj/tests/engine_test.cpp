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

#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "asgd/errors.hpp"

namespace asgd {
namespace {

ProblemPtr Quadratic2(double noise) {
  return MakeQuadratic(Eigen::MatrixXd::Identity(2, 2), noise,
                       ParamVector::Ones(2));
}

RunConfig BaseConfig(ProblemPtr problem) {
  RunConfig c;
  c.problem = std::move(problem);
  c.delay = PoissonDelay{3.0};
  c.batch = FixedBatch{4};
  c.step = StepSchedule{ConstantStep{MaxAdmissibleStep(c.delay, 4, c.problem->Lipschitz())},
                        std::nullopt};
  c.iterations = 200;
  c.seed = 3;
  return c;
}

// Bitwise comparison, so that NaN columns compare equal to themselves.
bool SameBits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

void ExpectIdenticalRows(const std::vector<TraceRow>& a,
                         const std::vector<TraceRow>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].k, b[i].k);
    ASSERT_TRUE(SameBits(a[i].gamma, b[i].gamma)) << "k = " << a[i].k;
    ASSERT_EQ(a[i].batch, b[i].batch);
    ASSERT_TRUE(SameBits(a[i].grad_norm_sq, b[i].grad_norm_sq)) << "k = " << a[i].k;
    ASSERT_TRUE(SameBits(a[i].objective, b[i].objective));
    ASSERT_EQ(a[i].max_delay, b[i].max_delay);
    ASSERT_TRUE(SameBits(a[i].mean_delay, b[i].mean_delay));
    ASSERT_TRUE(SameBits(a[i].vtime, b[i].vtime));
    ASSERT_EQ(a[i].rejections, b[i].rejections);
  }
}

TEST(AlgorithmTest, NamesRoundTrip) {
  for (Algorithm a : {Algorithm::kSync, Algorithm::kAsync, Algorithm::kAsyncIncreasing}) {
    EXPECT_EQ(ParseAlgorithm(AlgorithmName(a)), a);
  }
  EXPECT_THROW(ParseAlgorithm("hogwild"), std::invalid_argument);
}

TEST(EngineTest, RowZeroIsStartPoint) {
  const RunConfig c = BaseConfig(Quadratic2(0.1));
  const RunTrace t = asgd::Run(c);
  ASSERT_EQ(std::ssize(t.rows), c.iterations + 1);
  EXPECT_EQ(t.rows[0].k, 0);
  EXPECT_EQ(t.rows[0].gamma, 0.0);
  EXPECT_EQ(t.rows[0].batch, 0);
  EXPECT_DOUBLE_EQ(t.rows[0].objective, 1.0);
  EXPECT_DOUBLE_EQ(t.rows[0].grad_norm_sq, 2.0);
  EXPECT_EQ(t.rows[1].max_delay, 0);  // first iteration is never stale
}

TEST(EngineTest, Deterministic) {
  const RunConfig c = BaseConfig(Quadratic2(0.1));
  ExpectIdenticalRows(asgd::Run(c).rows, asgd::Run(c).rows);
}

TEST(EngineTest, SeedsDiffer) {
  RunConfig a = BaseConfig(Quadratic2(0.1));
  RunConfig b = a;
  b.seed = 4;
  EXPECT_NE(asgd::Run(a).rows.back().objective, asgd::Run(b).rows.back().objective);
}

TEST(EngineTest, ZeroDelayAsyncMatchesSync) {
  for (const ProblemPtr& p :
       {Quadratic2(0.1), MakeMatrixCompletion(6, 1, 1.0, 2)}) {
    RunConfig c = BaseConfig(p);
    c.delay = BoundedDelay{0, {}};
    c.step = StepSchedule{ConstantStep{0.5 * MaxAdmissibleStep(c.delay, 4, p->Lipschitz())},
                          std::nullopt};
    c.iterations = 100;
    ExpectIdenticalRows(RunAsyncSgd(c).rows, RunSyncSgd(c).rows);
  }
}

TEST(EngineTest, UnitBatchMultiplierMatchesAsync) {
  RunConfig c = BaseConfig(Quadratic2(0.1));
  RunConfig i = c;
  i.batch = IncreasingBatch{4, 1.0, 2.0, 1, {1}};
  ExpectIdenticalRows(RunAsyncSgdi(i).rows, RunAsyncSgd(c).rows);
}

// x_{k+1} = x_k − γ M x_k on H = I without noise: ‖x_k‖ = (1 − γM)^k ‖x_0‖.
TEST(EngineTest, NoiselessSyncDecaysGeometrically) {
  RunConfig c = BaseConfig(Quadratic2(0.0));
  c.algorithm = Algorithm::kSync;
  c.step = StepSchedule{ConstantStep{0.05}, std::nullopt};
  c.iterations = 50;
  c.record_iterates = true;
  const RunTrace t = asgd::Run(c);
  const double ratio = 1.0 - 0.05 * 4;
  for (std::int64_t k = 0; k <= 50; ++k) {
    const double expect = std::pow(ratio, static_cast<double>(k)) * std::sqrt(2.0);
    EXPECT_NEAR(t.iterates[static_cast<std::size_t>(k)].norm(), expect, 1e-13);
  }
}

TEST(EngineTest, AverageDividesByM) {
  RunConfig c = BaseConfig(Quadratic2(0.0));
  c.step = StepSchedule{ConstantStep{0.01}, std::nullopt};
  EXPECT_DOUBLE_EQ(UpdateScale(c, 3), 0.01);
  c.average = true;
  EXPECT_DOUBLE_EQ(UpdateScale(c, 3), 0.0025);
  c.batch = IncreasingBatch{4, 1.0, 2.0, 1, {}};
  EXPECT_DOUBLE_EQ(UpdateScale(c, 3), 0.01 / 9.0 / 4.0);
}

TEST(EngineTest, ReplayReproducesIterates) {
  for (const DelayModel& model :
       {DelayModel{PoissonDelay{3.0}}, DelayModel{BoundedDelay{5, {}}}}) {
    RunConfig c = BaseConfig(MakeMatrixCompletion(5, 1, 1.0, 4));
    c.delay = model;
    c.step = StepSchedule{ConstantStep{MaxAdmissibleStep(model, 4, c.problem->Lipschitz())},
                          std::nullopt};
    c.record_delays = true;
    c.record_iterates = true;
    const RunTrace t = asgd::Run(c);
    const std::vector<ParamVector> replay = ReplayIterates(c, t.delays);
    ASSERT_EQ(replay.size(), t.iterates.size());
    for (std::size_t i = 0; i < replay.size(); ++i) {
      ASSERT_EQ(replay[i], t.iterates[i]) << "k = " << i;
    }
  }
}

TEST(EngineTest, ReplayOfSystemRun) {
  RunConfig c = BaseConfig(Quadratic2(0.1));
  c.delay = SystemDelay{10, false};
  c.step = StepSchedule{ConstantStep{0.001}, std::nullopt};
  c.record_delays = true;
  c.record_iterates = true;
  const RunTrace t = asgd::Run(c);
  const auto replay = ReplayIterates(c, t.delays);
  for (std::size_t i = 0; i < replay.size(); ++i) ASSERT_EQ(replay[i], t.iterates[i]);
}

TEST(EngineTest, DelaysRespectIterationIndex) {
  RunConfig c = BaseConfig(Quadratic2(0.1));
  c.delay = PoissonDelay{30.0};
  c.step = StepSchedule{ConstantStep{MaxAdmissibleStep(c.delay, 4, 1.0)}, std::nullopt};
  c.record_delays = true;
  const RunTrace t = asgd::Run(c);
  for (std::size_t i = 0; i < t.delays.size(); ++i) {
    std::int64_t total = 0;
    for (const auto& [d, n] : t.delays[i]) {
      ASSERT_LE(d, static_cast<std::int64_t>(i));
      total += n;
    }
    ASSERT_EQ(total, 4);
  }
}

TEST(EngineTest, HistoryOverflowIsCountedAndClipped) {
  RunConfig c = BaseConfig(Quadratic2(0.1));
  c.delay = BoundedDelay{20, {}};
  c.step = StepSchedule{ConstantStep{MaxAdmissibleStep(c.delay, 4, 1.0)}, std::nullopt};
  c.history_capacity = 5;
  c.record_delays = true;
  const RunTrace t = asgd::Run(c);
  EXPECT_GT(t.summary.history_overflow, 0);
  for (const auto& groups : t.delays) {
    for (const auto& [d, n] : groups) ASSERT_LE(d, 4);
  }
}

TEST(EngineTest, InadmissibleRefusedUnlessAllowed) {
  RunConfig c = BaseConfig(Quadratic2(0.1));
  c.delay = GrowingUniformDelay{};
  c.step = StepSchedule{ConstantStep{0.01}, std::nullopt};
  EXPECT_THROW(asgd::Run(c), InadmissibleConfig);
  c.allow_inadmissible = true;
  const RunTrace t = asgd::Run(c);
  EXPECT_EQ(t.summary.admissibility, AdmissibilityStatus::kInadmissible);
  EXPECT_TRUE(std::isnan(t.rows.back().lyapunov));
}

TEST(EngineTest, RejectsMismatchedBatchKinds) {
  RunConfig c = BaseConfig(Quadratic2(0.1));
  c.algorithm = Algorithm::kAsyncIncreasing;
  EXPECT_THROW(asgd::Run(c), std::invalid_argument);
  c.algorithm = Algorithm::kAsync;
  c.batch = IncreasingBatch{};
  EXPECT_THROW(asgd::Run(c), std::invalid_argument);
}

TEST(EngineTest, SystemAdmissibilityUnavailable) {
  RunConfig c = BaseConfig(Quadratic2(0.1));
  c.delay = SystemDelay{};
  EXPECT_EQ(CheckRunAdmissibility(c).status, AdmissibilityStatus::kUnavailable);
  c.algorithm = Algorithm::kSync;
  c.step = StepSchedule{ConstantStep{0.01}, std::nullopt};
  EXPECT_EQ(CheckRunAdmissibility(c).status, AdmissibilityStatus::kAdmissible);
}

TEST(EngineTest, SystemVirtualTimeIncreases) {
  RunConfig c = BaseConfig(Quadratic2(0.1));
  c.delay = SystemDelay{10, false};
  c.step = StepSchedule{ConstantStep{0.001}, std::nullopt};
  for (Algorithm a : {Algorithm::kSync, Algorithm::kAsync}) {
    c.algorithm = a;
    const RunTrace t = asgd::Run(c);
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
      ASSERT_GT(t.rows[i].vtime, t.rows[i - 1].vtime);
    }
  }
}

TEST(EngineTest, NonSystemVirtualTimeIsIterationCount) {
  const RunTrace t = asgd::Run(BaseConfig(Quadratic2(0.1)));
  for (const TraceRow& r : t.rows) EXPECT_EQ(r.vtime, static_cast<double>(r.k));
}

// ζ¹ = f(x₁) − f* + c₁‖x₁ − x₀‖² from the recorded column.
TEST(EngineTest, LyapunovColumnFirstStep) {
  RunConfig c = BaseConfig(Quadratic2(0.1));
  c.record_iterates = true;
  const RunTrace t = asgd::Run(c);
  const double c1 = t.summary.c1;
  const double expect =
      c.problem->Objective(t.iterates[1]) + c1 * (t.iterates[1] - t.iterates[0]).squaredNorm();
  EXPECT_NEAR(t.rows[1].lyapunov, expect, 1e-14);
  EXPECT_DOUBLE_EQ(t.rows[0].lyapunov, 1.0);
}

TEST(EngineTest, FeasibilityShrinkKeepsMvnIterateSpd) {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 0.1, 0.0, 0.0, 0.4;
  RunConfig c;
  c.problem = MakeMvnMle(500, sigma, Eigen::VectorXd::Zero(2), 1);
  c.delay = PoissonDelay{2.0};
  c.batch = FixedBatch{10};
  c.step = StepSchedule{ConstantStep{0.5}, std::nullopt};
  c.allow_inadmissible = true;
  c.iterations = 100;
  c.record_iterates = true;
  const RunTrace t = asgd::Run(c);
  for (const ParamVector& x : t.iterates) ASSERT_TRUE(c.problem->Feasible(x));
}

TEST(ApplyUpdateTest, HalvesUntilFeasible) {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(2, 2);
  const ProblemPtr p = MakeMvnMle(100, sigma, Eigen::VectorXd::Zero(2), 1);
  const ParamVector x = MvnMleProblem::Encode(Eigen::MatrixXd::Identity(2, 2));
  // A step of 1 along the identity gives 0 (infeasible); 1/2 gives I/2.
  const UpdateResult r = ApplyUpdate(*p, x, x, 1.0);
  EXPECT_EQ(r.rejections, 1);
  EXPECT_EQ(r.x, 0.5 * x);
  // Never feasible: the iterate stays put after the budget of halvings.
  const UpdateResult stuck = ApplyUpdate(*p, x, ParamVector::Constant(4, NAN), 1.0);
  EXPECT_EQ(stuck.x, x);
  EXPECT_EQ(stuck.rejections, 20);
}

}  // namespace
}  // namespace asgd

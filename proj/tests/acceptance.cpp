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

// Acceptance suite. Prints one line per criterion and exits nonzero if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "asgd/cli.hpp"
#include "asgd/config.hpp"
#include "asgd/delay_models.hpp"
#include "asgd/diagnostics.hpp"
#include "asgd/engine.hpp"
#include "asgd/problems.hpp"
#include "asgd/trace_io.hpp"
#include "checks.hpp"

namespace asgd {
namespace {

namespace fs = std::filesystem;

const fs::path kSource = ASGD_SOURCE_DIR;

// Tolerances and budgets.
constexpr double kClosedFormRelTol = 1e-9;
constexpr double kDivergenceRatio = 0.5;
constexpr int kLemmaStates = 50;
constexpr int kLemmaRequired = 48;
constexpr std::int64_t kLemmaDraws = 10'000;
constexpr std::int64_t kLemmaHistory = 64;
constexpr double kAsyncSlopeMax = -0.4;
constexpr double kSgdiSlopeMax = -0.9;
constexpr double kFig2ThresholdFactor = 10.0;
constexpr double kFig4ThresholdFactor = 2.0;
constexpr double kFdRelTol = 1e-5;
constexpr int kFdPoints = 20;
constexpr int kUnbiasedDraws = 10'000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Num(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

std::vector<TraceRow> RowsOf(const RunConfig& config) { return Run(config).rows; }

Ensemble RunEnsemble(RunConfig config, const std::vector<std::uint64_t>& seeds,
                     const std::string& label) {
  std::vector<std::vector<TraceRow>> traces;
  for (std::uint64_t s : seeds) {
    config.seed = s;
    traces.push_back(RowsOf(config));
  }
  return EnsembleMean(traces, label);
}

std::vector<std::uint64_t> SeedRange(int n) {
  std::vector<std::uint64_t> s;
  for (int i = 1; i <= n; ++i) s.push_back(static_cast<std::uint64_t>(i));
  return s;
}

ProblemPtr Quadratic(double noise) {
  return MakeQuadratic(Eigen::MatrixXd::Identity(2, 2), noise);
}

std::vector<ProblemPtr> AllProblems() {
  return {Quadratic(0.1), BuildProblem(LoadConfig(kSource / "configs/fig2a.toml").problem),
          BuildProblem(LoadConfig(kSource / "configs/fig3b.toml").problem)};
}

Outcome CSequenceClosedForms() {
  const double gamma = 0.01, lipschitz = 2.0;
  const std::int64_t m = 4;
  const double scale = gamma * static_cast<double>(m) * lipschitz * lipschitz / 2.0;
  double worst = 0.0;
  for (std::int64_t t : {2, 5, 20}) {
    const double want = scale * static_cast<double>(t * (2 * t + 1)) / 6.0;
    const double got = ComputeCSequence(BoundedDelay{t, {}}, gamma, m, lipschitz, 64).c1();
    worst = std::max(worst, std::abs(got - want) / want);
  }
  for (double rate : {3.0, 10.0, 30.0}) {
    const double want = scale * (rate + rate * rate);
    const double got = ComputeCSequence(PoissonDelay{rate}, gamma, m, lipschitz, 64).c1();
    worst = std::max(worst, std::abs(got - want) / want);
  }
  return {worst <= kClosedFormRelTol, "max rel err " + Num(worst)};
}

Outcome DivergenceDetection() {
  ExperimentConfig cfg = LoadConfig(kSource / "configs/check_growing_uniform.toml");
  const ProblemPtr p = BuildProblem(cfg.problem);
  RunConfig run = MakeRunConfig(cfg, cfg.base, p, 1);
  const bool flagged =
      CheckRunAdmissibility(run).status == AdmissibilityStatus::kInadmissible;
  run.allow_inadmissible = true;
  run.record_lyapunov = false;
  const auto seeds = SeedRange(20);
  auto ratio = [&](const DelayModel& model) {
    run.delay = model;
    const Ensemble e = RunEnsemble(run, seeds, DelayModelName(model));
    return e.mean[2000] / e.mean[100];
  };
  const double growing = ratio(GrowingUniformDelay{});
  const double bounded = ratio(BoundedDelay{5, {}});
  const bool pass =
      flagged && growing >= kDivergenceRatio && bounded < kDivergenceRatio;
  return {pass, std::string("inadmissible=") + (flagged ? "yes" : "no") +
                    " growing_uniform k2000/k100=" + Num(growing) +
                    " bounded5 k2000/k100=" + Num(bounded)};
}

Outcome Lemma1MonteCarlo() {
  const ProblemPtr p = MakeQuadratic(Eigen::Vector2d(1.0, 0.25).asDiagonal().toDenseMatrix(), 0.1);
  Lemma1Setup s;
  s.delay = PoissonDelay{3.0};
  s.m = 2;
  s.gamma = MaxAdmissibleStep(s.delay, s.m, p->Lipschitz());
  s.c = ComputeCSequence(s.delay, s.gamma, s.m, p->Lipschitz(), kLemmaHistory);
  Rng rng = Rng::ForStream(2026, Stream::kEstimation);
  int held = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int state = 0; state < kLemmaStates; ++state) {
    // A random walk ending at a random point, with steps on the scale of γ.
    // Distances from the optimum span three decades so the noise term matters.
    std::vector<ParamVector> h(kLemmaHistory);
    h.back() = ParamVector(2);
    const double radius = std::pow(10.0, -3.0 * rng.Uniform());
    for (Eigen::Index i = 0; i < 2; ++i) h.back()[i] = radius * rng.Normal();
    for (std::int64_t j = kLemmaHistory - 2; j >= 0; --j) {
      ParamVector step(2);
      for (Eigen::Index i = 0; i < 2; ++i) step[i] = s.gamma * rng.Normal();
      h[static_cast<std::size_t>(j)] = h[static_cast<std::size_t>(j + 1)] + step;
    }
    const Lemma1Report r = CheckLemma1(*p, h, s, kLemmaDraws, 1000 + state);
    if (r.holds) ++held;
    worst = std::min(worst, r.margin / std::max(r.standard_error, 1e-300));
  }
  return {held >= kLemmaRequired, std::to_string(held) + "/" +
                                      std::to_string(kLemmaStates) +
                                      " states hold, gamma=" + Num(s.gamma) +
                                      " min margin/SE=" + Num(worst)};
}

Outcome ZeroDelayEquivalence() {
  int identical = 0;
  std::string detail;
  for (const ProblemPtr& p : AllProblems()) {
    RunConfig c;
    c.problem = p;
    c.delay = BoundedDelay{0, {}};
    c.batch = FixedBatch{4};
    const double gamma = p->Kind() == "quadratic" ? 0.1 : 1e-4;
    c.step = StepSchedule{ConstantStep{gamma}, std::nullopt};
    c.iterations = 500;
    c.seed = 3;
    c.allow_inadmissible = true;
    c.algorithm = Algorithm::kAsync;
    const RunTrace a = Run(c);
    c.algorithm = Algorithm::kSync;
    const RunTrace s = Run(c);
    const bool same = TraceToCsv(a.rows) == TraceToCsv(s.rows) &&
                      a.final_x.size() == s.final_x.size() &&
                      std::memcmp(a.final_x.data(), s.final_x.data(),
                                  sizeof(double) * a.final_x.size()) == 0;
    if (same) ++identical;
    detail += std::string(p->Kind()) + (same ? "=identical " : "=DIFFERS ");
  }
  return {identical == 3, detail};
}

Outcome RateOrders() {
  const ProblemPtr p = Quadratic(0.1);
  const DelayModel delay = PoissonDelay{3.0};
  const auto seeds = SeedRange(20);

  RunConfig a;
  a.problem = p;
  a.delay = delay;
  a.batch = FixedBatch{1};
  a.algorithm = Algorithm::kAsync;
  a.iterations = 20'000;
  a.record_lyapunov = false;
  a.step = StepSchedule{InvSqrtKLogStep{MaxAdmissibleStep(delay, 1, p->Lipschitz()), 1, 0},
                        std::nullopt};
  const RateFit fa = FitEnsembleRate(RunEnsemble(a, seeds, "async"), 0.5);

  RunConfig b = a;
  b.algorithm = Algorithm::kAsyncIncreasing;
  b.iterations = 2'000;
  b.batch = IncreasingBatch{1, 1.0, 2.0, 1, {}};
  b.step = StepSchedule{ConstantStep{MaxAdmissibleStep(delay, 1, p->Lipschitz())},
                        std::nullopt};
  const RateFit fb = FitEnsembleRate(RunEnsemble(b, seeds, "async_i"), 0.5);

  return {fa.slope <= kAsyncSlopeMax && fb.slope <= kSgdiSlopeMax,
          "async inv_sqrt_k_log slope " + Num(fa.slope) + " (<= " +
              Num(kAsyncSlopeMax) + "), async_i n_k=k^2 slope " + Num(fb.slope) +
              " (<= " + Num(kSgdiSlopeMax) + ")"};
}

std::vector<Ensemble> RunExperiment(const fs::path& config_path) {
  const ExperimentConfig cfg = LoadConfig(config_path);
  const ProblemPtr p = BuildProblem(cfg.problem);
  std::vector<Ensemble> out;
  for (const VariantConfig& v : ResolveVariants(cfg)) {
    std::vector<std::vector<TraceRow>> traces;
    for (std::uint64_t s : cfg.seeds) {
      RunConfig run = MakeRunConfig(cfg, v, p, s);
      run.record_lyapunov = false;
      traces.push_back(RowsOf(run));
    }
    out.push_back(EnsembleMean(traces, v.label));
  }
  return out;
}

const CompareEntry& EntryOf(const CompareReport& r, const std::string& label) {
  for (const auto& e : r.entries) {
    if (e.label == label) return e;
  }
  throw std::runtime_error("missing variant " + label);
}

Outcome Fig2Ordering() {
  bool pass = true;
  std::string detail;
  for (const char* name : {"fig2a", "fig2b", "fig2c"}) {
    const auto ensembles = RunExperiment(kSource / "configs" / (std::string(name) + ".toml"));
    const Ensemble* sgdi = nullptr;
    for (const auto& e : ensembles) {
      if (e.label == "sgdi") sgdi = &e;
    }
    const double threshold = kFig2ThresholdFactor * sgdi->mean.back();
    const CompareReport r = CompareRuns(ensembles, threshold);
    const auto& s = EntryOf(r, "sgdi");
    const auto& isl = EntryOf(r, "inv_sqrt_k_log");
    const auto& ik = EntryOf(r, "inv_k");
    const bool ok = s.rank_iterations < isl.rank_iterations &&
                    isl.rank_iterations < ik.rank_iterations;
    pass = pass && ok;
    detail += std::string(name) + ": " + r.ordering_iterations + (ok ? "" : " [want sgdi < inv_sqrt_k_log < inv_k]") + "; ";
  }
  return {pass, detail};
}

Outcome Fig4VirtualTime() {
  const auto ensembles = RunExperiment(kSource / "configs/fig4.toml");
  double worst_final = 0.0;
  for (const auto& e : ensembles) worst_final = std::max(worst_final, e.mean.back());
  const CompareReport r = CompareRuns(ensembles, kFig4ThresholdFactor * worst_final);
  const auto& sync = EntryOf(r, "sync");
  const auto& async = EntryOf(r, "async");
  const auto& async_i = EntryOf(r, "async_i");
  const bool reached = sync.vtime && async.vtime && async_i.vtime;
  const bool pass = reached && *sync.vtime > *async.vtime && *sync.vtime > *async_i.vtime;
  auto v = [](const CompareEntry& e) { return e.vtime ? Num(*e.vtime) : std::string("censored"); };
  return {pass, "threshold " + Num(r.threshold) + " vtime sync=" + v(sync) +
                    " async=" + v(async) + " async_i=" + v(async_i)};
}

Outcome GradientCorrectness() {
  Rng rng = Rng::ForStream(8, Stream::kEstimation);
  double worst_fd = 0.0;
  int unbiased = 0;
  const auto problems = AllProblems();
  for (const ProblemPtr& p : problems) {
    for (int i = 0; i < kFdPoints; ++i) {
      worst_fd = std::max(worst_fd, testing::FiniteDifferenceError(*p, testing::RandomPoint(*p, rng)));
    }
    const ParamVector x = testing::RandomPoint(*p, rng);
    const ParamVector u = testing::RandomUnit(p->Dimension(), rng);
    if (testing::CheckUnbiased(*p, x, u, kUnbiasedDraws, rng).passes) ++unbiased;
  }
  const bool pass = worst_fd <= kFdRelTol && unbiased == static_cast<int>(problems.size());
  return {pass, "max fd rel err " + Num(worst_fd) + ", unbiased " +
                    std::to_string(unbiased) + "/" + std::to_string(problems.size())};
}

Outcome Determinism(const fs::path& work) {
  const std::string config = (kSource / "configs/fig2a.toml").string();
  std::ostringstream out, err;
  for (const char* run : {"a", "b"}) {
    const fs::path dir = work / "fig2a" / run;
    fs::remove_all(dir);
    if (RunCli({"run", "--config", config, "--out-dir", dir.string()}, out, err) != kExitOk) {
      return {false, "run failed: " + err.str()};
    }
  }
  int files = 0, differ = 0;
  for (const auto& e : fs::directory_iterator(work / "fig2a" / "a")) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    const fs::path other = work / "fig2a" / "b" / e.path().filename();
    if (!fs::exists(other) || ReadTextFile(e.path()) != ReadTextFile(other)) ++differ;
  }
  return {files > 0 && differ == 0,
          std::to_string(files) + " csv files, " + std::to_string(differ) + " differ"};
}

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> check;
};

}  // namespace
}  // namespace asgd

int main(int argc, char** argv) {
  using namespace asgd;
  CLI::App app{"asgd-sim acceptance suite"};
  std::string work_dir = "acceptance_out";
  std::vector<int> only;
  app.add_option("--work-dir", work_dir, "Scratch directory for pipeline outputs");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);
  const fs::path work = work_dir;

  const std::vector<Criterion> criteria = {
      {1, "c-sequence closed forms", 1, CSequenceClosedForms},
      {2, "divergence detection", 60, DivergenceDetection},
      {3, "one-step descent inequality", 300, Lemma1MonteCarlo},
      {4, "zero-delay equivalence", 0, ZeroDelayEquivalence},
      {5, "rate orders", 600, RateOrders},
      {6, "fig2 iterations-to-threshold ordering", 900, Fig2Ordering},
      {7, "fig4 virtual-time ordering", 300, Fig4VirtualTime},
      {8, "gradient correctness", 60, GradientCorrectness},
      {9, "fig2a determinism", 0, [&] { return Determinism(work); }},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = o.pass;
    std::string timing = Num(secs) + " s";
    if (c.budget_seconds > 0) {
      timing += " (budget " + Num(c.budget_seconds) + " s)";
      pass = pass && secs < c.budget_seconds;
    }
    if (!pass) ++failed;
    std::cout << "criterion " << c.id << ": " << (pass ? "PASS" : "FAIL") << " "
              << c.name << ": " << o.detail << " [" << timing << "]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}

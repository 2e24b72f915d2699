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

#include "asgd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "asgd/config.hpp"
#include "asgd/diagnostics.hpp"
#include "asgd/errors.hpp"
#include "asgd/trace_io.hpp"
#include "json.hpp"

namespace asgd {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr int kFirstCValues = 20;

// Non-finite values become null.
Json Number(double value) {
  if (!std::isfinite(value)) return nullptr;
  return value;
}

std::string Dump(const Json& json) { return json.dump(2) + "\n"; }

struct RunOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> algorithm;
  bool allow_inadmissible = false;
};

ExperimentConfig LoadWithOverrides(const RunOptions& options) {
  ExperimentConfig config = LoadConfig(options.config);
  if (options.seed) config.seeds = {*options.seed};
  if (options.out_dir) config.out_dir = *options.out_dir;
  if (options.allow_inadmissible) config.allow_inadmissible = true;
  if (options.algorithm) {
    try {
      config.base.algorithm = ParseAlgorithm(*options.algorithm);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("--algorithm", e.what());
    }
    config.base.label = *options.algorithm;
    config.variants.clear();
    if (config.base.algorithm == Algorithm::kAsync &&
        IsIncreasing(config.base.batch)) {
      throw ConfigError("--algorithm", "async needs a fixed batch schedule");
    }
    if (config.base.algorithm == Algorithm::kAsyncIncreasing &&
        !IsIncreasing(config.base.batch)) {
      throw ConfigError("--algorithm",
                        "async_i needs an increasing batch schedule");
    }
  }
  return config;
}

ProblemPtr BuildProblemOrConfigError(const ProblemConfig& config) {
  try {
    return BuildProblem(config);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("problem", e.what());
  }
}

Json ProblemJson(const Problem& problem) {
  Json j;
  j["kind"] = std::string(problem.Kind());
  j["dimension"] = problem.Dimension();
  j["lipschitz"] = Number(problem.Lipschitz());
  j["sigma2"] = Number(problem.Sigma2());
  j["optimum_value"] = problem.OptimumValue() ? Number(*problem.OptimumValue())
                                              : Json(nullptr);
  return j;
}

Json AdmissibilityJson(const RunAdmissibility& a) {
  Json j;
  j["status"] = AdmissibilityStatusName(a.status);
  j["c1"] = Number(a.c1);
  j["gamma_cap"] = Number(a.gamma_cap);
  j["reason"] = a.reason;
  return j;
}

int CmdRun(const RunOptions& options, std::ostream& out, std::ostream& err) {
  const ExperimentConfig config = LoadWithOverrides(options);
  const ProblemPtr problem = BuildProblemOrConfigError(config.problem);
  const std::vector<VariantConfig> variants = ResolveVariants(config);

  // Every variant is checked before anything runs.
  std::vector<RunAdmissibility> checks;
  for (const auto& v : variants) {
    checks.push_back(CheckRunAdmissibility(
        MakeRunConfig(config, v, problem, config.seeds.front())));
    if (checks.back().status == AdmissibilityStatus::kInadmissible &&
        !config.allow_inadmissible) {
      err << "variant '" << v.label << "' is inadmissible: "
          << checks.back().reason
          << " (pass --allow-inadmissible to run it anyway)\n";
      return kExitInadmissible;
    }
  }

  const fs::path dir(config.out_dir);
  Json summary;
  summary["schema"] = kConfigSchema;
  summary["rng_version"] = kRngVersion;
  summary["prefix"] = config.prefix;
  summary["problem"] = ProblemJson(*problem);
  summary["delay_model"] = DelayModelName(config.delay);
  summary["average"] = config.average;
  summary["variants"] = Json::array();

  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    const VariantConfig& v = variants[vi];
    Json vj;
    vj["label"] = v.label;
    vj["algorithm"] = AlgorithmName(v.algorithm);
    vj["step_rule"] = StepRuleName(v.step.schedule);
    vj["iterations"] = v.iterations;
    vj["admissibility"] = AdmissibilityJson(checks[vi]);
    vj["runs"] = Json::array();

    std::vector<std::vector<TraceRow>> traces;
    for (std::uint64_t seed : config.seeds) {
      const RunConfig run = MakeRunConfig(config, v, problem, seed);
      RunTrace trace = Run(run);
      const std::string name = config.prefix + "_" + v.label + "_seed" +
                               std::to_string(seed) + ".csv";
      WriteTextFile(dir / name, TraceToCsv(trace.rows));
      const RunSummary& s = trace.summary;
      Json rj;
      rj["seed"] = seed;
      rj["trace"] = name;
      rj["final_grad_norm_sq"] = Number(s.final_grad_norm_sq);
      rj["final_objective"] = Number(s.final_objective);
      rj["final_vtime"] = Number(s.final_vtime);
      rj["total_rejections"] = s.total_rejections;
      rj["history_overflow"] = s.history_overflow;
      rj["max_delay"] = s.max_delay;
      rj["total_gradients"] = s.total_gradients;
      vj["runs"].push_back(rj);
      traces.push_back(std::move(trace.rows));
    }
    const Ensemble ensemble = EnsembleMean(traces, v.label);
    const std::string mean_name = config.prefix + "_" + v.label + "_mean.csv";
    WriteTextFile(dir / mean_name, EnsembleToCsv(ensemble));
    Json ej;
    ej["file"] = mean_name;
    ej["seeds"] = ensemble.seeds;
    ej["final_mean_grad_norm_sq"] = Number(ensemble.mean.back());
    ej["final_mean_vtime"] = Number(ensemble.vtime.back());
    try {
      const RateFit fit = FitEnsembleRate(ensemble, 0.5);
      ej["rate_fit_last_half"] = {{"slope", Number(fit.slope)},
                                  {"r_squared", Number(fit.r_squared)}};
    } catch (const std::invalid_argument&) {
      ej["rate_fit_last_half"] = nullptr;
    }
    vj["ensemble"] = ej;
    summary["variants"].push_back(vj);
    out << v.label << ": " << config.seeds.size() << " run(s), final mean "
        << "grad_norm_sq " << FormatDouble(ensemble.mean.back()) << "\n";
  }
  const std::string summary_name = config.prefix + "_summary.json";
  WriteTextFile(dir / summary_name, Dump(summary));
  out << "wrote " << (dir / summary_name).string() << "\n";
  return kExitOk;
}

int CmdCheckDelay(const RunOptions& options, std::ostream& out) {
  const ExperimentConfig config = LoadWithOverrides(options);
  const ProblemPtr problem = BuildProblemOrConfigError(config.problem);
  Json report;
  report["delay_model"] = DelayModelName(config.delay);
  report["problem"] = ProblemJson(*problem);
  report["variants"] = Json::array();
  for (const VariantConfig& v : ResolveVariants(config)) {
    const RunConfig run = MakeRunConfig(config, v, problem, config.seeds.front());
    const RunAdmissibility a = CheckRunAdmissibility(run);
    const std::int64_t m = BaseBatch(v.batch);
    Json vj;
    vj["label"] = v.label;
    vj["algorithm"] = AlgorithmName(v.algorithm);
    vj["m"] = m;
    vj["gamma_bar"] = Number(StepAt(run.step, 1));
    vj["verdict"] = AdmissibilityStatusName(a.status);
    vj["reason"] = a.reason;
    vj["c1"] = Number(a.c1);
    vj["c1_finite"] = a.sequence ? Json(a.sequence->c1_finite) : Json(nullptr);
    vj["gamma_cap"] = Number(a.gamma_cap);
    vj["c_first20"] = Json::array();
    vj["truncation_error_bound"] = nullptr;
    if (a.sequence) {
      const auto& c = a.sequence->c;
      for (std::size_t i = 0; i < c.size() && i < kFirstCValues; ++i) {
        vj["c_first20"].push_back(Number(c[i]));
      }
      vj["truncation_error_bound"] = Number(a.sequence->truncation_error_bound);
      if (a.sequence->c1_finite) {
        const Theorem1Report t1 = ValidateTheorem1(
            run.step, a.c1, m, problem->Lipschitz(), v.iterations);
        vj["theorem1"] = {{"passes", t1.passes},
                          {"cap_respected", t1.cap_respected},
                          {"sum_diverges", t1.sum_diverges},
                          {"squares_summable", t1.squares_summable},
                          {"reason", t1.reason}};
        const Theorem2Report t2 =
            ValidateTheorem2(v.batch, run.step, a.c1, m, problem->Lipschitz());
        vj["theorem2"] = {{"passes", t2.passes},
                          {"reciprocals_summable", t2.reciprocals_summable},
                          {"constant_step", t2.constant_step},
                          {"cap_respected", t2.cap_respected},
                          {"reason", t2.reason}};
      }
    }
    report["variants"].push_back(vj);
  }
  out << Dump(report);
  return kExitOk;
}

Ensemble LoadEnsemble(const std::string& pattern, const std::string& label) {
  const auto paths = ExpandGlob(pattern);
  if (paths.empty()) {
    throw std::out_of_range("no trace matches '" + pattern + "'");
  }
  std::vector<std::vector<TraceRow>> traces;
  for (const auto& p : paths) traces.push_back(ReadTraceCsv(p));
  try {
    return EnsembleMean(traces, label);
  } catch (const std::invalid_argument& e) {
    throw IoError(pattern + ": " + e.what());
  }
}

Json FitJson(const RateFit& fit) {
  Json j;
  j["slope"] = Number(fit.slope);
  j["intercept"] = Number(fit.intercept);
  j["r_squared"] = Number(fit.r_squared);
  j["first_k"] = fit.first_k;
  j["last_k"] = fit.last_k;
  j["points"] = fit.points;
  j["excluded_nonpositive"] = fit.excluded;
  return j;
}

int CmdRateFit(const std::string& pattern, double window,
               const std::optional<std::string>& out_dir, std::ostream& out,
               std::ostream& err) {
  const Ensemble ensemble = LoadEnsemble(pattern, "ensemble");
  RateFit fit;
  try {
    fit = FitEnsembleRate(ensemble, window);
  } catch (const std::invalid_argument& e) {
    err << "rate-fit: " << e.what() << "\n";
    return kExitConfig;
  }
  Json report;
  report["pattern"] = pattern;
  report["traces"] = ensemble.seeds;
  report["window_fraction"] = window;
  report["fit"] = FitJson(fit);
  if (out_dir) {
    const fs::path path = fs::path(*out_dir) / "rate_fit_ensemble.csv";
    WriteTextFile(path, EnsembleToCsv(ensemble));
    report["ensemble_csv"] = path.string();
  }
  out << Dump(report);
  return kExitOk;
}

int CmdCompare(const std::vector<std::string>& specs,
               std::optional<double> threshold,
               std::optional<double> threshold_factor,
               const std::optional<std::string>& reference,
               const std::optional<std::string>& out_dir, std::ostream& out,
               std::ostream& err) {
  std::vector<Ensemble> ensembles;
  for (const std::string& spec : specs) {
    // "label=pattern" or a bare pattern used as its own label.
    const std::size_t eq = spec.find('=');
    const std::string label = eq == std::string::npos ? spec : spec.substr(0, eq);
    const std::string pattern =
        eq == std::string::npos ? spec : spec.substr(eq + 1);
    ensembles.push_back(LoadEnsemble(pattern, label));
  }
  if (!threshold) {
    if (!threshold_factor || !reference) {
      err << "compare: give --threshold, or --threshold-factor with "
             "--reference\n";
      return kExitConfig;
    }
    const auto it = std::find_if(
        ensembles.begin(), ensembles.end(),
        [&](const Ensemble& e) { return e.label == *reference; });
    if (it == ensembles.end()) {
      err << "compare: no ensemble labelled '" << *reference << "'\n";
      return kExitConfig;
    }
    threshold = *threshold_factor * it->mean.back();
  }
  const CompareReport cmp = CompareRuns(ensembles, *threshold);
  Json report;
  report["threshold"] = Number(cmp.threshold);
  report["entries"] = Json::array();
  for (std::size_t i = 0; i < cmp.entries.size(); ++i) {
    const CompareEntry& e = cmp.entries[i];
    Json ej;
    ej["label"] = e.label;
    ej["seeds"] = ensembles[i].seeds;
    ej["iteration"] = e.iteration ? Json(*e.iteration) : Json(nullptr);
    ej["vtime"] = e.vtime ? Number(*e.vtime) : Json(nullptr);
    ej["censored"] = e.censored;
    ej["rank_iterations"] = e.rank_iterations;
    ej["rank_vtime"] = e.rank_vtime;
    ej["final_mean_grad_norm_sq"] = Number(ensembles[i].mean.back());
    report["entries"].push_back(ej);
    if (out_dir) {
      WriteTextFile(fs::path(*out_dir) / ("compare_" + e.label + ".csv"),
                    EnsembleToCsv(ensembles[i]));
    }
  }
  report["ordering_iterations"] = cmp.ordering_iterations;
  report["ordering_vtime"] = cmp.ordering_vtime;
  out << Dump(report);
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Asynchronous SGD simulator under unbounded gradient delays",
               "asgd_sim"};
  app.require_subcommand(1);

  RunOptions run_options;
  auto add_run_flags = [&](CLI::App* sub, bool all) {
    sub->add_option("--config", run_options.config, "TOML experiment file")
        ->required();
    if (!all) return;
    sub->add_option("--seed", run_options.seed, "run this single seed");
    sub->add_option("--out-dir", run_options.out_dir, "output directory");
    sub->add_option("--algorithm", run_options.algorithm,
                    "sync, async or async_i; replaces the variant list");
    sub->add_flag("--allow-inadmissible", run_options.allow_inadmissible,
                  "run configurations that fail the admissibility check");
  };
  CLI::App* run = app.add_subcommand("run", "run an experiment");
  add_run_flags(run, true);
  CLI::App* check = app.add_subcommand(
      "check-delay", "print the admissibility report for a config");
  add_run_flags(check, false);
  check->add_option("--algorithm", run_options.algorithm,
                    "sync, async or async_i; replaces the variant list");

  std::string fit_pattern;
  double window = 0.5;
  std::optional<std::string> out_dir;
  CLI::App* fit = app.add_subcommand("rate-fit", "log-log slope of a trace ensemble");
  fit->add_option("traces", fit_pattern, "glob matching the trace CSVs")
      ->required();
  fit->add_option("--window", window, "fraction of iterations to fit")
      ->check(CLI::Range(0.0, 1.0));
  fit->add_option("--out-dir", out_dir, "also write the ensemble CSV here");

  std::vector<std::string> specs;
  std::optional<double> threshold, threshold_factor;
  std::optional<std::string> reference;
  CLI::App* compare =
      app.add_subcommand("compare", "iterations and virtual time to a threshold");
  compare->add_option("ensembles", specs, "[label=]glob per ensemble")
      ->required();
  compare->add_option("--threshold", threshold, "grad_norm_sq threshold");
  compare->add_option("--threshold-factor", threshold_factor,
                      "threshold as a multiple of the reference's final mean");
  compare->add_option("--reference", reference, "label of the reference ensemble");
  compare->add_option("--out-dir", out_dir, "also write ensemble CSVs here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (run->parsed()) return CmdRun(run_options, out, err);
    if (check->parsed()) return CmdCheckDelay(run_options, out);
    if (fit->parsed()) return CmdRateFit(fit_pattern, window, out_dir, out, err);
    if (compare->parsed()) {
      return CmdCompare(specs, threshold, threshold_factor, reference, out_dir,
                        out, err);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InadmissibleConfig& e) {
    err << e.what() << "\n";
    return kExitInadmissible;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::out_of_range& e) {
    err << e.what() << "\n";
    return kExitNoInput;
  }
  return kExitConfig;
}

}  // namespace asgd

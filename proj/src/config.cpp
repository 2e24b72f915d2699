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

#include "asgd/config.hpp"

#include <set>
#include <sstream>

#include <Eigen/Cholesky>

#include "asgd/errors.hpp"
#include "asgd/trace_io.hpp"
#include "toml.hpp"

namespace asgd {

namespace {

// Typed access to one TOML table that remembers which keys were read.
class Section {
 public:
  Section(const toml::table& table, std::string path)
      : table_(table), path_(std::move(path)) {}

  std::string Key(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  bool Has(std::string_view key) {
    used_.insert(std::string(key));
    return table_.contains(key);
  }

  const toml::node& Node(std::string_view key) {
    used_.insert(std::string(key));
    const toml::node* node = table_.get(key);
    if (node == nullptr) throw ConfigError(Key(key), "required key is missing");
    return *node;
  }

  double Double(std::string_view key) {
    const toml::node& node = Node(key);
    if (auto v = node.value_exact<double>()) return *v;
    if (auto v = node.value_exact<std::int64_t>()) return static_cast<double>(*v);
    throw ConfigError(Key(key), "expected a number");
  }
  double Double(std::string_view key, double fallback) {
    return Has(key) ? Double(key) : fallback;
  }

  std::int64_t Int(std::string_view key) {
    if (auto v = Node(key).value_exact<std::int64_t>()) return *v;
    throw ConfigError(Key(key), "expected an integer");
  }
  std::int64_t Int(std::string_view key, std::int64_t fallback) {
    return Has(key) ? Int(key) : fallback;
  }

  bool Bool(std::string_view key, bool fallback) {
    if (!Has(key)) return fallback;
    if (auto v = Node(key).value_exact<bool>()) return *v;
    throw ConfigError(Key(key), "expected true or false");
  }

  std::string String(std::string_view key) {
    if (auto v = Node(key).value_exact<std::string>()) return *v;
    throw ConfigError(Key(key), "expected a string");
  }
  std::string String(std::string_view key, std::string fallback) {
    return Has(key) ? String(key) : fallback;
  }

  std::vector<double> DoubleList(std::string_view key) {
    const toml::array* array = Node(key).as_array();
    if (array == nullptr) throw ConfigError(Key(key), "expected an array");
    std::vector<double> out;
    for (const toml::node& item : *array) {
      if (auto v = item.value_exact<double>()) {
        out.push_back(*v);
      } else if (auto i = item.value_exact<std::int64_t>()) {
        out.push_back(static_cast<double>(*i));
      } else {
        throw ConfigError(Key(key), "expected an array of numbers");
      }
    }
    return out;
  }

  std::vector<std::int64_t> IntList(std::string_view key) {
    const toml::array* array = Node(key).as_array();
    if (array == nullptr) throw ConfigError(Key(key), "expected an array");
    std::vector<std::int64_t> out;
    for (const toml::node& item : *array) {
      auto v = item.value_exact<std::int64_t>();
      if (!v) throw ConfigError(Key(key), "expected an array of integers");
      out.push_back(*v);
    }
    return out;
  }

  Eigen::MatrixXd Matrix(std::string_view key) {
    const toml::array* rows = Node(key).as_array();
    if (rows == nullptr || rows->empty()) {
      throw ConfigError(Key(key), "expected a non-empty array of rows");
    }
    const auto n = static_cast<Eigen::Index>(rows->size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const toml::array* row = rows->get(static_cast<std::size_t>(i))->as_array();
      if (row == nullptr || static_cast<Eigen::Index>(row->size()) != n) {
        throw ConfigError(Key(key), "expected a square matrix");
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        const toml::node& item = *row->get(static_cast<std::size_t>(j));
        if (auto v = item.value_exact<double>()) {
          m(i, j) = *v;
        } else if (auto iv = item.value_exact<std::int64_t>()) {
          m(i, j) = static_cast<double>(*iv);
        } else {
          throw ConfigError(Key(key), "expected numeric matrix entries");
        }
      }
    }
    return m;
  }

  const toml::table* Table(std::string_view key) {
    if (!Has(key)) return nullptr;
    const toml::table* t = Node(key).as_table();
    if (t == nullptr) throw ConfigError(Key(key), "expected a table");
    return t;
  }

  void RejectUnknown() const {
    for (const auto& [key, node] : table_) {
      if (!used_.contains(std::string(key.str()))) {
        throw ConfigError(Key(key.str()), "unknown key");
      }
    }
  }

 private:
  const toml::table& table_;
  std::string path_;
  std::set<std::string> used_;
};

void Require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

void RequireSpd(const Eigen::MatrixXd& m, const std::string& key) {
  Require(m.isApprox(m.transpose(), 1e-12), key, "matrix must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  Require(llt.info() == Eigen::Success, key, "matrix must be positive definite");
}

ProblemConfig ParseProblem(Section s) {
  ProblemConfig p;
  p.kind = s.String("kind");
  if (s.Has("seed")) {
    const std::int64_t seed = s.Int("seed");
    Require(seed >= 0, s.Key("seed"), "must be >= 0");
    p.seed = static_cast<std::uint64_t>(seed);
  }
  if (p.kind == "quadratic") {
    Require(s.Has("curvature") != s.Has("curvature_diag"), s.Key("curvature"),
            "give exactly one of curvature or curvature_diag");
    if (s.Has("curvature")) {
      p.curvature = s.Matrix("curvature");
    } else {
      const auto diag = s.DoubleList("curvature_diag");
      Require(!diag.empty(), s.Key("curvature_diag"), "must be non-empty");
      p.curvature = Eigen::Map<const Eigen::VectorXd>(
                        diag.data(), static_cast<Eigen::Index>(diag.size()))
                        .asDiagonal();
    }
    RequireSpd(p.curvature,
               s.Key(s.Has("curvature") ? "curvature" : "curvature_diag"));
    p.noise_std = s.Double("noise_std", 0.0);
    Require(p.noise_std >= 0.0, s.Key("noise_std"), "must be >= 0");
    if (s.Has("start")) {
      const auto start = s.DoubleList("start");
      Require(static_cast<Eigen::Index>(start.size()) == p.curvature.rows(),
              s.Key("start"), "length must match the curvature dimension");
      p.start = Eigen::Map<const Eigen::VectorXd>(
          start.data(), static_cast<Eigen::Index>(start.size()));
    }
  } else if (p.kind == "matrix_completion") {
    p.n = s.Int("n", 20);
    p.rank = s.Int("rank", 1);
    Require(p.rank >= 1, s.Key("rank"), "must be >= 1");
    Require(p.n >= p.rank, s.Key("n"), "must be >= rank");
    p.noise_std = s.Double("noise_std", 1.0);
    Require(p.noise_std > 0.0, s.Key("noise_std"), "must be > 0");
    p.truth_scale = s.Double("truth_scale", 1.0);
    Require(p.truth_scale > 0.0, s.Key("truth_scale"), "must be > 0");
  } else if (p.kind == "mvn_mle") {
    p.covariance = s.Matrix("covariance");
    RequireSpd(p.covariance, s.Key("covariance"));
    const auto dim = p.covariance.rows();
    if (s.Has("mean")) {
      const auto mean = s.DoubleList("mean");
      Require(static_cast<Eigen::Index>(mean.size()) == dim, s.Key("mean"),
              "length must match the covariance dimension");
      p.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), dim);
    } else {
      p.mean = Eigen::VectorXd::Zero(dim);
    }
    p.num_samples = s.Int("num_samples", 1000);
    Require(p.num_samples > dim, s.Key("num_samples"),
            "must exceed the dimension");
  } else {
    throw ConfigError(s.Key("kind"),
                      "unknown problem '" + p.kind +
                          "' (expected quadratic, matrix_completion, mvn_mle)");
  }
  s.RejectUnknown();
  return p;
}

DelayModel ParseDelay(Section s) {
  const std::string model = s.String("model");
  DelayModel out;
  if (model == "bounded") {
    BoundedDelay b;
    b.max_delay = s.Int("max_delay");
    Require(b.max_delay >= 0, s.Key("max_delay"), "must be >= 0");
    if (s.Has("weights")) {
      b.weights = s.DoubleList("weights");
      Require(std::ssize(b.weights) == b.max_delay + 1, s.Key("weights"),
              "needs max_delay + 1 entries");
      double total = 0.0;
      for (double w : b.weights) {
        Require(w >= 0.0, s.Key("weights"), "entries must be >= 0");
        total += w;
      }
      Require(total > 0.0, s.Key("weights"), "entries must not all be 0");
    }
    out = b;
  } else if (model == "poisson") {
    PoissonDelay p{s.Double("rate")};
    Require(p.rate > 0.0, s.Key("rate"), "must be > 0");
    out = p;
  } else if (model == "growing_uniform") {
    out = GrowingUniformDelay{};
  } else if (model == "series_bounded") {
    SeriesBoundedDelay d;
    const std::string family = s.String("family");
    using F = SeriesBoundedDelay::Family;
    if (family == "explicit") {
      d.family = F::kExplicit;
      d.explicit_series = s.DoubleList("series");
      for (double a : d.explicit_series) {
        Require(a >= 0.0, s.Key("series"), "entries must be >= 0");
      }
    } else if (family == "lognormal") {
      d.family = F::kLogNormal;
      d.log_mu = s.Double("mu");
      d.log_sigma = s.Double("sigma");
      Require(d.log_sigma > 0.0, s.Key("sigma"), "must be > 0");
    } else if (family == "weibull") {
      d.family = F::kWeibull;
      d.weibull_shape = s.Double("shape");
      d.weibull_scale = s.Double("scale");
      Require(d.weibull_shape > 0.0, s.Key("shape"), "must be > 0");
      Require(d.weibull_scale > 0.0, s.Key("scale"), "must be > 0");
    } else if (family == "zeta") {
      d.family = F::kZeta;
      d.zeta_exponent = s.Double("exponent");
      Require(d.zeta_exponent > 1.0, s.Key("exponent"), "must be > 1");
    } else {
      throw ConfigError(s.Key("family"),
                        "unknown family '" + family +
                            "' (expected explicit, lognormal, weibull, zeta)");
    }
    out = d;
  } else if (model == "system") {
    SystemDelay d;
    d.num_workers = s.Int("workers", 10);
    Require(d.num_workers >= 1, s.Key("workers"), "must be >= 1");
    d.redraw_rate_per_task = s.Bool("redraw_rate_per_task", false);
    out = d;
  } else {
    throw ConfigError(s.Key("model"),
                      "unknown delay model '" + model +
                          "' (expected bounded, poisson, growing_uniform, "
                          "series_bounded, system)");
  }
  s.RejectUnknown();
  return out;
}

StepConfig ParseStep(Section s) {
  StepConfig out;
  const std::string rule = s.String("rule");
  const double gamma0 = s.Double("gamma0");
  Require(gamma0 > 0.0, s.Key("gamma0"), "must be > 0");
  if (rule == "constant") {
    out.schedule.rule = ConstantStep{gamma0};
  } else if (rule == "inv_k" || rule == "inv_sqrt_k_log") {
    const std::int64_t every = s.Int("decay_every", 1);
    Require(every >= 1, s.Key("decay_every"), "must be >= 1");
    if (rule == "inv_k") {
      out.schedule.rule = InvKStep{gamma0, every};
    } else {
      const std::int64_t shift = s.Int("log_shift", 0);
      Require(shift >= 0, s.Key("log_shift"), "must be >= 0");
      out.schedule.rule = InvSqrtKLogStep{gamma0, every, shift};
    }
  } else {
    throw ConfigError(s.Key("rule"),
                      "unknown step rule '" + rule +
                          "' (expected constant, inv_k, inv_sqrt_k_log)");
  }
  if (s.Has("cap")) {
    const double cap = s.Double("cap");
    Require(cap > 0.0, s.Key("cap"), "must be > 0");
    out.schedule.cap = cap;
  }
  out.clamp_to_cap = s.Bool("clamp_to_cap", false);
  s.RejectUnknown();
  return out;
}

BatchSchedule ParseBatch(Section s) {
  const std::string kind = s.String("kind");
  const std::int64_t m = s.Int("m");
  Require(m >= 1, s.Key("m"), "must be >= 1");
  BatchSchedule out;
  if (kind == "fixed") {
    out = FixedBatch{m};
  } else if (kind == "increasing") {
    IncreasingBatch b;
    b.m = m;
    if (s.Has("n")) {
      b.explicit_n = s.IntList("n");
      Require(!b.explicit_n.empty(), s.Key("n"), "must be non-empty");
      std::int64_t prev = 1;
      for (std::int64_t n : b.explicit_n) {
        Require(n >= prev, s.Key("n"), "entries must be >= 1 and non-decreasing");
        prev = n;
      }
    } else {
      b.alpha = s.Double("alpha", 1.0);
      Require(b.alpha > 0.0, s.Key("alpha"), "must be > 0");
      b.power = s.Double("power", 2.0);
      Require(b.power >= 0.0, s.Key("power"), "must be >= 0");
      b.change_every = s.Int("change_every", 1);
      Require(b.change_every >= 1, s.Key("change_every"), "must be >= 1");
    }
    out = b;
  } else {
    throw ConfigError(s.Key("kind"), "unknown batch kind '" + kind +
                                         "' (expected fixed, increasing)");
  }
  s.RejectUnknown();
  return out;
}

Algorithm ParseAlgorithmKey(const std::string& name, const std::string& key) {
  try {
    return ParseAlgorithm(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

void CheckCompatible(const VariantConfig& v, const DelayModel& delay,
                     const std::string& algorithm_key,
                     const std::string& step_key) {
  if (v.algorithm == Algorithm::kAsync && IsIncreasing(v.batch)) {
    throw ConfigError(algorithm_key, "async needs a fixed batch schedule");
  }
  if (v.algorithm == Algorithm::kAsyncIncreasing && !IsIncreasing(v.batch)) {
    throw ConfigError(algorithm_key, "async_i needs an increasing batch schedule");
  }
  if (v.step.clamp_to_cap && IsSystem(delay) && v.algorithm != Algorithm::kSync) {
    throw ConfigError(step_key + ".clamp_to_cap",
                      "no step cap is available for system delays");
  }
}

}  // namespace

ExperimentConfig ParseConfig(std::string_view text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream what;
    what << "TOML syntax error at line " << e.source().begin.line << ": "
         << e.description();
    throw ConfigError("", what.str());
  }
  Section top(root, "");
  ExperimentConfig config;

  Require(top.Has("schema"), "schema", "required key is missing");
  const std::int64_t schema = top.Int("schema");
  Require(schema == kConfigSchema, "schema",
          "unsupported schema version " + std::to_string(schema) +
              " (expected " + std::to_string(kConfigSchema) + ")");

  auto section = [&](std::string_view key) -> Section {
    const toml::table* t = top.Table(key);
    if (t == nullptr) throw ConfigError(std::string(key), "required table is missing");
    return Section(*t, std::string(key));
  };

  config.problem = ParseProblem(section("problem"));
  config.delay = ParseDelay(section("delay"));
  config.base.step = ParseStep(section("step_schedule"));
  config.base.batch = ParseBatch(section("batch_schedule"));
  {
    Section s = section("algorithm");
    config.base.algorithm = ParseAlgorithmKey(s.String("kind"), s.Key("kind"));
    config.average = s.Bool("average", false);
    s.RejectUnknown();
  }
  {
    Section s = section("run");
    config.base.iterations = s.Int("iterations");
    Require(config.base.iterations >= 1, s.Key("iterations"), "must be >= 1");
    const auto seeds = s.IntList("seeds");
    Require(!seeds.empty(), s.Key("seeds"), "must be non-empty");
    for (std::int64_t seed : seeds) {
      Require(seed >= 0, s.Key("seeds"), "entries must be >= 0");
      config.seeds.push_back(static_cast<std::uint64_t>(seed));
    }
    config.history_capacity = s.Int("history_capacity", 4096);
    Require(config.history_capacity >= 1, s.Key("history_capacity"),
            "must be >= 1");
    config.allow_inadmissible = s.Bool("allow_inadmissible", false);
    s.RejectUnknown();
  }
  if (const toml::table* t = top.Table("output")) {
    Section s(*t, "output");
    config.out_dir = s.String("dir", config.out_dir);
    config.prefix = s.String("prefix", config.prefix);
    Require(!config.prefix.empty(), s.Key("prefix"), "must be non-empty");
    config.record_lyapunov = s.Bool("record_lyapunov", true);
    config.record_delays = s.Bool("record_delays", false);
    s.RejectUnknown();
  }
  config.base.label = AlgorithmName(config.base.algorithm);
  CheckCompatible(config.base, config.delay, "algorithm.kind", "step_schedule");

  if (top.Has("variants")) {
    const toml::array* list = top.Node("variants").as_array();
    Require(list != nullptr && list->is_array_of_tables(), "variants",
            "expected an array of tables");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < list->size(); ++i) {
      const std::string path = "variants[" + std::to_string(i) + "]";
      Section s(*list->get(i)->as_table(), path);
      VariantConfig v = config.base;
      v.label = s.String("label");
      Require(!v.label.empty() &&
                  v.label.find_first_of("/\\ ") == std::string::npos,
              s.Key("label"), "must be non-empty without spaces or slashes");
      Require(labels.insert(v.label).second, s.Key("label"), "duplicate label");
      if (s.Has("algorithm")) {
        v.algorithm = ParseAlgorithmKey(s.String("algorithm"), s.Key("algorithm"));
      }
      if (const toml::table* t = s.Table("step_schedule")) {
        v.step = ParseStep(Section(*t, s.Key("step_schedule")));
      }
      if (const toml::table* t = s.Table("batch_schedule")) {
        v.batch = ParseBatch(Section(*t, s.Key("batch_schedule")));
      }
      v.iterations = s.Int("iterations", config.base.iterations);
      Require(v.iterations >= 1, s.Key("iterations"), "must be >= 1");
      s.RejectUnknown();
      CheckCompatible(v, config.delay, s.Key("algorithm"), s.Key("step_schedule"));
      config.variants.push_back(std::move(v));
    }
  }
  top.RejectUnknown();
  return config;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  return ParseConfig(ReadTextFile(path));
}

ProblemPtr BuildProblem(const ProblemConfig& config) {
  if (config.kind == "quadratic") {
    return MakeQuadratic(config.curvature, config.noise_std, config.start);
  }
  if (config.kind == "matrix_completion") {
    return MakeMatrixCompletion(config.n, config.rank, config.noise_std,
                                config.seed, config.truth_scale);
  }
  if (config.kind == "mvn_mle") {
    return MakeMvnMle(config.num_samples, config.covariance, config.mean,
                      config.seed);
  }
  throw ConfigError("problem.kind", "unknown problem '" + config.kind + "'");
}

std::vector<VariantConfig> ResolveVariants(const ExperimentConfig& config) {
  if (config.variants.empty()) return {config.base};
  return config.variants;
}

RunConfig MakeRunConfig(const ExperimentConfig& config,
                        const VariantConfig& variant, ProblemPtr problem,
                        std::uint64_t seed) {
  RunConfig run;
  run.problem = std::move(problem);
  run.delay = config.delay;
  run.step = variant.step.schedule;
  run.batch = variant.batch;
  run.algorithm = variant.algorithm;
  run.average = config.average;
  run.iterations = variant.iterations;
  run.seed = seed;
  run.history_capacity = config.history_capacity;
  run.allow_inadmissible = config.allow_inadmissible;
  run.record_lyapunov = config.record_lyapunov;
  run.record_delays = config.record_delays;
  if (variant.step.clamp_to_cap) {
    const std::int64_t m = BaseBatch(variant.batch);
    const DelayModel model = variant.algorithm == Algorithm::kSync
                                 ? DelayModel{BoundedDelay{0, {}}}
                                 : config.delay;
    double cap = MaxAdmissibleStep(model, m, run.problem->Lipschitz());
    // The cap bounds the multiplier of the gradient sum; averaging divides
    // the step by M first.
    if (config.average) cap *= static_cast<double>(m);
    run.step = Clamped(run.step, cap);
  }
  return run;
}

}  // namespace asgd

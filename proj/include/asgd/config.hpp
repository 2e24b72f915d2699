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

// TOML experiment files. Every key is checked; unknown keys, wrong types and
// out-of-range values raise ConfigError naming the dotted key.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "asgd/delay_models.hpp"
#include "asgd/engine.hpp"
#include "asgd/problems.hpp"
#include "asgd/schedules.hpp"

namespace asgd {

inline constexpr std::int64_t kConfigSchema = 1;

struct ProblemConfig {
  std::string kind;  // quadratic | matrix_completion | mvn_mle
  std::uint64_t seed = 1;
  double noise_std = 1.0;
  // quadratic
  Eigen::MatrixXd curvature;
  std::optional<ParamVector> start;
  // matrix_completion
  std::int64_t n = 20;
  std::int64_t rank = 1;
  double truth_scale = 1.0;
  // mvn_mle
  Eigen::MatrixXd covariance;
  Eigen::VectorXd mean;
  std::int64_t num_samples = 1000;
};

struct StepConfig {
  StepSchedule schedule;
  // Clamp to the largest constant step admissible for the delay model.
  bool clamp_to_cap = false;
};

struct VariantConfig {
  std::string label;
  Algorithm algorithm = Algorithm::kAsync;
  StepConfig step;
  BatchSchedule batch = FixedBatch{};
  std::int64_t iterations = 1;
};

struct ExperimentConfig {
  ProblemConfig problem;
  DelayModel delay = BoundedDelay{};
  VariantConfig base;
  bool average = false;
  std::vector<std::uint64_t> seeds;
  std::int64_t history_capacity = 4096;
  bool allow_inadmissible = false;
  std::string out_dir = "out";
  std::string prefix = "run";
  bool record_lyapunov = true;
  bool record_delays = false;
  std::vector<VariantConfig> variants;
};

ExperimentConfig ParseConfig(std::string_view text);
// Throws IoError when the file cannot be read.
ExperimentConfig LoadConfig(const std::filesystem::path& path);

ProblemPtr BuildProblem(const ProblemConfig& config);

// The variants to run: the [[variants]] list, or the base run alone.
std::vector<VariantConfig> ResolveVariants(const ExperimentConfig& config);

// Engine configuration for one (variant, seed). Resolves clamp_to_cap
// against the problem's L.
RunConfig MakeRunConfig(const ExperimentConfig& config,
                        const VariantConfig& variant, ProblemPtr problem,
                        std::uint64_t seed);

}  // namespace asgd

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

#include <stdexcept>
#include <string>

namespace asgd {

// Parameter vector length does not match the problem dimension.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The iterate decodes to a point outside the feasible set (non-SPD Σ).
class InfeasibleIterate : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The requested analysis has no closed form for this delay model.
class AnalysisUnavailable : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The (delay model, step schedule) pair fails the admissibility check and
// the caller did not opt in to running it anyway.
class InadmissibleConfig : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or schema-violating configuration. `key` names the offending
// entry using dotted TOML paths.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what),
        key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// File system failures while reading or writing traces and reports.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace asgd

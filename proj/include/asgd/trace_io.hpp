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

// Locale-independent CSV for traces and ensembles. Floats use 17
// significant digits so that a written value reads back bit-exactly.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "asgd/diagnostics.hpp"
#include "asgd/engine.hpp"

namespace asgd {

inline constexpr std::string_view kTraceHeader =
    "k,gamma,batch,grad_norm_sq,objective,lyapunov,max_delay,mean_delay,vtime,"
    "rejections";

// "nan", "inf", "-inf" or a 17-significant-digit decimal.
std::string FormatDouble(double value);
double ParseDouble(std::string_view text);

std::string TraceToCsv(const std::vector<TraceRow>& rows);
std::vector<TraceRow> TraceFromCsv(std::string_view text);

// Columns k, mean, stderr, vtime.
std::string EnsembleToCsv(const Ensemble& ensemble);

// Throw IoError.
void WriteTextFile(const std::filesystem::path& path, std::string_view content);
std::string ReadTextFile(const std::filesystem::path& path);
std::vector<TraceRow> ReadTraceCsv(const std::filesystem::path& path);

// Sorted matches of a shell glob pattern; empty when nothing matches.
std::vector<std::string> ExpandGlob(const std::string& pattern);

}  // namespace asgd

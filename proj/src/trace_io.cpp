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

#include "asgd/trace_io.hpp"

#include <glob.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "asgd/errors.hpp"

namespace asgd {

namespace {

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::int64_t ParseInt(std::string_view text) {
  std::int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IoError("malformed integer field '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string FormatDouble(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                       std::chars_format::general, 17);
  if (ec != std::errc()) throw IoError("cannot format floating-point value");
  return std::string(buffer, ptr);
}

double ParseDouble(std::string_view text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IoError("malformed numeric field '" + std::string(text) + "'");
  }
  return value;
}

std::string TraceToCsv(const std::vector<TraceRow>& rows) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const TraceRow& r : rows) {
    out += std::to_string(r.k);
    out += ',' + FormatDouble(r.gamma);
    out += ',' + std::to_string(r.batch);
    out += ',' + FormatDouble(r.grad_norm_sq);
    out += ',' + FormatDouble(r.objective);
    out += ',' + FormatDouble(r.lyapunov);
    out += ',' + std::to_string(r.max_delay);
    out += ',' + FormatDouble(r.mean_delay);
    out += ',' + FormatDouble(r.vtime);
    out += ',' + std::to_string(r.rejections);
    out += '\n';
  }
  return out;
}

std::vector<TraceRow> TraceFromCsv(std::string_view text) {
  std::vector<TraceRow> rows;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != kTraceHeader) {
        throw IoError("trace CSV has an unexpected header: " + std::string(line));
      }
      header = false;
      continue;
    }
    const auto f = SplitFields(line);
    if (f.size() != 10) {
      throw IoError("trace CSV row has " + std::to_string(f.size()) +
                    " fields, expected 10");
    }
    TraceRow r;
    r.k = ParseInt(f[0]);
    r.gamma = ParseDouble(f[1]);
    r.batch = ParseInt(f[2]);
    r.grad_norm_sq = ParseDouble(f[3]);
    r.objective = ParseDouble(f[4]);
    r.lyapunov = ParseDouble(f[5]);
    r.max_delay = ParseInt(f[6]);
    r.mean_delay = ParseDouble(f[7]);
    r.vtime = ParseDouble(f[8]);
    r.rejections = ParseInt(f[9]);
    rows.push_back(r);
  }
  if (header) throw IoError("trace CSV is empty");
  return rows;
}

std::string EnsembleToCsv(const Ensemble& ensemble) {
  std::string out = "k,mean,stderr,vtime\n";
  for (std::size_t i = 0; i < ensemble.k.size(); ++i) {
    out += std::to_string(ensemble.k[i]);
    out += ',' + FormatDouble(ensemble.mean[i]);
    out += ',' + FormatDouble(ensemble.std_error[i]);
    out += ',' + FormatDouble(ensemble.vtime[i]);
    out += '\n';
  }
  return out;
}

void WriteTextFile(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create directory " + path.parent_path().string() +
                    ": " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return buffer.str();
}

std::vector<TraceRow> ReadTraceCsv(const std::filesystem::path& path) {
  try {
    return TraceFromCsv(ReadTextFile(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> ExpandGlob(const std::string& pattern) {
  glob_t result{};
  const int status = ::glob(pattern.c_str(), 0, nullptr, &result);
  std::vector<std::string> paths;
  if (status == 0) {
    for (std::size_t i = 0; i < result.gl_pathc; ++i) {
      paths.emplace_back(result.gl_pathv[i]);
    }
  }
  globfree(&result);
  if (status != 0 && status != GLOB_NOMATCH) {
    throw IoError("glob failed for pattern " + pattern);
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

}  // namespace asgd

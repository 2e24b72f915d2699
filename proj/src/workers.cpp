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

#include "asgd/workers.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace asgd {

namespace {

constexpr double kRateShape = 2.0;
constexpr double kRateRate = 1.0;

std::vector<std::pair<std::int64_t, std::int64_t>> ToGroups(
    const std::map<std::int64_t, std::int64_t>& counts) {
  return {counts.begin(), counts.end()};
}

}  // namespace

WorkerPool::WorkerPool(WorkerPoolOptions options, std::uint64_t seed)
    : options_(std::move(options)), rng_(Rng::ForStream(seed, Stream::kWorkers)) {
  const std::int64_t n = options_.num_workers;
  if (n < 1) throw std::invalid_argument("worker pool: need >= 1 worker");
  if (!options_.fixed_service_times.empty()) {
    if (std::ssize(options_.fixed_service_times) != n) {
      throw std::invalid_argument(
          "worker pool: one fixed service time per worker");
    }
    for (double t : options_.fixed_service_times) {
      if (!(t > 0.0)) {
        throw std::invalid_argument("worker pool: service times must be > 0");
      }
    }
  }
  rates_.resize(static_cast<std::size_t>(n));
  for (auto& rate : rates_) rate = rng_.Gamma(kRateShape, kRateRate);
  version_read_.assign(static_cast<std::size_t>(n), 0);
  read_time_.assign(static_cast<std::size_t>(n), 0.0);
}

double WorkerPool::ServiceTime(std::int64_t worker) {
  const auto w = static_cast<std::size_t>(worker);
  if (!options_.fixed_service_times.empty()) {
    return options_.fixed_service_times[w];
  }
  if (options_.redraw_rate_per_task) {
    return rng_.Exponential(rng_.Gamma(kRateShape, kRateRate));
  }
  return rng_.Exponential(rates_[w]);
}

bool WorkerPool::UsesSuperposition(std::int64_t batch) const {
  // Exact only when every service time is a fresh Exp(λ_w) with fixed λ_w:
  // the pool is then a superposition of independent Poisson processes.
  return options_.fast_path_min_batch > 0 &&
         batch >= options_.fast_path_min_batch &&
         options_.fixed_service_times.empty() && !options_.redraw_rate_per_task;
}

void WorkerPool::EnsureScheduled() {
  if (scheduled_) return;
  queue_ = {};
  for (std::int64_t w = 0; w < options_.num_workers; ++w) {
    queue_.push({now_ + ServiceTime(w), w});
  }
  scheduled_ = true;
}

AsyncRound WorkerPool::CollectAsync(std::int64_t version, std::int64_t batch,
                                    std::vector<Delivery>* log) {
  if (batch < 1) throw std::invalid_argument("worker pool: batch must be >= 1");
  if (UsesSuperposition(batch)) return CollectSuperposed(version, batch);
  return CollectEventLoop(version, batch, log);
}

AsyncRound WorkerPool::CollectEventLoop(std::int64_t version,
                                        std::int64_t batch,
                                        std::vector<Delivery>* log) {
  EnsureScheduled();
  std::map<std::int64_t, std::int64_t> counts;
  for (std::int64_t i = 1; i <= batch; ++i) {
    const Event event = queue_.top();
    queue_.pop();
    now_ = event.time;
    const auto w = static_cast<std::size_t>(event.worker);
    const std::int64_t delay = version - version_read_[w];
    ++counts[delay];
    if (log != nullptr) {
      log->push_back({event.worker, version_read_[w], delay, read_time_[w], now_});
    }
    version_read_[w] = i == batch ? version + 1 : version;
    read_time_[w] = now_;
    queue_.push({now_ + ServiceTime(event.worker), event.worker});
  }
  return {ToGroups(counts), now_};
}

AsyncRound WorkerPool::CollectSuperposed(std::int64_t version,
                                         std::int64_t batch) {
  double total_rate = 0.0;
  for (double r : rates_) total_rate += r;
  now_ += rng_.Gamma(static_cast<double>(batch), total_rate);

  // Each delivery comes from worker w with probability λ_w / Λ,
  // independently. Draw the worker completing the batch first, then the
  // other batch − 1 deliveries.
  std::size_t last = 0;
  const double u = rng_.Uniform() * total_rate;
  for (double acc = 0.0; last + 1 < rates_.size(); ++last) {
    acc += rates_[last];
    if (u < acc) break;
  }
  std::vector<std::int64_t> per_worker = rng_.Multinomial(batch - 1, rates_);
  ++per_worker[last];

  // A worker's first delivery carries its pending read; later ones in the
  // same round were read at `version` and arrive with delay 0.
  std::map<std::int64_t, std::int64_t> counts;
  for (std::size_t w = 0; w < per_worker.size(); ++w) {
    if (per_worker[w] == 0) continue;
    ++counts[version - version_read_[w]];
    if (per_worker[w] > 1) counts[0] += per_worker[w] - 1;
    version_read_[w] = w == last ? version + 1 : version;
    read_time_[w] = now_;
  }
  // Pending completion times are memoryless and are redrawn on demand.
  scheduled_ = false;
  return {ToGroups(counts), now_};
}

double WorkerPool::SyncRound(std::int64_t batch) {
  if (batch < 1) throw std::invalid_argument("worker pool: batch must be >= 1");
  const std::int64_t n = options_.num_workers;
  double slowest = 0.0;
  for (std::int64_t w = 0; w < n; ++w) {
    const std::int64_t share = batch / n + (w < batch % n ? 1 : 0);
    if (share == 0) continue;
    double total = 0.0;
    if (options_.fixed_service_times.empty() && !options_.redraw_rate_per_task) {
      // A sum of `share` Exp(λ_w) times is Gamma(share, λ_w).
      total = rng_.Gamma(static_cast<double>(share),
                         rates_[static_cast<std::size_t>(w)]);
    } else {
      for (std::int64_t t = 0; t < share; ++t) total += ServiceTime(w);
    }
    slowest = std::max(slowest, total);
  }
  now_ += slowest;
  for (std::int64_t w = 0; w < n; ++w) {
    version_read_[static_cast<std::size_t>(w)] = 0;
    read_time_[static_cast<std::size_t>(w)] = now_;
  }
  scheduled_ = false;
  return slowest;
}

}  // namespace asgd

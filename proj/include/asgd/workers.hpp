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

// Virtual-time worker pool. Each worker holds one outstanding task: it reads
// the server version, computes for an Exp(λ_w) service time, delivers, and
// immediately reads again.

#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <utility>
#include <vector>

#include "asgd/random.hpp"

namespace asgd {

struct WorkerPoolOptions {
  std::int64_t num_workers = 10;
  // Draw λ ~ Gamma(2, 1) per task instead of once per worker.
  bool redraw_rate_per_task = false;
  // Test hook: worker w always takes fixed_service_times[w].
  std::vector<double> fixed_service_times;
  // Rounds with at least this many deliveries use the superposition sampler
  // (fixed-rate exponential service only). Zero disables it.
  std::int64_t fast_path_min_batch = 256;
};

struct Delivery {
  std::int64_t worker = 0;
  std::int64_t version_read = 0;
  std::int64_t delay = 0;
  double read_time = 0.0;
  double time = 0.0;
};

struct AsyncRound {
  // (delay, count), delays ascending.
  std::vector<std::pair<std::int64_t, std::int64_t>> groups;
  // Virtual time of the last delivery of the round.
  double time = 0.0;
};

class WorkerPool {
 public:
  WorkerPool(WorkerPoolOptions options, std::uint64_t seed);

  // Collects `batch` gradients while the server sits at `version`. The
  // worker whose delivery completes the batch reads version + 1, the
  // iterate produced by the update it triggers. Appends per-delivery records
  // to `log` when given (event-loop rounds only).
  AsyncRound CollectAsync(std::int64_t version, std::int64_t batch,
                          std::vector<Delivery>* log = nullptr);

  // One synchronous round: `batch` gradients split round-robin over the
  // workers, all reading the current version. Advances the clock by the
  // slowest worker's total compute time and returns that duration.
  double SyncRound(std::int64_t batch);

  double now() const { return now_; }
  const std::vector<double>& rates() const { return rates_; }
  std::int64_t num_workers() const { return options_.num_workers; }

 private:
  struct Event {
    double time;
    std::int64_t worker;
    bool operator>(const Event& other) const {
      return time != other.time ? time > other.time : worker > other.worker;
    }
  };

  double ServiceTime(std::int64_t worker);
  bool UsesSuperposition(std::int64_t batch) const;
  void EnsureScheduled();
  AsyncRound CollectEventLoop(std::int64_t version, std::int64_t batch,
                              std::vector<Delivery>* log);
  AsyncRound CollectSuperposed(std::int64_t version, std::int64_t batch);

  WorkerPoolOptions options_;
  Rng rng_;
  std::vector<double> rates_;
  std::vector<std::int64_t> version_read_;
  std::vector<double> read_time_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  // False after a superposed round discarded the pending completion times.
  bool scheduled_ = false;
  double now_ = 0.0;
};

}  // namespace asgd

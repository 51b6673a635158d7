/* Copyright 2026 The Drivedet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef DRIVEDET_BENCH_H_
#define DRIVEDET_BENCH_H_

#include <chrono>
#include <cstddef>
#include <functional>
#include <string>
#include "absl/strings/string_view.h"
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace drivedet {

// Accumulates wall time per named stage within one iteration. Stages are kept
// in first-seen order. Not thread-safe.
class StageTimer {
 public:
  using Clock = std::chrono::steady_clock;

  class Scope {
   public:
    Scope(StageTimer* timer, absl::string_view stage);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    StageTimer* timer_;
    std::string stage_;
    Clock::time_point start_;
  };

  // Times the enclosing block when `timer` is non-null; no-op otherwise.
  static Scope Time(StageTimer* timer, absl::string_view stage) {
    return Scope(timer, stage);
  }

  void Add(absl::string_view stage, double ms);
  void Clear() { stages_.clear(); }
  const std::vector<std::pair<std::string, double>>& stages() const {
    return stages_;
  }

 private:
  std::vector<std::pair<std::string, double>> stages_;
};

struct SummaryStats {
  std::string name;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p90_ms = 0.0;
  double std_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
  std::size_t n_iterations = 0;
};

// Summary of `samples` (milliseconds). Percentiles interpolate linearly
// between order statistics; std is the sample standard deviation (0 for n=1).
SummaryStats Summarize(std::string name, const std::vector<double>& samples);

struct BenchStats {
  SummaryStats total;
  std::vector<SummaryStats> stages;
  // Raw per-iteration samples: total_ms and one column per stage.
  std::vector<double> total_samples;
  std::vector<std::vector<double>> stage_samples;
};

struct BenchOptions {
  int warmup = 10;
  int iterations = 50;
};

using BenchClosure = std::function<absl::Status(StageTimer*)>;

// Runs `closure` `warmup` times untimed, then `iterations` times timed with a
// monotonic clock. A failing run aborts with its iteration index attached.
absl::StatusOr<BenchStats> Measure(const BenchClosure& closure,
                                   const BenchOptions& options = {});

std::string BenchStatsToJson(const BenchStats& stats);
std::string RawSamplesCsv(const BenchStats& stats);

}  // namespace drivedet

#endif  // DRIVEDET_BENCH_H_

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
#include "drivedet/bench.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "absl/strings/string_view.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "nlohmann/json.hpp"

namespace drivedet {
namespace {

double Percentile(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double Millis(StageTimer::Clock::duration d) {
  return std::chrono::duration<double, std::milli>(d).count();
}

nlohmann::json StatsJson(const SummaryStats& s) {
  return {{"name", s.name},     {"mean_ms", s.mean_ms}, {"p50_ms", s.p50_ms},
          {"p90_ms", s.p90_ms}, {"std_ms", s.std_ms},   {"min_ms", s.min_ms},
          {"max_ms", s.max_ms}, {"n_iterations", s.n_iterations}};
}

}  // namespace

StageTimer::Scope::Scope(StageTimer* timer, absl::string_view stage)
    : timer_(timer) {
  if (timer_ != nullptr) {
    stage_ = std::string(stage);
    start_ = Clock::now();
  }
}

StageTimer::Scope::~Scope() {
  if (timer_ != nullptr) timer_->Add(stage_, Millis(Clock::now() - start_));
}

void StageTimer::Add(absl::string_view stage, double ms) {
  for (auto& [name, total] : stages_) {
    if (name == stage) {
      total += ms;
      return;
    }
  }
  stages_.emplace_back(std::string(stage), ms);
}

SummaryStats Summarize(std::string name, const std::vector<double>& samples) {
  SummaryStats s;
  s.name = std::move(name);
  s.n_iterations = samples.size();
  if (samples.empty()) return s;
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(samples.size());
  s.mean_ms = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  s.mean_ms = std::clamp(s.mean_ms, sorted.front(), sorted.back());
  s.p50_ms = Percentile(sorted, 0.5);
  s.p90_ms = Percentile(sorted, 0.9);
  s.min_ms = sorted.front();
  s.max_ms = sorted.back();
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double v : samples) ss += (v - s.mean_ms) * (v - s.mean_ms);
    s.std_ms = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

absl::StatusOr<BenchStats> Measure(const BenchClosure& closure,
                                   const BenchOptions& options) {
  if (options.iterations < 1) {
    return absl::InvalidArgumentError("iterations must be >= 1");
  }
  if (options.warmup < 0) {
    return absl::InvalidArgumentError("warmup must be >= 0");
  }
  StageTimer timer;
  for (int i = 0; i < options.warmup; ++i) {
    timer.Clear();
    if (absl::Status s = closure(&timer); !s.ok()) {
      return absl::Status(s.code(), absl::StrCat("warmup iteration ", i, ": ",
                                                 s.message()));
    }
  }

  BenchStats stats;
  std::vector<std::string> stage_names;
  for (int i = 0; i < options.iterations; ++i) {
    timer.Clear();
    const auto start = StageTimer::Clock::now();
    absl::Status s = closure(&timer);
    const double total = Millis(StageTimer::Clock::now() - start);
    if (!s.ok()) {
      return absl::Status(s.code(),
                          absl::StrCat("iteration ", i, ": ", s.message()));
    }
    stats.total_samples.push_back(total);
    for (const auto& [name, ms] : timer.stages()) {
      auto it = std::find(stage_names.begin(), stage_names.end(), name);
      std::size_t col = static_cast<std::size_t>(it - stage_names.begin());
      if (it == stage_names.end()) {
        stage_names.push_back(name);
        // Stages first seen late get zeros for earlier iterations.
        stats.stage_samples.emplace_back(static_cast<std::size_t>(i), 0.0);
      }
      stats.stage_samples[col].push_back(ms);
    }
    for (auto& column : stats.stage_samples) {
      column.resize(stats.total_samples.size(), 0.0);
    }
  }
  stats.total = Summarize("total", stats.total_samples);
  for (std::size_t c = 0; c < stage_names.size(); ++c) {
    stats.stages.push_back(Summarize(stage_names[c], stats.stage_samples[c]));
  }
  return stats;
}

std::string BenchStatsToJson(const BenchStats& stats) {
  nlohmann::json j;
  j["total"] = StatsJson(stats.total);
  j["stages"] = nlohmann::json::array();
  for (const auto& s : stats.stages) j["stages"].push_back(StatsJson(s));
  return j.dump(2) + "\n";
}

std::string RawSamplesCsv(const BenchStats& stats) {
  std::ostringstream out;
  out << "iteration,total_ms";
  for (const auto& s : stats.stages) out << ',' << s.name << "_ms";
  out << '\n';
  for (std::size_t i = 0; i < stats.total_samples.size(); ++i) {
    out << i << ',' << absl::StrFormat("%.6f", stats.total_samples[i]);
    for (const auto& column : stats.stage_samples) {
      out << ',' << absl::StrFormat("%.6f", column[i]);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace drivedet

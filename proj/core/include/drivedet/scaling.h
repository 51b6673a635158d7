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
#ifndef DRIVEDET_SCALING_H_
#define DRIVEDET_SCALING_H_

#include <optional>
#include <string>
#include "absl/strings/string_view.h"
#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"

namespace drivedet {

enum class Framework { kCascadeRcnnRs, kRetinaNetRs, kExternal };

absl::string_view FrameworkName(Framework f);
absl::StatusOr<Framework> ParseFramework(absl::string_view name);

// One measured (configuration, latency, accuracy) point.
struct ModelRecord {
  Framework framework = Framework::kCascadeRcnnRs;
  std::string backbone;
  int input_h = 0;  // 0 when unpublished (external entries only)
  int input_w = 0;
  std::optional<double> params_m;
  std::optional<double> flops_b;
  double latency_ms = 0.0;
  double ap_l1 = 0.0;  // percent
  double ap_l2 = 0.0;
  std::string flag;  // "", "grayed" or "leaderboard"

  std::string Label() const;  // e.g. "CRCNN-RS SN49 @1280x2176"

  friend bool operator==(const ModelRecord&, const ModelRecord&) = default;
};

inline constexpr absl::string_view kRegistryHeader =
    "framework,backbone,input_h,input_w,params_m,flops_b,latency_ms,ap_l1,"
    "ap_l2,flag";

// Parses registry CSV. Blank lines and lines starting with '#' are skipped;
// the first remaining line must be kRegistryHeader. Errors carry the 1-based
// line number.
absl::StatusOr<std::vector<ModelRecord>> ParseRegistry(absl::string_view csv);

std::string RegistryToCsv(absl::Span<const ModelRecord> records);

// The bundled measurement tables (data/paper_tables.csv).
absl::string_view BundledRegistryCsv();
absl::StatusOr<std::vector<ModelRecord>> LoadBundledRegistry();

std::vector<ModelRecord> FilterFramework(absl::Span<const ModelRecord> records,
                                         Framework framework);

// True if `a` is at least as fast and as accurate (AP/L1) as `b` and strictly
// better in one of the two.
bool Dominates(const ModelRecord& a, const ModelRecord& b);

// Records not dominated by any other, sorted by latency. Exact duplicates are
// reported once.
std::vector<ModelRecord> ParetoFrontier(absl::Span<const ModelRecord> records);

// Highest AP/L1 with latency_ms <= budget_ms; ties go to the faster record.
absl::StatusOr<ModelRecord> BestUnderLatency(
    absl::Span<const ModelRecord> records, double budget_ms);

// A model family: one framework with one backbone, scaled over resolution.
struct SeriesKey {
  Framework framework = Framework::kCascadeRcnnRs;
  std::string backbone;

  friend bool operator==(const SeriesKey&, const SeriesKey&) = default;
  friend auto operator<=>(const SeriesKey&, const SeriesKey&) = default;
};

// Accepts "BACKBONE" (Cascade RCNN-RS) or "FRAMEWORK:BACKBONE".
absl::StatusOr<SeriesKey> ParseSeriesKey(absl::string_view text);
std::string SeriesName(const SeriesKey& key);

struct DominanceFact {
  ModelRecord dominator;
  ModelRecord dominated;
};

struct LatencyMatchedGap {
  ModelRecord record;     // from series a
  ModelRecord reference;  // series b record nearest in latency
  double ap_l1_gap = 0.0; // record.ap_l1 - reference.ap_l1
};

struct ScalingComparison {
  std::vector<DominanceFact> a_dominates_b;
  std::vector<DominanceFact> b_dominates_a;
  std::vector<LatencyMatchedGap> matched_gaps;
};

// Cross-series dominance between two model families. Both must have at least
// two records. Comparing a series with itself yields no facts.
absl::StatusOr<ScalingComparison> CompareScaling(
    absl::Span<const ModelRecord> records, const SeriesKey& a,
    const SeriesKey& b);

// Records grouped by series, each sorted by latency.
std::vector<std::pair<SeriesKey, std::vector<ModelRecord>>> GroupSeries(
    absl::Span<const ModelRecord> records);

}  // namespace drivedet

#endif  // DRIVEDET_SCALING_H_

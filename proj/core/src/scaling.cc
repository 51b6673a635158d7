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
#include "drivedet/scaling.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/string_view.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"

namespace drivedet {
namespace {

std::string FormatNumber(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

absl::Status LineError(int line, absl::string_view what) {
  return absl::InvalidArgumentError(
      absl::StrFormat("registry line %d: %s", line, what));
}

// Stable order used for every reported record list.
bool RecordLess(const ModelRecord& a, const ModelRecord& b) {
  return std::forward_as_tuple(a.latency_ms, b.ap_l1, a.framework, a.backbone,
                               a.input_h, a.input_w, a.flag) <
         std::forward_as_tuple(b.latency_ms, a.ap_l1, b.framework, b.backbone,
                               b.input_h, b.input_w, b.flag);
}

absl::StatusOr<ModelRecord> ParseRow(absl::string_view row, int line) {
  std::vector<absl::string_view> f = absl::StrSplit(row, ',');
  if (f.size() != 10) {
    return LineError(line, absl::StrFormat("expected 10 fields, found %d",
                                           f.size()));
  }
  for (auto& field : f) field = absl::StripAsciiWhitespace(field);

  ModelRecord r;
  absl::StatusOr<Framework> fw = ParseFramework(f[0]);
  if (!fw.ok()) return LineError(line, fw.status().message());
  r.framework = *fw;
  r.backbone = std::string(f[1]);
  if (r.backbone.empty()) return LineError(line, "empty backbone");
  if (!absl::SimpleAtoi(f[2], &r.input_h) ||
      !absl::SimpleAtoi(f[3], &r.input_w)) {
    return LineError(line, "input_h/input_w must be integers");
  }
  auto optional_number = [&](absl::string_view s, absl::string_view name,
                             std::optional<double>* out) -> absl::Status {
    if (s.empty() || s == "-") return absl::OkStatus();
    double v = 0.0;
    if (!absl::SimpleAtod(s, &v)) {
      return LineError(line, absl::StrCat(name, " is not a number: '", s, "'"));
    }
    *out = v;
    return absl::OkStatus();
  };
  if (absl::Status s = optional_number(f[4], "params_m", &r.params_m); !s.ok()) {
    return s;
  }
  if (absl::Status s = optional_number(f[5], "flops_b", &r.flops_b); !s.ok()) {
    return s;
  }
  if (!absl::SimpleAtod(f[6], &r.latency_ms) ||
      !absl::SimpleAtod(f[7], &r.ap_l1) || !absl::SimpleAtod(f[8], &r.ap_l2)) {
    return LineError(line, "latency_ms, ap_l1 and ap_l2 must be numbers");
  }
  r.flag = std::string(f[9]);

  if (!(r.latency_ms > 0.0) || !std::isfinite(r.latency_ms)) {
    return LineError(line, "latency_ms must be positive");
  }
  if (!(r.ap_l1 >= 0.0 && r.ap_l1 <= 100.0 && r.ap_l2 >= 0.0 &&
        r.ap_l2 <= 100.0)) {
    return LineError(line, "AP values must be in [0, 100]");
  }
  const bool unknown_res = r.input_h == 0 && r.input_w == 0;
  if (!(r.input_h > 0 && r.input_w > 0) &&
      !(unknown_res && r.framework == Framework::kExternal)) {
    return LineError(line, "input resolution must be positive");
  }
  return r;
}

}  // namespace

absl::string_view FrameworkName(Framework f) {
  switch (f) {
    case Framework::kCascadeRcnnRs:
      return "CRCNN-RS";
    case Framework::kRetinaNetRs:
      return "RetinaNet-RS";
    case Framework::kExternal:
      return "external";
  }
  return "unknown";
}

absl::StatusOr<Framework> ParseFramework(absl::string_view name) {
  const std::string lower = absl::AsciiStrToLower(name);
  if (lower == "crcnn-rs" || lower == "crcnn_rs" || lower == "crcnn") {
    return Framework::kCascadeRcnnRs;
  }
  if (lower == "retinanet-rs" || lower == "retinanet_rs" ||
      lower == "retinanet") {
    return Framework::kRetinaNetRs;
  }
  if (lower == "external") return Framework::kExternal;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown framework '", name, "'"));
}

std::string ModelRecord::Label() const {
  if (input_h <= 0) return absl::StrCat(FrameworkName(framework), " ", backbone);
  return absl::StrCat(FrameworkName(framework), " ", backbone, " @", input_h,
                      "x", input_w);
}

absl::StatusOr<std::vector<ModelRecord>> ParseRegistry(absl::string_view csv) {
  std::vector<ModelRecord> records;
  bool seen_header = false;
  int line = 0;
  for (absl::string_view raw : absl::StrSplit(csv, '\n')) {
    ++line;
    absl::string_view row = absl::StripAsciiWhitespace(raw);
    if (row.empty() || row.front() == '#') continue;
    if (!seen_header) {
      if (row != kRegistryHeader) {
        return LineError(line, absl::StrCat("expected header '",
                                            kRegistryHeader, "'"));
      }
      seen_header = true;
      continue;
    }
    absl::StatusOr<ModelRecord> r = ParseRow(row, line);
    if (!r.ok()) return r.status();
    records.push_back(*std::move(r));
  }
  if (!seen_header) return LineError(line, "missing header");
  return records;
}

std::string RegistryToCsv(absl::Span<const ModelRecord> records) {
  std::string out = absl::StrCat(kRegistryHeader, "\n");
  for (const auto& r : records) {
    absl::StrAppend(&out, FrameworkName(r.framework), ",", r.backbone, ",",
                    r.input_h, ",", r.input_w, ",",
                    r.params_m ? FormatNumber(*r.params_m) : "", ",",
                    r.flops_b ? FormatNumber(*r.flops_b) : "", ",",
                    FormatNumber(r.latency_ms), ",", FormatNumber(r.ap_l1),
                    ",", FormatNumber(r.ap_l2), ",", r.flag, "\n");
  }
  return out;
}

absl::StatusOr<std::vector<ModelRecord>> LoadBundledRegistry() {
  return ParseRegistry(BundledRegistryCsv());
}

std::vector<ModelRecord> FilterFramework(absl::Span<const ModelRecord> records,
                                         Framework framework) {
  std::vector<ModelRecord> out;
  for (const auto& r : records) {
    if (r.framework == framework) out.push_back(r);
  }
  return out;
}

bool Dominates(const ModelRecord& a, const ModelRecord& b) {
  return a.latency_ms <= b.latency_ms && a.ap_l1 >= b.ap_l1 &&
         (a.latency_ms < b.latency_ms || a.ap_l1 > b.ap_l1);
}

std::vector<ModelRecord> ParetoFrontier(absl::Span<const ModelRecord> records) {
  std::vector<ModelRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(), RecordLess);
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  // Sweep by increasing latency (decreasing AP within equal latency). A record
  // survives if no faster-or-equal record has AP at least as high, except for
  // exact (latency, AP) ties which do not dominate each other.
  std::vector<ModelRecord> frontier;
  double best_ap = -std::numeric_limits<double>::infinity();
  double best_latency = 0.0;
  for (const auto& r : sorted) {
    if (r.ap_l1 > best_ap) {
      best_ap = r.ap_l1;
      best_latency = r.latency_ms;
      frontier.push_back(r);
    } else if (r.ap_l1 == best_ap && r.latency_ms == best_latency) {
      frontier.push_back(r);
    }
  }
  return frontier;
}

absl::StatusOr<ModelRecord> BestUnderLatency(
    absl::Span<const ModelRecord> records, double budget_ms) {
  const ModelRecord* best = nullptr;
  for (const auto& r : records) {
    if (r.latency_ms > budget_ms) continue;
    if (best == nullptr || r.ap_l1 > best->ap_l1 ||
        (r.ap_l1 == best->ap_l1 && r.latency_ms < best->latency_ms)) {
      best = &r;
    }
  }
  if (best == nullptr) {
    return absl::NotFoundError(absl::StrFormat(
        "no model runs within %g ms/frame", budget_ms));
  }
  return *best;
}

absl::StatusOr<SeriesKey> ParseSeriesKey(absl::string_view text) {
  SeriesKey key;
  const std::size_t colon = text.find(':');
  if (colon == absl::string_view::npos) {
    key.backbone = std::string(absl::StripAsciiWhitespace(text));
  } else {
    absl::StatusOr<Framework> fw = ParseFramework(
        absl::StripAsciiWhitespace(text.substr(0, colon)));
    if (!fw.ok()) return fw.status();
    key.framework = *fw;
    key.backbone =
        std::string(absl::StripAsciiWhitespace(text.substr(colon + 1)));
  }
  if (key.backbone.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("empty backbone in series '", text, "'"));
  }
  return key;
}

std::string SeriesName(const SeriesKey& key) {
  return absl::StrCat(FrameworkName(key.framework), ":", key.backbone);
}

std::vector<std::pair<SeriesKey, std::vector<ModelRecord>>> GroupSeries(
    absl::Span<const ModelRecord> records) {
  std::map<SeriesKey, std::vector<ModelRecord>> groups;
  for (const auto& r : records) {
    groups[SeriesKey{r.framework, r.backbone}].push_back(r);
  }
  std::vector<std::pair<SeriesKey, std::vector<ModelRecord>>> out;
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end(), RecordLess);
    out.emplace_back(key, std::move(members));
  }
  return out;
}

absl::StatusOr<ScalingComparison> CompareScaling(
    absl::Span<const ModelRecord> records, const SeriesKey& a,
    const SeriesKey& b) {
  std::vector<ModelRecord> sa;
  std::vector<ModelRecord> sb;
  for (const auto& r : records) {
    const SeriesKey key{r.framework, r.backbone};
    if (key == a) sa.push_back(r);
    if (key == b) sb.push_back(r);
  }
  for (const auto* s : {&a, &b}) {
    const auto& members = s == &a ? sa : sb;
    if (members.empty()) {
      return absl::NotFoundError(
          absl::StrCat("unknown series '", SeriesName(*s), "'"));
    }
    if (members.size() < 2) {
      return absl::FailedPreconditionError(absl::StrCat(
          "series '", SeriesName(*s), "' needs at least two resolutions"));
    }
  }
  ScalingComparison out;
  if (a == b) return out;
  std::sort(sa.begin(), sa.end(), RecordLess);
  std::sort(sb.begin(), sb.end(), RecordLess);
  for (const auto& ra : sa) {
    for (const auto& rb : sb) {
      if (Dominates(ra, rb)) out.a_dominates_b.push_back({ra, rb});
      if (Dominates(rb, ra)) out.b_dominates_a.push_back({rb, ra});
    }
  }
  for (const auto& ra : sa) {
    const ModelRecord* nearest = nullptr;
    for (const auto& rb : sb) {
      if (nearest == nullptr ||
          std::fabs(rb.latency_ms - ra.latency_ms) <
              std::fabs(nearest->latency_ms - ra.latency_ms)) {
        nearest = &rb;
      }
    }
    out.matched_gaps.push_back({ra, *nearest, ra.ap_l1 - nearest->ap_l1});
  }
  return out;
}

}  // namespace drivedet

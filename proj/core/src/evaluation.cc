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
#include "drivedet/evaluation.h"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>

#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "drivedet/box.h"

namespace drivedet {
namespace {

bool Counted(const GroundTruth& gt, DifficultyFilter filter) {
  return filter == DifficultyFilter::kLevel2 ||
         gt.difficulty == Difficulty::kLevel1;
}

// Visit order shared by matching and AP accumulation.
std::vector<std::size_t> DetectionOrder(absl::Span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    if (dets[a].frame_id != dets[b].frame_id) {
      return dets[a].frame_id < dets[b].frame_id;
    }
    return a < b;
  });
  return order;
}

double ClassAp(absl::Span<const Detection> dets,
               absl::Span<const GroundTruth> gts, double iou_threshold,
               DifficultyFilter filter, int recall_points, std::size_t* tp,
               std::size_t* num_gt) {
  const MatchResult m = MatchDetections(dets, gts, iou_threshold, filter);
  std::vector<ScoredLabel> labels;
  labels.reserve(dets.size());
  *tp = 0;
  for (std::size_t i : DetectionOrder(dets)) {
    if (m.labels[i] == DetectionLabel::kIgnored) continue;
    const bool is_tp = m.labels[i] == DetectionLabel::kTruePositive;
    *tp += is_tp ? 1 : 0;
    labels.push_back(ScoredLabel{dets[i].score, is_tp});
  }
  *num_gt = m.num_counted_gt;
  return AveragePrecision(labels, m.num_counted_gt, recall_points);
}

}  // namespace

MatchResult MatchDetections(absl::Span<const Detection> dets,
                            absl::Span<const GroundTruth> gts,
                            double iou_threshold, DifficultyFilter filter) {
  MatchResult out;
  out.labels.assign(dets.size(), DetectionLabel::kFalsePositive);
  out.matched_gt.assign(dets.size(), -1);
  out.gt_matched.assign(gts.size(), false);

  std::unordered_map<std::string_view, std::vector<std::size_t>> gts_by_frame;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    gts_by_frame[gts[g].frame_id].push_back(g);
    if (Counted(gts[g], filter)) ++out.num_counted_gt;
  }

  for (std::size_t d : DetectionOrder(dets)) {
    auto it = gts_by_frame.find(dets[d].frame_id);
    if (it == gts_by_frame.end()) continue;
    int best_counted = -1;
    double best_counted_iou = -1.0;
    int best_ignored = -1;
    double best_ignored_iou = -1.0;
    for (std::size_t g : it->second) {
      if (out.gt_matched[g]) continue;
      const double v = Iou(dets[d].box, gts[g].box);
      if (v < iou_threshold) continue;
      if (Counted(gts[g], filter)) {
        if (v > best_counted_iou) {
          best_counted_iou = v;
          best_counted = static_cast<int>(g);
        }
      } else if (v > best_ignored_iou) {
        best_ignored_iou = v;
        best_ignored = static_cast<int>(g);
      }
    }
    if (best_counted >= 0) {
      out.labels[d] = DetectionLabel::kTruePositive;
      out.matched_gt[d] = best_counted;
      out.gt_matched[static_cast<std::size_t>(best_counted)] = true;
    } else if (best_ignored >= 0) {
      out.labels[d] = DetectionLabel::kIgnored;
      out.matched_gt[d] = best_ignored;
      out.gt_matched[static_cast<std::size_t>(best_ignored)] = true;
    }
  }
  return out;
}

double AveragePrecision(absl::Span<const ScoredLabel> labels,
                        std::size_t num_gt, int recall_points) {
  if (num_gt == 0 || labels.empty()) return 0.0;
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return labels[a].score > labels[b].score;
                   });

  const std::size_t n = labels.size();
  std::vector<std::size_t> cum_tp(n);
  std::vector<double> envelope(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tp += labels[order[k]].true_positive ? 1 : 0;
    cum_tp[k] = tp;
    envelope[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  for (std::size_t k = n - 1; k > 0; --k) {
    envelope[k - 1] = std::max(envelope[k - 1], envelope[k]);
  }

  if (recall_points == 0) {
    double area = 0.0;
    std::size_t prev = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (cum_tp[k] > prev) {
        area += envelope[k] * static_cast<double>(cum_tp[k] - prev);
        prev = cum_tp[k];
      }
    }
    return area / static_cast<double>(num_gt);
  }

  // Recall point i is reached at rank k when cum_tp[k] / num_gt >= i / (R-1);
  // compared in integers to avoid rounding at the sample boundaries.
  const std::size_t steps = static_cast<std::size_t>(recall_points - 1);
  double sum = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i <= steps; ++i) {
    while (k < n && cum_tp[k] * steps < i * num_gt) ++k;
    if (k == n) break;
    sum += envelope[k];
  }
  return sum / static_cast<double>(recall_points);
}

absl::Status EvalConfig::Validate() const {
  if (recall_points != 0 && recall_points < 2) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "recall_points must be >= 2 (or 0 for exact area), got %d",
        recall_points));
  }
  for (const auto& [class_id, t] : iou_thresholds) {
    if (!(t > 0.0 && t <= 1.0)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "IoU threshold for class %d must be in (0, 1], got %g", class_id,
          t));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<EvalResult> Evaluate(absl::Span<const Detection> dets,
                                    absl::Span<const GroundTruth> gts,
                                    const EvalConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  std::set<int> unknown;
  for (const auto& d : dets) {
    if (!config.iou_thresholds.contains(d.class_id)) unknown.insert(d.class_id);
  }
  for (const auto& g : gts) {
    if (!config.iou_thresholds.contains(g.class_id)) unknown.insert(g.class_id);
  }
  if (!unknown.empty()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("unknown class ids: %s", absl::StrJoin(unknown, ", ")));
  }

  std::map<int, std::vector<Detection>> dets_by_class;
  std::map<int, std::vector<GroundTruth>> gts_by_class;
  for (const auto& d : dets) dets_by_class[d.class_id].push_back(d);
  for (const auto& g : gts) gts_by_class[g.class_id].push_back(g);

  EvalResult result;
  double sum_l1 = 0.0;
  double sum_l2 = 0.0;
  int classes_l1 = 0;
  int classes_l2 = 0;
  for (const auto& [class_id, threshold] : config.iou_thresholds) {
    const std::vector<Detection>& cd = dets_by_class[class_id];
    const std::vector<GroundTruth>& cg = gts_by_class[class_id];
    if (cd.empty() && cg.empty()) continue;
    ClassResult cr;
    cr.num_detections = cd.size();
    cr.ap_l1 = ClassAp(cd, cg, threshold, DifficultyFilter::kLevel1,
                       config.recall_points, &cr.tp_l1, &cr.num_gt_l1);
    cr.ap_l2 = ClassAp(cd, cg, threshold, DifficultyFilter::kLevel2,
                       config.recall_points, &cr.tp_l2, &cr.num_gt_l2);
    if (cr.num_gt_l1 > 0) {
      sum_l1 += cr.ap_l1;
      ++classes_l1;
    }
    if (cr.num_gt_l2 > 0) {
      sum_l2 += cr.ap_l2;
      ++classes_l2;
    }
    result.per_class[class_id] = cr;
  }
  if (classes_l1 > 0) result.ap_l1 = sum_l1 / classes_l1;
  if (classes_l2 > 0) result.ap_l2 = sum_l2 / classes_l2;
  return result;
}

}  // namespace drivedet

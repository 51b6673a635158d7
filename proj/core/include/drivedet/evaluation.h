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
#ifndef DRIVEDET_EVALUATION_H_
#define DRIVEDET_EVALUATION_H_

#include <cstddef>
#include <map>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "drivedet/scene.h"

namespace drivedet {

// Which ground truths count. kLevel1 counts only L1 objects and treats L2
// objects as ignore regions; kLevel2 counts every object.
enum class DifficultyFilter { kLevel1, kLevel2 };

enum class DetectionLabel { kTruePositive, kFalsePositive, kIgnored };

struct MatchResult {
  // Aligned with the input detections.
  std::vector<DetectionLabel> labels;
  std::vector<int> matched_gt;  // index into the gts span or -1
  // Aligned with the input ground truths.
  std::vector<bool> gt_matched;
  std::size_t num_counted_gt = 0;
};

// Greedy matching within one class (callers pre-filter by class). Detections
// are visited by descending score, ties by frame id then input position. Each
// detection takes the highest-IoU unmatched counted ground truth of its frame
// with IoU >= iou_threshold; failing that, an unmatched ignored ground truth
// above threshold absorbs it (label kIgnored); otherwise it is a false
// positive.
MatchResult MatchDetections(absl::Span<const Detection> dets,
                            absl::Span<const GroundTruth> gts,
                            double iou_threshold, DifficultyFilter filter);

struct ScoredLabel {
  double score = 0.0;
  bool true_positive = false;
};

// Interpolated average precision. With recall_points R >= 2, averages the
// precision envelope sampled at recall i / (R - 1), i = 0..R-1. With R == 0,
// integrates the envelope exactly over the recall steps. Ignored detections
// must be excluded by the caller. Ties in score are ordered by input position.
double AveragePrecision(absl::Span<const ScoredLabel> labels,
                        std::size_t num_gt, int recall_points = 101);

struct EvalConfig {
  // Matching IoU per class; defaults: vehicle 0.7, pedestrian 0.5, cyclist 0.5.
  std::map<int, double> iou_thresholds = {
      {kVehicle, 0.7}, {kPedestrian, 0.5}, {kCyclist, 0.5}};
  // 101-point interpolation by default; 0 selects exact envelope area.
  int recall_points = 101;

  absl::Status Validate() const;

  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

struct ClassResult {
  double ap_l1 = 0.0;
  double ap_l2 = 0.0;
  std::size_t num_gt_l1 = 0;
  std::size_t num_gt_l2 = 0;  // all objects of the class
  std::size_t num_detections = 0;
  std::size_t tp_l1 = 0;
  std::size_t tp_l2 = 0;
};

struct EvalResult {
  // Macro means over classes with at least one counted ground truth.
  double ap_l1 = 0.0;
  double ap_l2 = 0.0;
  std::map<int, ClassResult> per_class;
};

// Per-class AP under both difficulty filters. Fails if a detection or ground
// truth names a class without a configured IoU threshold.
absl::StatusOr<EvalResult> Evaluate(absl::Span<const Detection> dets,
                                    absl::Span<const GroundTruth> gts,
                                    const EvalConfig& config = {});

}  // namespace drivedet

#endif  // DRIVEDET_EVALUATION_H_

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
#ifndef DRIVEDET_MATCHING_H_
#define DRIVEDET_MATCHING_H_

#include <cstddef>
#include <vector>

#include "absl/status/status.h"
#include "absl/types/span.h"
#include "drivedet/box.h"

namespace drivedet {

inline constexpr int kBackground = -1;

// Per-proposal result of IoU assignment against ground truth.
struct Assignment {
  std::vector<int> matched_gt;  // ground-truth index or kBackground
  std::vector<double> max_iou;

  std::size_t NumForeground() const;
};

// Foreground IoU threshold of each cascade stage, strictly increasing.
struct CascadeConfig {
  std::vector<double> stage_fg_thresholds = {0.5, 0.6, 0.7};

  int NumStages() const { return static_cast<int>(stage_fg_thresholds.size()); }
  absl::Status Validate() const;

  friend bool operator==(const CascadeConfig&, const CascadeConfig&) = default;
};

// Matches every proposal to its highest-IoU ground truth (ties go to the lower
// index). A proposal is foreground iff that IoU is >= fg_threshold.
Assignment Assign(absl::Span<const Box> proposals, absl::Span<const Box> gts,
                  double fg_threshold);

struct StageQuality {
  // Mean best-IoU over proposals that overlap some ground truth; 0 when none.
  double mean_matched_iou = 0.0;
  std::size_t matched_count = 0;
  std::size_t num_proposals = 0;
  // Fraction of proposals with best IoU >= each cascade threshold.
  std::vector<double> fg_fraction;
};

StageQuality ComputeStageQuality(absl::Span<const Box> proposals,
                                 absl::Span<const Box> gts,
                                 const CascadeConfig& cascade = {});

}  // namespace drivedet

#endif  // DRIVEDET_MATCHING_H_

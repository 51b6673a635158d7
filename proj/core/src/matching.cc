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
#include "drivedet/matching.h"

#include <algorithm>

#include "absl/strings/str_format.h"

namespace drivedet {

std::size_t Assignment::NumForeground() const {
  return static_cast<std::size_t>(
      std::count_if(matched_gt.begin(), matched_gt.end(),
                    [](int m) { return m != kBackground; }));
}

absl::Status CascadeConfig::Validate() const {
  if (stage_fg_thresholds.empty()) {
    return absl::InvalidArgumentError("cascade needs at least one stage");
  }
  for (std::size_t i = 0; i < stage_fg_thresholds.size(); ++i) {
    const double t = stage_fg_thresholds[i];
    if (!(t > 0.0 && t < 1.0)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "stage %d foreground threshold %g outside (0, 1)", i + 1, t));
    }
    if (i > 0 && !(t > stage_fg_thresholds[i - 1])) {
      return absl::InvalidArgumentError(
          "stage foreground thresholds must be strictly increasing");
    }
  }
  return absl::OkStatus();
}

Assignment Assign(absl::Span<const Box> proposals, absl::Span<const Box> gts,
                  double fg_threshold) {
  Assignment out;
  out.matched_gt.assign(proposals.size(), kBackground);
  out.max_iou.assign(proposals.size(), 0.0);
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    int best = kBackground;
    double best_iou = 0.0;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      const double v = Iou(proposals[i], gts[j]);
      if (v > best_iou) {
        best_iou = v;
        best = static_cast<int>(j);
      }
    }
    out.max_iou[i] = best_iou;
    if (best != kBackground && best_iou >= fg_threshold) {
      out.matched_gt[i] = best;
    }
  }
  return out;
}

StageQuality ComputeStageQuality(absl::Span<const Box> proposals,
                                 absl::Span<const Box> gts,
                                 const CascadeConfig& cascade) {
  StageQuality q;
  q.num_proposals = proposals.size();
  q.fg_fraction.assign(cascade.stage_fg_thresholds.size(), 0.0);
  // Any threshold in (0, 1) yields the same max_iou vector.
  const Assignment a = Assign(proposals, gts, 0.5);
  double sum = 0.0;
  for (double v : a.max_iou) {
    if (v > 0.0) {
      sum += v;
      ++q.matched_count;
    }
    for (std::size_t s = 0; s < cascade.stage_fg_thresholds.size(); ++s) {
      if (v >= cascade.stage_fg_thresholds[s]) q.fg_fraction[s] += 1.0;
    }
  }
  if (q.matched_count > 0) q.mean_matched_iou = sum / q.matched_count;
  if (!proposals.empty()) {
    for (double& f : q.fg_fraction) f /= static_cast<double>(proposals.size());
  }
  return q;
}

}  // namespace drivedet

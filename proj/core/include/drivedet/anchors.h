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
#ifndef DRIVEDET_ANCHORS_H_
#define DRIVEDET_ANCHORS_H_

#include <cstddef>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "drivedet/box.h"

namespace drivedet {

inline constexpr int kMinPyramidLevel = 2;
inline constexpr int kMaxPyramidLevel = 7;

// Anchor shapes tiled at every feature-map location. Aspect ratio is
// height / width. The anchor base edge at level l is
// base_size_multiplier * 2^l * octave_scale.
struct AnchorSpec {
  std::vector<double> aspect_ratios = {0.5, 1.0, 2.0};
  std::vector<double> octave_scales = {1.0};
  double base_size_multiplier = 4.0;

  std::size_t AnchorsPerLocation() const {
    return aspect_ratios.size() * octave_scales.size();
  }
  absl::Status Validate() const;

  // 3 aspects x 1 octave, used for region proposals.
  static AnchorSpec RegionProposal();
  // 3 aspects x 3 octaves {2^0, 2^(1/3), 2^(2/3)}, used by the one-stage path.
  static AnchorSpec OneStage();

  friend bool operator==(const AnchorSpec&, const AnchorSpec&) = default;
};

struct AnchorLevel {
  int level = 0;
  double stride = 0.0;
  int grid_h = 0;
  int grid_w = 0;
  // Row-major over (row, col), then octave scale, then aspect ratio.
  std::vector<Box> anchors;

  std::size_t Positions() const {
    return static_cast<std::size_t>(grid_h) * static_cast<std::size_t>(grid_w);
  }
};

struct AnchorPyramid {
  std::vector<AnchorLevel> levels;
  std::size_t anchors_per_location = 0;

  std::size_t TotalAnchors() const;
  std::size_t TotalPositions() const;
};

// One anchor grid per level in [min_level, max_level]. Anchors are centered at
// ((i + 0.5) * stride, (j + 0.5) * stride) and are not clipped to the image.
absl::StatusOr<AnchorPyramid> GeneratePyramid(int image_h, int image_w,
                                              int min_level, int max_level,
                                              const AnchorSpec& spec);

absl::Status ValidateLevelRange(int min_level, int max_level);

// Pyramid level whose base anchor edge best matches the box scale:
// floor(log2(sqrt(area) / base_size_multiplier)) clamped to the level range.
absl::StatusOr<int> LevelOfBox(const Box& box, int min_level, int max_level,
                               double base_size_multiplier = 4.0);

}  // namespace drivedet

#endif  // DRIVEDET_ANCHORS_H_

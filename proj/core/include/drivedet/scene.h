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
#ifndef DRIVEDET_SCENE_H_
#define DRIVEDET_SCENE_H_

#include <array>
#include <string>
#include "absl/strings/string_view.h"
#include <vector>

#include "absl/status/statusor.h"
#include "drivedet/box.h"

namespace drivedet {

// Object taxonomy of the driving scenes. Class ids index classifier outputs.
inline constexpr int kVehicle = 0;
inline constexpr int kPedestrian = 1;
inline constexpr int kCyclist = 2;
inline constexpr int kNumClasses = 3;

inline constexpr std::array<absl::string_view, kNumClasses> kClassNames = {
    "vehicle", "pedestrian", "cyclist"};

inline bool IsKnownClass(int class_id) {
  return class_id >= 0 && class_id < kNumClasses;
}

// Difficulty bucket. Level 2 objects are excluded from (ignored by) AP/L1 and
// counted by AP/L2.
enum class Difficulty { kLevel1, kLevel2 };

absl::string_view DifficultyName(Difficulty d);
absl::StatusOr<Difficulty> ParseDifficulty(absl::string_view name);

struct GroundTruth {
  std::string frame_id;
  Box box;
  int class_id = kVehicle;
  Difficulty difficulty = Difficulty::kLevel1;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Detection {
  std::string frame_id;
  Box box;
  int class_id = kVehicle;
  double score = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct Frame {
  std::string frame_id;
  int height = 0;
  int width = 0;
  std::vector<GroundTruth> gts;

  ImageSize Size() const {
    return {static_cast<double>(height), static_cast<double>(width)};
  }
  std::vector<Box> GtBoxes() const;

  friend bool operator==(const Frame&, const Frame&) = default;
};

std::vector<GroundTruth> FlattenGroundTruth(const std::vector<Frame>& frames);

}  // namespace drivedet

#endif  // DRIVEDET_SCENE_H_

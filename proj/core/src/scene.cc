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
#include "drivedet/scene.h"

#include "absl/status/status.h"
#include "absl/strings/string_view.h"
#include "absl/strings/str_cat.h"

namespace drivedet {

absl::string_view DifficultyName(Difficulty d) {
  return d == Difficulty::kLevel1 ? "L1" : "L2";
}

absl::StatusOr<Difficulty> ParseDifficulty(absl::string_view name) {
  if (name == "L1" || name == "LEVEL_1") return Difficulty::kLevel1;
  if (name == "L2" || name == "LEVEL_2") return Difficulty::kLevel2;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown difficulty '", name, "' (expected L1 or L2)"));
}

std::vector<Box> Frame::GtBoxes() const {
  std::vector<Box> out;
  out.reserve(gts.size());
  for (const auto& g : gts) out.push_back(g.box);
  return out;
}

std::vector<GroundTruth> FlattenGroundTruth(const std::vector<Frame>& frames) {
  std::vector<GroundTruth> out;
  for (const auto& f : frames) {
    out.insert(out.end(), f.gts.begin(), f.gts.end());
  }
  return out;
}

}  // namespace drivedet

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
#include "drivedet/anchors.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_format.h"

namespace drivedet {

absl::Status AnchorSpec::Validate() const {
  if (aspect_ratios.empty() || octave_scales.empty()) {
    return absl::InvalidArgumentError(
        "anchor spec needs at least one aspect ratio and one octave scale");
  }
  for (double a : aspect_ratios) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("aspect ratio must be positive, got %g", a));
    }
  }
  for (double s : octave_scales) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("octave scale must be positive, got %g", s));
    }
  }
  if (!(base_size_multiplier > 0.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "base_size_multiplier must be positive, got %g", base_size_multiplier));
  }
  return absl::OkStatus();
}

AnchorSpec AnchorSpec::RegionProposal() { return AnchorSpec{}; }

AnchorSpec AnchorSpec::OneStage() {
  AnchorSpec spec;
  spec.octave_scales = {1.0, std::exp2(1.0 / 3.0), std::exp2(2.0 / 3.0)};
  return spec;
}

std::size_t AnchorPyramid::TotalAnchors() const {
  std::size_t n = 0;
  for (const auto& l : levels) n += l.anchors.size();
  return n;
}

std::size_t AnchorPyramid::TotalPositions() const {
  std::size_t n = 0;
  for (const auto& l : levels) n += l.Positions();
  return n;
}

absl::Status ValidateLevelRange(int min_level, int max_level) {
  if (min_level < kMinPyramidLevel || max_level > kMaxPyramidLevel ||
      min_level > max_level) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "invalid pyramid level range L%d-L%d (need %d <= min <= max <= %d)",
        min_level, max_level, kMinPyramidLevel, kMaxPyramidLevel));
  }
  return absl::OkStatus();
}

absl::StatusOr<AnchorPyramid> GeneratePyramid(int image_h, int image_w,
                                              int min_level, int max_level,
                                              const AnchorSpec& spec) {
  if (absl::Status s = ValidateLevelRange(min_level, max_level); !s.ok()) {
    return s;
  }
  if (image_h <= 0 || image_w <= 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("image size must be positive, got %dx%d", image_h,
                        image_w));
  }
  if (absl::Status s = spec.Validate(); !s.ok()) return s;

  // Half extents for each (octave, aspect) in stride units.
  struct Shape {
    double half_h;
    double half_w;
  };
  std::vector<Shape> shapes;
  for (double octave : spec.octave_scales) {
    for (double aspect : spec.aspect_ratios) {
      const double edge = spec.base_size_multiplier * octave;
      const double root = std::sqrt(aspect);
      shapes.push_back({0.5 * edge * root, 0.5 * edge / root});
    }
  }

  AnchorPyramid pyramid;
  pyramid.anchors_per_location = shapes.size();
  for (int level = min_level; level <= max_level; ++level) {
    const int stride = 1 << level;
    AnchorLevel out;
    out.level = level;
    out.stride = stride;
    out.grid_h = (image_h + stride - 1) / stride;
    out.grid_w = (image_w + stride - 1) / stride;
    out.anchors.reserve(out.Positions() * shapes.size());
    for (int i = 0; i < out.grid_h; ++i) {
      const double cy = (i + 0.5) * stride;
      for (int j = 0; j < out.grid_w; ++j) {
        const double cx = (j + 0.5) * stride;
        for (const Shape& s : shapes) {
          const double hh = s.half_h * stride;
          const double hw = s.half_w * stride;
          out.anchors.push_back(Box{cy - hh, cx - hw, cy + hh, cx + hw});
        }
      }
    }
    pyramid.levels.push_back(std::move(out));
  }
  return pyramid;
}

absl::StatusOr<int> LevelOfBox(const Box& box, int min_level, int max_level,
                               double base_size_multiplier) {
  if (absl::Status s = ValidateLevelRange(min_level, max_level); !s.ok()) {
    return s;
  }
  if (!(box.Area() > 0.0)) {
    return absl::InvalidArgumentError("cannot assign a level to a zero-area box");
  }
  const double scale = std::sqrt(box.Area()) / base_size_multiplier;
  const int level = static_cast<int>(std::floor(std::log2(scale)));
  return std::clamp(level, min_level, max_level);
}

}  // namespace drivedet

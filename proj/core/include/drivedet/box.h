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
#ifndef DRIVEDET_BOX_H_
#define DRIVEDET_BOX_H_

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"

namespace drivedet {

// Axis-aligned box in pixel coordinates, corner order (ymin, xmin, ymax, xmax).
// Coordinates are continuous; there is no +1 pixel convention.
struct Box {
  double ymin = 0.0;
  double xmin = 0.0;
  double ymax = 0.0;
  double xmax = 0.0;

  double Height() const { return ymax - ymin; }
  double Width() const { return xmax - xmin; }
  double Area() const { return Height() * Width(); }
  double CenterY() const { return ymin + 0.5 * Height(); }
  double CenterX() const { return xmin + 0.5 * Width(); }
  bool IsValid() const { return ymax >= ymin && xmax >= xmin; }

  friend bool operator==(const Box&, const Box&) = default;
};

// Anchor-relative regression target: center offsets normalized by the anchor
// size and log size ratios.
struct BoxDelta {
  double ty = 0.0;
  double tx = 0.0;
  double th = 0.0;
  double tw = 0.0;

  friend bool operator==(const BoxDelta&, const BoxDelta&) = default;
};

struct ImageSize {
  double height = 0.0;
  double width = 0.0;
};

// Upper bound applied to th/tw before exponentiation in Decode.
inline const double kMaxLogScale = std::log(1000.0 / 16.0);

// Intersection-over-union. Returns 0 (never NaN) when the union is empty.
double Iou(const Box& a, const Box& b);

// Dense row-major |rows| x |cols| matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t r, std::size_t c) const {
    return values[r * cols + c];
  }
};

Matrix IouMatrix(absl::Span<const Box> a, absl::Span<const Box> b);

Box Clip(const Box& box, const ImageSize& image);

// Fails with InvalidArgument when either box has non-positive height or width.
absl::StatusOr<BoxDelta> Encode(const Box& target, const Box& anchor);

// Rounding hook applied at every intermediate of Decode. nullptr means exact
// working-precision arithmetic. See half.h for the binary16 rounding used by
// emulated half-precision inference.
using RoundingFn = double (*)(double);

// Inverse of Encode. th/tw are clamped to kMaxLogScale. When `clip_to` is set
// the result is clipped into [0, height] x [0, width].
Box Decode(const BoxDelta& delta, const Box& anchor,
           const std::optional<ImageSize>& clip_to = std::nullopt,
           RoundingFn round = nullptr);

}  // namespace drivedet

#endif  // DRIVEDET_BOX_H_

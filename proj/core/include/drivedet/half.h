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
#ifndef DRIVEDET_HALF_H_
#define DRIVEDET_HALF_H_

#include <functional>
#include <optional>
#include "absl/strings/string_view.h"

#include "absl/status/statusor.h"
#include "drivedet/box.h"

namespace drivedet {

// Rounds `x` to the nearest IEEE 754 binary16 value (ties to even) and widens
// it back to double. Handles subnormals; magnitudes that round past 65504
// become infinity. NaN is returned unchanged.
double RoundF16(double x);

inline constexpr double kF16Max = 65504.0;

enum class PrecisionMode { kFull, kHalfEmulated };

absl::string_view PrecisionModeName(PrecisionMode mode);
absl::StatusOr<PrecisionMode> ParsePrecisionMode(absl::string_view name);

// Per-kernel precision. `decode` covers box decoding; `score` covers the
// score transform applied to classifier and objectness outputs.
struct PrecisionPolicy {
  PrecisionMode decode = PrecisionMode::kFull;
  PrecisionMode score = PrecisionMode::kFull;

  static PrecisionPolicy Uniform(PrecisionMode mode) { return {mode, mode}; }

  friend bool operator==(const PrecisionPolicy&,
                         const PrecisionPolicy&) = default;
};

using DecodeKernel = std::function<Box(
    const BoxDelta&, const Box&, const std::optional<ImageSize>&, RoundingFn)>;
using ScoreKernel = std::function<double(double)>;

// The registered numeric paths of the pipeline.
DecodeKernel PlainDecodeKernel();
ScoreKernel PlainScoreKernel();  // clamps into [0, 1]

// kFull returns the kernel unchanged. kHalfEmulated rounds the kernel inputs,
// the kernel outputs and, for decode, every declared intermediate through
// RoundF16.
DecodeKernel WithPrecision(PrecisionMode mode, DecodeKernel kernel);
ScoreKernel WithPrecision(PrecisionMode mode, ScoreKernel kernel);

}  // namespace drivedet

#endif  // DRIVEDET_HALF_H_

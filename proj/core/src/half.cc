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
#include "drivedet/half.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/string_view.h"
#include "absl/strings/str_cat.h"

namespace drivedet {
namespace {

// binary16: 10 explicit mantissa bits, minimum normal exponent -14.
constexpr int kMantissaBits = 10;
constexpr int kMinNormalExponent = -14;
// Halfway between 65504 and the next (unrepresentable) step 65536; ties go to
// the even significand, which is the overflowing one.
constexpr double kOverflowThreshold = 65520.0;

BoxDelta RoundDelta(const BoxDelta& d) {
  return {RoundF16(d.ty), RoundF16(d.tx), RoundF16(d.th), RoundF16(d.tw)};
}

Box RoundBox(const Box& b) {
  return {RoundF16(b.ymin), RoundF16(b.xmin), RoundF16(b.ymax),
          RoundF16(b.xmax)};
}

}  // namespace

double RoundF16(double x) {
  if (std::isnan(x) || std::isinf(x) || x == 0.0) return x;
  const double mag = std::fabs(x);
  if (mag >= kOverflowThreshold) return std::copysign(INFINITY, x);
  int exp2 = 0;
  std::frexp(mag, &exp2);  // mag = f * 2^exp2, f in [0.5, 1)
  const int unbiased = std::max(exp2 - 1, kMinNormalExponent);
  const double quantum = std::ldexp(1.0, unbiased - kMantissaBits);
  // Scaling by a power of two is exact; nearbyint uses the default
  // round-to-nearest-even mode.
  const double rounded = std::nearbyint(mag / quantum) * quantum;
  return std::copysign(rounded, x);
}

absl::string_view PrecisionModeName(PrecisionMode mode) {
  return mode == PrecisionMode::kFull ? "full" : "half_emulated";
}

absl::StatusOr<PrecisionMode> ParsePrecisionMode(absl::string_view name) {
  if (name == "full" || name == "float32" || name == "f32") {
    return PrecisionMode::kFull;
  }
  if (name == "half_emulated" || name == "float16" || name == "f16") {
    return PrecisionMode::kHalfEmulated;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown precision mode '", name,
                   "' (expected full or half_emulated)"));
}

DecodeKernel PlainDecodeKernel() {
  return [](const BoxDelta& delta, const Box& anchor,
            const std::optional<ImageSize>& clip_to, RoundingFn round) {
    return Decode(delta, anchor, clip_to, round);
  };
}

ScoreKernel PlainScoreKernel() {
  return [](double s) { return std::clamp(s, 0.0, 1.0); };
}

DecodeKernel WithPrecision(PrecisionMode mode, DecodeKernel kernel) {
  if (mode == PrecisionMode::kFull) return kernel;
  return [kernel = std::move(kernel)](const BoxDelta& delta, const Box& anchor,
                                      const std::optional<ImageSize>& clip_to,
                                      RoundingFn) {
    return RoundBox(
        kernel(RoundDelta(delta), RoundBox(anchor), clip_to, &RoundF16));
  };
}

ScoreKernel WithPrecision(PrecisionMode mode, ScoreKernel kernel) {
  if (mode == PrecisionMode::kFull) return kernel;
  return [kernel = std::move(kernel)](double s) {
    return RoundF16(kernel(RoundF16(s)));
  };
}

}  // namespace drivedet

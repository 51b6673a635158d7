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
#include "drivedet/box.h"

#include <algorithm>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace drivedet {
namespace {

double Identity(double x) { return x; }

}  // namespace

double Iou(const Box& a, const Box& b) {
  const double ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  const double iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  if (ih <= 0.0 || iw <= 0.0) return 0.0;
  const double inter = ih * iw;
  const double uni = a.Area() + b.Area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Matrix IouMatrix(absl::Span<const Box> a, absl::Span<const Box> b) {
  Matrix m;
  m.rows = a.size();
  m.cols = b.size();
  m.values.resize(m.rows * m.cols);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      m.values[i * m.cols + j] = Iou(a[i], b[j]);
    }
  }
  return m;
}

Box Clip(const Box& box, const ImageSize& image) {
  return Box{std::clamp(box.ymin, 0.0, image.height),
             std::clamp(box.xmin, 0.0, image.width),
             std::clamp(box.ymax, 0.0, image.height),
             std::clamp(box.xmax, 0.0, image.width)};
}

absl::StatusOr<BoxDelta> Encode(const Box& target, const Box& anchor) {
  if (!(anchor.Height() > 0.0 && anchor.Width() > 0.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "cannot encode against anchor with size %gx%g", anchor.Height(),
        anchor.Width()));
  }
  if (!(target.Height() > 0.0 && target.Width() > 0.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "cannot encode target with size %gx%g", target.Height(),
        target.Width()));
  }
  const double ha = anchor.Height();
  const double wa = anchor.Width();
  return BoxDelta{(target.CenterY() - anchor.CenterY()) / ha,
                  (target.CenterX() - anchor.CenterX()) / wa,
                  std::log(target.Height() / ha),
                  std::log(target.Width() / wa)};
}

Box Decode(const BoxDelta& delta, const Box& anchor,
           const std::optional<ImageSize>& clip_to, RoundingFn round) {
  const RoundingFn r = round != nullptr ? round : &Identity;
  const double ha = r(anchor.ymax - anchor.ymin);
  const double wa = r(anchor.xmax - anchor.xmin);
  const double cya = r(anchor.ymin + r(0.5 * ha));
  const double cxa = r(anchor.xmin + r(0.5 * wa));
  const double th = std::min(delta.th, kMaxLogScale);
  const double tw = std::min(delta.tw, kMaxLogScale);

  const double cy = r(r(delta.ty * ha) + cya);
  const double cx = r(r(delta.tx * wa) + cxa);
  const double half_h = r(0.5 * r(r(std::exp(th)) * ha));
  const double half_w = r(0.5 * r(r(std::exp(tw)) * wa));

  Box out{r(cy - half_h), r(cx - half_w), r(cy + half_h), r(cx + half_w)};
  if (clip_to.has_value()) out = Clip(out, *clip_to);
  return out;
}

}  // namespace drivedet

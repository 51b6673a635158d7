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
#ifndef DRIVEDET_SYNTH_H_
#define DRIVEDET_SYNTH_H_

#include <array>
#include <cstdint>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "drivedet/head.h"
#include "drivedet/scene.h"

namespace drivedet {

// Distribution of synthetic driving scenes: many small objects, optionally
// clustered. Object edge length sqrt(h * w) is log-normal; the class sets the
// aspect ratio, so box area is exactly edge^2 and difficulty follows from it.
struct SceneConfig {
  int image_h = 640;
  int image_w = 1152;
  int frames = 10;
  int min_objects = 5;
  int max_objects = 30;
  // Probabilities for vehicle, pedestrian, cyclist.
  std::array<double, kNumClasses> class_mix = {0.5, 0.35, 0.15};
  double size_log_mean = 3.8712010109078907;  // log(48)
  double size_log_std = 0.6;
  // Probability that a new object is placed overlapping, and takes the class
  // of, an existing one.
  double crowd_cluster_prob = 0.3;
  // No two objects of a frame overlap with IoU above this.
  double max_gt_iou = 0.6;
  // Objects with area below this are difficulty L2.
  double l2_area_threshold = 1024.0;
  std::uint64_t seed = 0;

  absl::Status Validate() const;

  friend bool operator==(const SceneConfig&, const SceneConfig&) = default;
};

// Height / width of each class's boxes before jitter.
inline constexpr std::array<double, kNumClasses> kClassAspect = {0.6, 2.5, 1.6};

// Deterministic in config.seed; frame i draws from a stream seeded by
// (seed, i), so frames can be generated independently.
absl::StatusOr<std::vector<Frame>> GenerateScenes(const SceneConfig& config);

// Probability that a generated object falls below l2_area_threshold, from the
// log-normal edge distribution.
double ExpectedLevel2Fraction(const SceneConfig& config);

struct OracleHeadConfig {
  double score_noise_std = 0.05;
  // Localization error per cascade stage, split into a part shared by every
  // reference on the same object and an independent per-reference part.
  // Region proposals and the one-stage head use the first entries.
  std::vector<double> object_noise_std_per_stage = {0.07, 0.04, 0.02};
  std::vector<double> delta_noise_std_per_stage = {0.08, 0.03, 0.01};
  // Expected spurious high-score predictions per frame and head call.
  double fp_rate = 0.5;
  std::uint64_t seed = 0;

  absl::Status Validate() const;

  static OracleHeadConfig Noiseless(int num_stages = 3);

  friend bool operator==(const OracleHeadConfig&,
                         const OracleHeadConfig&) = default;
};

// Synthetic stand-in for trained heads. For every reference box (anchor or
// proposal) it finds the best-IoU ground truth and emits
//   score  = clamp(IoU + N(0, score_noise_std)) for that object's class,
//            clamp(N(0, score_noise_std)) for the other classes;
//   delta  = Encode(target, reference) + N(0, stage std) per component,
// where target is the object shifted by N(0, object stage std) once per call,
// or pure noise when the reference overlaps nothing. On top of that, each call
// emits on average fp_rate confident predictions of random boxes with random
// classes, carried by the reference that overlaps them most. The noise for one reference depends
// only on (config.seed, frame id, call kind, stage, the reference box), never
// on the other references in the batch, and varies continuously with the box
// for cascade-stage references.
class OracleHead : public Head {
 public:
  explicit OracleHead(OracleHeadConfig config);

  const OracleHeadConfig& config() const { return config_; }

  int NumStages() const override;
  absl::StatusOr<std::vector<LevelOutputs>> Rpn(
      const Frame& frame, const AnchorPyramid& anchors) const override;
  absl::StatusOr<LevelOutputs> Stage(
      const Frame& frame, int stage,
      absl::Span<const Box> boxes) const override;
  absl::StatusOr<std::vector<LevelOutputs>> Dense(
      const Frame& frame, const AnchorPyramid& anchors) const override;

 private:
  std::vector<LevelOutputs> PredictPyramid(const Frame& frame,
                                           const AnchorPyramid& anchors,
                                           std::uint64_t kind,
                                           int num_classes) const;

  OracleHeadConfig config_;
};

}  // namespace drivedet

#endif  // DRIVEDET_SYNTH_H_

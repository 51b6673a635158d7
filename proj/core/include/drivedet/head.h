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
#ifndef DRIVEDET_HEAD_H_
#define DRIVEDET_HEAD_H_

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "drivedet/anchors.h"
#include "drivedet/box.h"
#include "drivedet/scene.h"

namespace drivedet {

// Raw head predictions aligned with a list of reference boxes (the anchors of
// one pyramid level, or the proposals entering a cascade stage). `scores` is
// row-major [box][class] with `num_classes` columns.
struct LevelOutputs {
  int num_classes = 1;
  std::vector<double> scores;
  std::vector<BoxDelta> deltas;

  std::size_t size() const { return deltas.size(); }
  double score(std::size_t box, int class_id) const {
    return scores[box * static_cast<std::size_t>(num_classes) +
                  static_cast<std::size_t>(class_id)];
  }

  friend bool operator==(const LevelOutputs&, const LevelOutputs&) = default;
};

// Source of head predictions for one frame. Implementations must be safe to
// call concurrently for different frames.
class Head {
 public:
  virtual ~Head() = default;

  // Number of cascade stages this head can serve.
  virtual int NumStages() const = 0;

  // Region-proposal objectness (num_classes == 1) and deltas, one entry per
  // pyramid level.
  virtual absl::StatusOr<std::vector<LevelOutputs>> Rpn(
      const Frame& frame, const AnchorPyramid& anchors) const = 0;

  // Class scores and class-agnostic deltas for the boxes entering `stage`
  // (0-based).
  virtual absl::StatusOr<LevelOutputs> Stage(
      const Frame& frame, int stage, absl::Span<const Box> boxes) const = 0;

  // One-stage class scores and deltas, one entry per pyramid level.
  virtual absl::StatusOr<std::vector<LevelOutputs>> Dense(
      const Frame& frame, const AnchorPyramid& anchors) const = 0;
};

// Everything a head produced for one frame, in call order.
struct HeadRecord {
  std::string frame_id;
  std::vector<LevelOutputs> rpn;
  std::vector<LevelOutputs> stages;
  std::vector<LevelOutputs> dense;

  friend bool operator==(const HeadRecord&, const HeadRecord&) = default;
};

// Replays recorded head outputs. Stage outputs are served by stage index, so a
// replay is valid only for the pipeline configuration it was recorded with.
class ReplayHead : public Head {
 public:
  explicit ReplayHead(std::vector<HeadRecord> records, int num_stages = -1);

  int NumStages() const override { return num_stages_; }
  absl::StatusOr<std::vector<LevelOutputs>> Rpn(
      const Frame& frame, const AnchorPyramid& anchors) const override;
  absl::StatusOr<LevelOutputs> Stage(
      const Frame& frame, int stage,
      absl::Span<const Box> boxes) const override;
  absl::StatusOr<std::vector<LevelOutputs>> Dense(
      const Frame& frame, const AnchorPyramid& anchors) const override;

 private:
  absl::StatusOr<const HeadRecord*> Find(const Frame& frame) const;

  std::map<std::string, HeadRecord> records_;
  int num_stages_;
};

// Forwards to another head and keeps a copy of every output.
class RecordingHead : public Head {
 public:
  explicit RecordingHead(const Head* inner) : inner_(inner) {}

  int NumStages() const override { return inner_->NumStages(); }
  absl::StatusOr<std::vector<LevelOutputs>> Rpn(
      const Frame& frame, const AnchorPyramid& anchors) const override;
  absl::StatusOr<LevelOutputs> Stage(
      const Frame& frame, int stage,
      absl::Span<const Box> boxes) const override;
  absl::StatusOr<std::vector<LevelOutputs>> Dense(
      const Frame& frame, const AnchorPyramid& anchors) const override;

  // Records ordered by frame id.
  std::vector<HeadRecord> Records() const;

 private:
  const Head* inner_;
  mutable std::mutex mu_;
  mutable std::map<std::string, HeadRecord> records_;
};

}  // namespace drivedet

#endif  // DRIVEDET_HEAD_H_

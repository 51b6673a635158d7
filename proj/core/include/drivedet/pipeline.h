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
#ifndef DRIVEDET_PIPELINE_H_
#define DRIVEDET_PIPELINE_H_

#include "absl/strings/string_view.h"
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "drivedet/anchors.h"
#include "drivedet/bench.h"
#include "drivedet/box.h"
#include "drivedet/half.h"
#include "drivedet/head.h"
#include "drivedet/matching.h"
#include "drivedet/scene.h"
#include "drivedet/suppression.h"

namespace drivedet {

// How the final class score of a cascade is formed: the last stage's
// classifier alone, or the mean over all stages of the same proposal.
enum class StageScoreMode { kLast, kMean };

absl::string_view StageScoreModeName(StageScoreMode mode);
absl::StatusOr<StageScoreMode> ParseStageScoreMode(absl::string_view name);

// Inference-time knobs. Defaults are the optimized driving-scene settings:
// L2-L6 pyramid, 512 proposals, NMS 0.7 for both proposal and final NMS,
// three cascade stages at {0.5, 0.6, 0.7}.
struct PipelineConfig {
  int min_level = 2;
  int max_level = 6;
  AnchorSpec anchor_spec = AnchorSpec::RegionProposal();
  // Candidates kept per pyramid level before NMS (by score); 0 keeps all.
  int pre_nms_top_k = 1000;
  // Proposal candidates need objectness strictly above this value.
  double rpn_score_threshold = 0.0;
  int num_proposals = 512;
  double rpn_nms_threshold = 0.7;
  double final_nms_threshold = 0.7;
  CascadeConfig cascade;
  StageScoreMode stage_score_mode = StageScoreMode::kLast;
  double score_threshold = 0.05;
  int max_detections = 300;
  PrecisionPolicy precision;

  absl::Status Validate() const;

  // Defaults for the one-stage path: 9 anchors per location.
  static PipelineConfig OneStage();

  friend bool operator==(const PipelineConfig&,
                         const PipelineConfig&) = default;
};

struct RunOptions {
  // Precomputed anchors for the frame size; generated on demand when null.
  const AnchorPyramid* anchors = nullptr;
  StageTimer* timer = nullptr;
};

// Decodes, clips and suppresses region proposals: per-level pre-NMS top-k,
// class-agnostic greedy NMS at rpn_nms_threshold, then the num_proposals
// highest-scoring survivors. Scores are objectness.
absl::StatusOr<std::vector<ScoredBox>> RpnProposals(
    const AnchorPyramid& anchors, absl::Span<const LevelOutputs> rpn,
    const PipelineConfig& config, const ImageSize& image,
    StageTimer* timer = nullptr);

struct TwoStageResult {
  std::vector<Detection> detections;
  std::vector<ScoredBox> proposals;
  // Refined boxes output by each cascade stage, aligned with `proposals`.
  std::vector<std::vector<Box>> stage_boxes;
};

absl::StatusOr<TwoStageResult> RunTwoStage(const Frame& frame,
                                           const Head& head,
                                           const PipelineConfig& config,
                                           const RunOptions& options = {});

absl::StatusOr<std::vector<Detection>> RunOneStage(
    const Frame& frame, const Head& head, const PipelineConfig& config,
    const RunOptions& options = {});

// Runs every frame, `jobs` frames at a time. Per-frame results are
// independent of `jobs` and returned in input order.
absl::StatusOr<std::vector<TwoStageResult>> RunTwoStageBatch(
    absl::Span<const Frame> frames, const Head& head,
    const PipelineConfig& config, int jobs = 1);

absl::StatusOr<std::vector<std::vector<Detection>>> RunOneStageBatch(
    absl::Span<const Frame> frames, const Head& head,
    const PipelineConfig& config, int jobs = 1);

}  // namespace drivedet

#endif  // DRIVEDET_PIPELINE_H_

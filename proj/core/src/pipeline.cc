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
#include "drivedet/pipeline.h"

#include <algorithm>
#include <optional>
#include <string>
#include <utility>

#include "absl/strings/string_view.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "drivedet/parallel.h"

namespace drivedet {
namespace {

absl::Status CheckThreshold(absl::string_view name, double t) {
  if (!(t > 0.0 && t <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s must be in (0, 1], got %g", name, t));
  }
  return absl::OkStatus();
}

absl::Status CheckAligned(const AnchorPyramid& anchors,
                          absl::Span<const LevelOutputs> outputs,
                          int expected_classes, absl::string_view what) {
  if (outputs.size() != anchors.levels.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%s outputs cover %d pyramid levels, anchors have %d", what,
        outputs.size(), anchors.levels.size()));
  }
  for (std::size_t l = 0; l < outputs.size(); ++l) {
    const AnchorLevel& level = anchors.levels[l];
    const LevelOutputs& out = outputs[l];
    const int classes = expected_classes > 0 ? expected_classes
                                             : out.num_classes;
    if (out.num_classes != classes || classes < 1 ||
        out.deltas.size() != level.anchors.size() ||
        out.scores.size() !=
            level.anchors.size() * static_cast<std::size_t>(classes)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "%s outputs misaligned at level L%d: %d anchors, %d deltas, %d "
          "scores with %d classes",
          what, level.level, level.anchors.size(), out.deltas.size(),
          out.scores.size(), out.num_classes));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<AnchorPyramid> PyramidFor(const Frame& frame,
                                         const PipelineConfig& config) {
  return GeneratePyramid(frame.height, frame.width, config.min_level,
                         config.max_level, config.anchor_spec);
}

std::vector<double> TransformScores(const std::vector<double>& scores,
                                    const ScoreKernel& kernel) {
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = kernel(scores[i]);
  return out;
}

std::vector<Detection> ToDetections(const std::string& frame_id,
                                    const std::vector<ScoredBox>& kept) {
  std::vector<Detection> out;
  out.reserve(kept.size());
  for (const auto& k : kept) {
    out.push_back(Detection{frame_id, k.box, k.class_id, k.score});
  }
  return out;
}

}  // namespace

absl::string_view StageScoreModeName(StageScoreMode mode) {
  return mode == StageScoreMode::kLast ? "last" : "mean";
}

absl::StatusOr<StageScoreMode> ParseStageScoreMode(absl::string_view name) {
  if (name == "last") return StageScoreMode::kLast;
  if (name == "mean") return StageScoreMode::kMean;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown stage_score_mode '", name, "' (expected last or mean)"));
}

absl::Status PipelineConfig::Validate() const {
  if (absl::Status s = ValidateLevelRange(min_level, max_level); !s.ok()) {
    return s;
  }
  if (absl::Status s = anchor_spec.Validate(); !s.ok()) return s;
  if (num_proposals < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("num_proposals must be >= 1, got %d", num_proposals));
  }
  if (pre_nms_top_k < 0) {
    return absl::InvalidArgumentError("pre_nms_top_k must be >= 0");
  }
  if (max_detections < 1) {
    return absl::InvalidArgumentError("max_detections must be >= 1");
  }
  if (absl::Status s = CheckThreshold("rpn_nms_threshold", rpn_nms_threshold);
      !s.ok()) {
    return s;
  }
  if (absl::Status s =
          CheckThreshold("final_nms_threshold", final_nms_threshold);
      !s.ok()) {
    return s;
  }
  if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) {
    return absl::InvalidArgumentError("score_threshold must be in [0, 1]");
  }
  return cascade.Validate();
}

PipelineConfig PipelineConfig::OneStage() {
  PipelineConfig c;
  c.anchor_spec = AnchorSpec::OneStage();
  return c;
}

absl::StatusOr<std::vector<ScoredBox>> RpnProposals(
    const AnchorPyramid& anchors, absl::Span<const LevelOutputs> rpn,
    const PipelineConfig& config, const ImageSize& image, StageTimer* timer) {
  if (absl::Status s = CheckAligned(anchors, rpn, 1, "rpn"); !s.ok()) return s;
  auto scope = StageTimer::Time(timer, "proposals");
  const DecodeKernel decode =
      WithPrecision(config.precision.decode, PlainDecodeKernel());
  const ScoreKernel score =
      WithPrecision(config.precision.score, PlainScoreKernel());

  std::vector<ScoredBox> candidates;
  for (std::size_t l = 0; l < rpn.size(); ++l) {
    const AnchorLevel& level = anchors.levels[l];
    const std::vector<double> scores = TransformScores(rpn[l].scores, score);
    const std::size_t k = config.pre_nms_top_k > 0
                              ? static_cast<std::size_t>(config.pre_nms_top_k)
                              : scores.size();
    for (std::size_t i : TopKIndices(scores, k)) {
      if (!(scores[i] > config.rpn_score_threshold)) break;
      const Box box = decode(rpn[l].deltas[i], level.anchors[i], image, nullptr);
      if (!(box.Area() > 0.0)) continue;
      candidates.push_back(ScoredBox{box, scores[i], 0});
    }
  }
  // Greedy NMS output is score-ordered, so capping it at num_proposals is the
  // top-k of the survivors.
  return GreedyNms(candidates, config.rpn_nms_threshold,
                   static_cast<std::size_t>(config.num_proposals));
}

absl::StatusOr<TwoStageResult> RunTwoStage(const Frame& frame,
                                           const Head& head,
                                           const PipelineConfig& config,
                                           const RunOptions& options) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  if (head.NumStages() != config.cascade.NumStages()) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "head provides %d cascade stages, config expects %d", head.NumStages(),
        config.cascade.NumStages()));
  }
  StageTimer* timer = options.timer;
  const ImageSize image = frame.Size();

  std::optional<AnchorPyramid> owned;
  const AnchorPyramid* anchors = options.anchors;
  if (anchors == nullptr) {
    auto scope = StageTimer::Time(timer, "anchors");
    absl::StatusOr<AnchorPyramid> p = PyramidFor(frame, config);
    if (!p.ok()) return p.status();
    owned = *std::move(p);
    anchors = &*owned;
  }

  absl::StatusOr<std::vector<LevelOutputs>> rpn;
  {
    auto scope = StageTimer::Time(timer, "rpn_head");
    rpn = head.Rpn(frame, *anchors);
  }
  if (!rpn.ok()) return rpn.status();

  TwoStageResult result;
  {
    absl::StatusOr<std::vector<ScoredBox>> proposals =
        RpnProposals(*anchors, *rpn, config, image, timer);
    if (!proposals.ok()) return proposals.status();
    result.proposals = *std::move(proposals);
  }

  const DecodeKernel decode =
      WithPrecision(config.precision.decode, PlainDecodeKernel());
  const ScoreKernel score =
      WithPrecision(config.precision.score, PlainScoreKernel());

  std::vector<Box> boxes;
  boxes.reserve(result.proposals.size());
  for (const auto& p : result.proposals) boxes.push_back(p.box);

  std::vector<double> final_scores;
  int num_classes = 0;
  const int num_stages = config.cascade.NumStages();
  for (int s = 0; s < num_stages; ++s) {
    auto scope = StageTimer::Time(timer, absl::StrCat("stage_", s + 1));
    absl::StatusOr<LevelOutputs> out = head.Stage(frame, s, boxes);
    if (!out.ok()) return out.status();
    if (out->num_classes < 1 || out->deltas.size() != boxes.size() ||
        out->scores.size() !=
            boxes.size() * static_cast<std::size_t>(out->num_classes) ||
        (s > 0 && out->num_classes != num_classes)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "stage %d outputs misaligned: %d boxes, %d deltas, %d scores with "
          "%d classes",
          s + 1, boxes.size(), out->deltas.size(), out->scores.size(),
          out->num_classes));
    }
    num_classes = out->num_classes;
    std::vector<double> scores = TransformScores(out->scores, score);
    if (config.stage_score_mode == StageScoreMode::kMean && s > 0) {
      for (std::size_t i = 0; i < scores.size(); ++i) {
        final_scores[i] += scores[i];
      }
    } else {
      final_scores = std::move(scores);
    }

    std::vector<Box> refined(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      refined[i] = decode(out->deltas[i], boxes[i], image, nullptr);
    }
    result.stage_boxes.push_back(refined);
    boxes = std::move(refined);
  }
  if (config.stage_score_mode == StageScoreMode::kMean && num_stages > 1) {
    for (double& v : final_scores) v = score(v / num_stages);
  }

  auto scope = StageTimer::Time(timer, "final_nms");
  std::vector<ScoredBox> candidates;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (!(boxes[i].Area() > 0.0)) continue;
    for (int c = 0; c < num_classes; ++c) {
      const double v =
          final_scores[i * static_cast<std::size_t>(num_classes) + c];
      if (v >= config.score_threshold && v > 0.0) {
        candidates.push_back(ScoredBox{boxes[i], v, c});
      }
    }
  }
  result.detections = ToDetections(
      frame.frame_id,
      BatchedNms(candidates, config.final_nms_threshold,
                 static_cast<std::size_t>(config.max_detections)));
  return result;
}

absl::StatusOr<std::vector<Detection>> RunOneStage(
    const Frame& frame, const Head& head, const PipelineConfig& config,
    const RunOptions& options) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  StageTimer* timer = options.timer;
  const ImageSize image = frame.Size();

  std::optional<AnchorPyramid> owned;
  const AnchorPyramid* anchors = options.anchors;
  if (anchors == nullptr) {
    auto scope = StageTimer::Time(timer, "anchors");
    absl::StatusOr<AnchorPyramid> p = PyramidFor(frame, config);
    if (!p.ok()) return p.status();
    owned = *std::move(p);
    anchors = &*owned;
  }

  absl::StatusOr<std::vector<LevelOutputs>> dense;
  {
    auto scope = StageTimer::Time(timer, "dense_head");
    dense = head.Dense(frame, *anchors);
  }
  if (!dense.ok()) return dense.status();
  if (absl::Status s = CheckAligned(*anchors, *dense, 0, "one-stage");
      !s.ok()) {
    return s;
  }

  const DecodeKernel decode =
      WithPrecision(config.precision.decode, PlainDecodeKernel());
  const ScoreKernel score =
      WithPrecision(config.precision.score, PlainScoreKernel());

  std::vector<ScoredBox> candidates;
  {
    auto scope = StageTimer::Time(timer, "decode");
    for (std::size_t l = 0; l < dense->size(); ++l) {
      const AnchorLevel& level = anchors->levels[l];
      const LevelOutputs& out = (*dense)[l];
      const std::vector<double> scores = TransformScores(out.scores, score);
      const std::size_t k = config.pre_nms_top_k > 0
                                ? static_cast<std::size_t>(config.pre_nms_top_k)
                                : scores.size();
      const std::size_t classes = static_cast<std::size_t>(out.num_classes);
      for (std::size_t flat : TopKIndices(scores, k)) {
        if (!(scores[flat] >= config.score_threshold && scores[flat] > 0.0)) {
          break;
        }
        const std::size_t a = flat / classes;
        const Box box = decode(out.deltas[a], level.anchors[a], image, nullptr);
        if (!(box.Area() > 0.0)) continue;
        candidates.push_back(
            ScoredBox{box, scores[flat], static_cast<int>(flat % classes)});
      }
    }
  }

  auto scope = StageTimer::Time(timer, "final_nms");
  return ToDetections(
      frame.frame_id,
      BatchedNms(candidates, config.final_nms_threshold,
                 static_cast<std::size_t>(config.max_detections)));
}

absl::StatusOr<std::vector<TwoStageResult>> RunTwoStageBatch(
    absl::Span<const Frame> frames, const Head& head,
    const PipelineConfig& config, int jobs) {
  std::vector<TwoStageResult> results(frames.size());
  absl::Status s = ParallelFor(frames.size(), jobs, [&](std::size_t i) {
    absl::StatusOr<TwoStageResult> r = RunTwoStage(frames[i], head, config);
    if (!r.ok()) {
      return absl::Status(r.status().code(),
                          absl::StrCat("frame '", frames[i].frame_id,
                                       "': ", r.status().message()));
    }
    results[i] = *std::move(r);
    return absl::OkStatus();
  });
  if (!s.ok()) return s;
  return results;
}

absl::StatusOr<std::vector<std::vector<Detection>>> RunOneStageBatch(
    absl::Span<const Frame> frames, const Head& head,
    const PipelineConfig& config, int jobs) {
  std::vector<std::vector<Detection>> results(frames.size());
  absl::Status s = ParallelFor(frames.size(), jobs, [&](std::size_t i) {
    absl::StatusOr<std::vector<Detection>> r =
        RunOneStage(frames[i], head, config);
    if (!r.ok()) {
      return absl::Status(r.status().code(),
                          absl::StrCat("frame '", frames[i].frame_id,
                                       "': ", r.status().message()));
    }
    results[i] = *std::move(r);
    return absl::OkStatus();
  });
  if (!s.ok()) return s;
  return results;
}

}  // namespace drivedet

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
#include "drivedet/ablation.h"

#include <chrono>

namespace drivedet {

std::vector<AblationStep> DetectorAblationLadder(
    const PipelineConfig& optimized, const OracleHeadConfig& oracle) {
  std::vector<AblationStep> ladder;

  AblationStep step;
  step.name = "baseline (single head, L3-L7, 1000 proposals, NMS 0.5)";
  step.pipeline = optimized;
  step.pipeline.cascade.stage_fg_thresholds = {
      optimized.cascade.stage_fg_thresholds.front()};
  step.pipeline.min_level = 3;
  step.pipeline.max_level = 7;
  step.pipeline.num_proposals = 1000;
  step.pipeline.rpn_nms_threshold = 0.5;
  step.pipeline.final_nms_threshold = 0.5;
  step.pipeline.precision = PrecisionPolicy::Uniform(PrecisionMode::kFull);
  step.oracle = oracle;
  step.oracle.delta_noise_std_per_stage = {
      oracle.delta_noise_std_per_stage.front()};
  step.oracle.object_noise_std_per_stage = {
      oracle.object_noise_std_per_stage.front()};
  ladder.push_back(step);

  step.name = "+ cascaded heads";
  step.pipeline.cascade = optimized.cascade;
  step.oracle = oracle;
  ladder.push_back(step);

  step.name = "+ L2-L6 features";
  step.pipeline.min_level = optimized.min_level;
  step.pipeline.max_level = optimized.max_level;
  ladder.push_back(step);

  step.name = "+ fewer proposals";
  step.pipeline.num_proposals = optimized.num_proposals;
  ladder.push_back(step);

  step.name = "+ higher NMS threshold";
  step.pipeline.rpn_nms_threshold = optimized.rpn_nms_threshold;
  step.pipeline.final_nms_threshold = optimized.final_nms_threshold;
  ladder.push_back(step);

  step.name = "+ float16 (emulated)";
  step.pipeline.precision = PrecisionPolicy::Uniform(PrecisionMode::kHalfEmulated);
  ladder.push_back(step);
  return ladder;
}

std::vector<Detection> ConcatDetections(
    absl::Span<const TwoStageResult> results) {
  std::vector<Detection> out;
  for (const auto& r : results) {
    out.insert(out.end(), r.detections.begin(), r.detections.end());
  }
  return out;
}

absl::StatusOr<std::vector<AblationRow>> RunAblation(
    absl::Span<const Frame> frames, absl::Span<const AblationStep> ladder,
    const EvalConfig& eval, int jobs, bool time_steps) {
  const std::vector<GroundTruth> gts = FlattenGroundTruth(
      std::vector<Frame>(frames.begin(), frames.end()));
  std::vector<AblationRow> rows;
  for (const AblationStep& step : ladder) {
    const OracleHead head(step.oracle);
    const auto start = std::chrono::steady_clock::now();
    absl::StatusOr<std::vector<TwoStageResult>> results = RunTwoStageBatch(
        frames, head, step.pipeline, time_steps ? 1 : jobs);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    if (!results.ok()) return results.status();
    absl::StatusOr<EvalResult> metrics =
        Evaluate(ConcatDetections(*results), gts, eval);
    if (!metrics.ok()) return metrics.status();
    AblationRow row;
    row.name = step.name;
    row.ap_l1 = metrics->ap_l1;
    row.ap_l2 = metrics->ap_l2;
    if (time_steps && !frames.empty()) {
      row.latency_ms =
          std::chrono::duration<double, std::milli>(elapsed).count() /
          static_cast<double>(frames.size());
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace drivedet

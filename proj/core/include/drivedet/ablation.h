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
#ifndef DRIVEDET_ABLATION_H_
#define DRIVEDET_ABLATION_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "drivedet/evaluation.h"
#include "drivedet/pipeline.h"
#include "drivedet/scene.h"
#include "drivedet/synth.h"

namespace drivedet {

struct AblationStep {
  std::string name;
  PipelineConfig pipeline;
  OracleHeadConfig oracle;
};

// The cumulative improvement ladder that ends at `optimized`:
//   baseline      single head at the first cascade threshold, L3-L7 pyramid,
//                 1000 proposals, NMS 0.5, full precision
//   + cascade     all cascade stages of `optimized`
//   + L2-L6       pyramid levels of `optimized`
//   + proposals   num_proposals of `optimized`
//   + NMS         proposal/final NMS thresholds of `optimized`
//   + float16     emulated half-precision decode and scores
// A single-stage step uses the oracle's first-stage delta noise.
std::vector<AblationStep> DetectorAblationLadder(
    const PipelineConfig& optimized, const OracleHeadConfig& oracle);

struct AblationRow {
  std::string name;
  double ap_l1 = 0.0;  // fraction in [0, 1]
  double ap_l2 = 0.0;
  double latency_ms = 0.0;  // mean per frame; 0 unless timed
};

// Runs each step's two-stage pipeline over `frames` and evaluates it. When
// `time_steps` is set each step is also timed end to end (single thread).
absl::StatusOr<std::vector<AblationRow>> RunAblation(
    absl::Span<const Frame> frames, absl::Span<const AblationStep> ladder,
    const EvalConfig& eval, int jobs = 1, bool time_steps = false);

// Detections of all frames, concatenated in frame order.
std::vector<Detection> ConcatDetections(
    absl::Span<const TwoStageResult> results);

}  // namespace drivedet

#endif  // DRIVEDET_ABLATION_H_

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
#ifndef DRIVEDET_IO_H_
#define DRIVEDET_IO_H_

#include <string>
#include "absl/strings/string_view.h"
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "drivedet/evaluation.h"
#include "drivedet/head.h"
#include "drivedet/matching.h"
#include "drivedet/pipeline.h"
#include "drivedet/scaling.h"
#include "drivedet/scene.h"
#include "drivedet/synth.h"

namespace drivedet {

// JSONL line formats. Boxes are [ymin, xmin, ymax, xmax] in pixels.
//
// scene:      {"frame_id", "width", "height",
//              "gts": [{"box", "class_id", "difficulty": "L1"|"L2"}]}
// detection:  {"frame_id", "box", "class_id", "score"}
// head:       {"frame_id", "rpn": [LEVEL], "stages": [LEVEL], "dense": [LEVEL]}
//             LEVEL = {"num_classes", "scores": [..], "deltas": [[ty,tx,th,tw]]}
//
// Parsers report errors as "line N: ...".

std::string ScenesToJsonl(absl::Span<const Frame> frames);
absl::StatusOr<std::vector<Frame>> ParseScenesJsonl(absl::string_view text);

std::string DetectionsToJsonl(absl::Span<const Detection> detections);
absl::StatusOr<std::vector<Detection>> ParseDetectionsJsonl(
    absl::string_view text);

std::string HeadRecordsToJsonl(absl::Span<const HeadRecord> records);
absl::StatusOr<std::vector<HeadRecord>> ParseHeadRecordsJsonl(
    absl::string_view text);

std::string EvalResultToJson(const EvalResult& result);
absl::StatusOr<EvalResult> ParseEvalResultJson(absl::string_view text);

// Per-frame cascade diagnostics written by `detect`.
struct FrameDiagnostics {
  std::string frame_id;
  std::size_t num_proposals = 0;
  StageQuality proposal_quality;
  std::vector<StageQuality> stage_quality;
};
std::string DiagnosticsToJsonl(absl::Span<const FrameDiagnostics> diagnostics);

// Every tunable of a run, in one JSON document with sections "scene",
// "oracle", "pipeline" and "eval". Missing fields keep their defaults; unknown
// fields are errors.
struct RunConfig {
  SceneConfig scene;
  OracleHeadConfig oracle;
  PipelineConfig pipeline;
  EvalConfig eval;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

absl::StatusOr<RunConfig> ParseRunConfig(absl::string_view json_text);
std::string RunConfigToJson(const RunConfig& config);

std::string FrontierToJson(absl::Span<const ModelRecord> frontier,
                           const ModelRecord* selected, double budget_ms);
std::string SeriesToJson(absl::Span<const ModelRecord> records);

absl::StatusOr<std::string> ReadFile(const std::string& path);
absl::Status WriteFile(const std::string& path, absl::string_view contents);

}  // namespace drivedet

#endif  // DRIVEDET_IO_H_

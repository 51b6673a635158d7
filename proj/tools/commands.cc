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
#include "commands.h"

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "drivedet/ablation.h"
#include "drivedet/bench.h"
#include "drivedet/evaluation.h"
#include "drivedet/half.h"
#include "drivedet/head.h"
#include "drivedet/io.h"
#include "drivedet/matching.h"
#include "drivedet/pipeline.h"
#include "drivedet/rng.h"
#include "drivedet/scaling.h"
#include "drivedet/synth.h"
#include "nlohmann/json.hpp"

namespace drivedet {
namespace {

using Json = nlohmann::ordered_json;

// Records what a run read and wrote so it can be reproduced.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args)
      : command_(std::move(command)), args_(args) {}

  void SetConfig(const RunConfig& config) {
    config_ = Json::parse(RunConfigToJson(config));
  }
  void AddInput(const std::string& path, absl::string_view contents) {
    inputs_.push_back(Entry(path, contents));
  }
  void AddOutput(const std::string& path, absl::string_view contents) {
    outputs_.push_back(Entry(path, contents));
  }

  std::string ToJson() const {
    Json j{{"tool", kToolVersion},
           {"command", command_},
           {"args", args_},
           {"config", config_},
           {"inputs", inputs_},
           {"outputs", outputs_}};
    return j.dump(2) + "\n";
  }

 private:
  static Json Entry(const std::string& path, absl::string_view contents) {
    return Json{{"path", path},
                {"bytes", contents.size()},
                {"fnv1a64", absl::StrFormat("%016x", HashString(
                                                         contents.data(),
                                                         contents.size()))}};
  }

  std::string command_;
  std::vector<std::string> args_;
  Json config_ = nullptr;
  Json inputs_ = Json::array();
  Json outputs_ = Json::array();
};

// Per-invocation state shared by the subcommand handlers.
struct Context {
  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> args;
  std::string config_path;
  std::string manifest_path;
  int jobs = 1;
};

absl::StatusOr<RunConfig> LoadConfig(const Context& ctx, Manifest* manifest) {
  RunConfig config;
  if (!ctx.config_path.empty()) {
    absl::StatusOr<std::string> text = ReadFile(ctx.config_path);
    if (!text.ok()) return text.status();
    manifest->AddInput(ctx.config_path, *text);
    absl::StatusOr<RunConfig> parsed = ParseRunConfig(*text);
    if (!parsed.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(ctx.config_path, ": ", parsed.status().message()));
    }
    config = *std::move(parsed);
  }
  return config;
}

template <typename T, typename Parser>
absl::StatusOr<T> ReadInput(const std::string& path, Parser parse,
                            Manifest* manifest) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  manifest->AddInput(path, *text);
  auto parsed = parse(*text);
  if (!parsed.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": ", parsed.status().message()));
  }
  return *std::move(parsed);
}

// Writes `contents`, then re-reads the file and checks it with `validate`.
absl::Status WriteValidated(
    const std::string& path, const std::string& contents, Manifest* manifest,
    const std::function<absl::Status(const std::string&)>& validate = {}) {
  if (absl::Status s = WriteFile(path, contents); !s.ok()) return s;
  absl::StatusOr<std::string> back = ReadFile(path);
  if (!back.ok()) return back.status();
  if (*back != contents) {
    return absl::DataLossError(absl::StrCat(path, ": read-back mismatch"));
  }
  if (validate) {
    if (absl::Status s = validate(*back); !s.ok()) {
      return absl::InternalError(
          absl::StrCat(path, ": written file fails validation: ", s.message()));
    }
  }
  manifest->AddOutput(path, contents);
  return absl::OkStatus();
}

absl::Status WriteManifest(const Context& ctx, const Manifest& manifest,
                           const std::string& primary_output) {
  const std::string path = ctx.manifest_path.empty()
                               ? primary_output + ".manifest.json"
                               : ctx.manifest_path;
  return WriteFile(path, manifest.ToJson());
}

template <typename T>
absl::Status CheckParses(absl::StatusOr<T> parsed) {
  return parsed.status();
}

std::string Percent(double fraction) {
  return absl::StrFormat("%.2f", 100.0 * fraction);
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> oracle_seed;
  std::optional<int> frames;
  std::string out;
  std::string head_out;
  std::string head_mode = "two_stage";
};

absl::Status RunSynth(const Context& ctx, const SynthOptions& opts) {
  Manifest manifest("synth", ctx.args);
  absl::StatusOr<RunConfig> config = LoadConfig(ctx, &manifest);
  if (!config.ok()) return config.status();
  if (opts.seed) config->scene.seed = *opts.seed;
  if (opts.oracle_seed) config->oracle.seed = *opts.oracle_seed;
  if (opts.frames) config->scene.frames = *opts.frames;
  manifest.SetConfig(*config);

  absl::StatusOr<std::vector<Frame>> frames = GenerateScenes(config->scene);
  if (!frames.ok()) return frames.status();
  if (absl::Status s = WriteValidated(
          opts.out, ScenesToJsonl(*frames), &manifest,
          [](const std::string& t) { return CheckParses(ParseScenesJsonl(t)); });
      !s.ok()) {
    return s;
  }

  if (!opts.head_out.empty()) {
    const OracleHead oracle(config->oracle);
    const RecordingHead recorder(&oracle);
    if (opts.head_mode == "two_stage" || opts.head_mode == "both") {
      auto r = RunTwoStageBatch(*frames, recorder, config->pipeline, ctx.jobs);
      if (!r.ok()) return r.status();
    }
    if (opts.head_mode == "one_stage" || opts.head_mode == "both") {
      PipelineConfig one_stage = config->pipeline;
      one_stage.anchor_spec = AnchorSpec::OneStage();
      auto r = RunOneStageBatch(*frames, recorder, one_stage, ctx.jobs);
      if (!r.ok()) return r.status();
    }
    if (absl::Status s = WriteValidated(
            opts.head_out, HeadRecordsToJsonl(recorder.Records()), &manifest,
            [](const std::string& t) {
              return CheckParses(ParseHeadRecordsJsonl(t));
            });
        !s.ok()) {
      return s;
    }
  }

  std::size_t objects = 0;
  std::size_t level2 = 0;
  for (const auto& f : *frames) {
    objects += f.gts.size();
    for (const auto& g : f.gts) level2 += g.difficulty == Difficulty::kLevel2;
  }
  ctx.out << absl::StrFormat("wrote %d frames, %d objects (%d L2) to %s\n",
                             frames->size(), objects, level2, opts.out);
  return WriteManifest(ctx, manifest, opts.out);
}

// ---------------------------------------------------------------------------
// detect

struct DetectOptions {
  std::string scenes;
  std::string replay;
  bool one_stage = false;
  std::string precision;
  std::optional<int> num_proposals;
  std::optional<double> rpn_nms;
  std::optional<double> final_nms;
  std::optional<std::uint64_t> oracle_seed;
  std::string out;
  std::string diagnostics;
};

absl::Status RunDetect(const Context& ctx, const DetectOptions& opts) {
  Manifest manifest("detect", ctx.args);
  absl::StatusOr<RunConfig> config = LoadConfig(ctx, &manifest);
  if (!config.ok()) return config.status();
  PipelineConfig& pipeline = config->pipeline;
  if (!opts.precision.empty()) {
    absl::StatusOr<PrecisionMode> mode = ParsePrecisionMode(opts.precision);
    if (!mode.ok()) return mode.status();
    pipeline.precision = PrecisionPolicy::Uniform(*mode);
  }
  if (opts.num_proposals) pipeline.num_proposals = *opts.num_proposals;
  if (opts.rpn_nms) pipeline.rpn_nms_threshold = *opts.rpn_nms;
  if (opts.final_nms) pipeline.final_nms_threshold = *opts.final_nms;
  if (opts.oracle_seed) config->oracle.seed = *opts.oracle_seed;
  if (opts.one_stage) pipeline.anchor_spec = AnchorSpec::OneStage();
  manifest.SetConfig(*config);
  if (absl::Status s = pipeline.Validate(); !s.ok()) return s;

  absl::StatusOr<std::vector<Frame>> frames =
      ReadInput<std::vector<Frame>>(opts.scenes, ParseScenesJsonl, &manifest);
  if (!frames.ok()) return frames.status();

  std::unique_ptr<Head> head;
  if (!opts.replay.empty()) {
    absl::StatusOr<std::vector<HeadRecord>> records =
        ReadInput<std::vector<HeadRecord>>(opts.replay, ParseHeadRecordsJsonl,
                                           &manifest);
    if (!records.ok()) return records.status();
    head = std::make_unique<ReplayHead>(*std::move(records));
  } else {
    if (absl::Status s = config->oracle.Validate(); !s.ok()) return s;
    head = std::make_unique<OracleHead>(config->oracle);
  }

  std::vector<Detection> detections;
  std::vector<FrameDiagnostics> diagnostics;
  if (opts.one_stage) {
    auto results = RunOneStageBatch(*frames, *head, pipeline, ctx.jobs);
    if (!results.ok()) return results.status();
    for (const auto& r : *results) {
      detections.insert(detections.end(), r.begin(), r.end());
    }
  } else {
    auto results = RunTwoStageBatch(*frames, *head, pipeline, ctx.jobs);
    if (!results.ok()) return results.status();
    for (std::size_t i = 0; i < results->size(); ++i) {
      const TwoStageResult& r = (*results)[i];
      const std::vector<Box> gts = (*frames)[i].GtBoxes();
      FrameDiagnostics d;
      d.frame_id = (*frames)[i].frame_id;
      d.num_proposals = r.proposals.size();
      std::vector<Box> proposal_boxes;
      for (const auto& p : r.proposals) proposal_boxes.push_back(p.box);
      d.proposal_quality =
          ComputeStageQuality(proposal_boxes, gts, pipeline.cascade);
      for (const auto& stage : r.stage_boxes) {
        d.stage_quality.push_back(
            ComputeStageQuality(stage, gts, pipeline.cascade));
      }
      diagnostics.push_back(std::move(d));
      detections.insert(detections.end(), r.detections.begin(),
                        r.detections.end());
    }
  }

  if (absl::Status s = WriteValidated(opts.out, DetectionsToJsonl(detections),
                                      &manifest,
                                      [](const std::string& t) {
                                        return CheckParses(
                                            ParseDetectionsJsonl(t));
                                      });
      !s.ok()) {
    return s;
  }
  if (!opts.one_stage) {
    const std::string path = opts.diagnostics.empty()
                                 ? opts.out + ".stages.jsonl"
                                 : opts.diagnostics;
    if (absl::Status s = WriteValidated(path, DiagnosticsToJsonl(diagnostics),
                                        &manifest);
        !s.ok()) {
      return s;
    }
  }
  ctx.out << absl::StrFormat("wrote %d detections for %d frames to %s\n",
                             detections.size(), frames->size(), opts.out);
  return WriteManifest(ctx, manifest, opts.out);
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string detections;
  std::string scenes;
  std::string out;
};

absl::Status RunEval(const Context& ctx, const EvalOptions& opts) {
  Manifest manifest("eval", ctx.args);
  absl::StatusOr<RunConfig> config = LoadConfig(ctx, &manifest);
  if (!config.ok()) return config.status();
  manifest.SetConfig(*config);
  absl::StatusOr<std::vector<Detection>> dets =
      ReadInput<std::vector<Detection>>(opts.detections, ParseDetectionsJsonl,
                                        &manifest);
  if (!dets.ok()) return dets.status();
  absl::StatusOr<std::vector<Frame>> frames =
      ReadInput<std::vector<Frame>>(opts.scenes, ParseScenesJsonl, &manifest);
  if (!frames.ok()) return frames.status();

  absl::StatusOr<EvalResult> result =
      Evaluate(*dets, FlattenGroundTruth(*frames), config->eval);
  if (!result.ok()) return result.status();
  if (absl::Status s = WriteValidated(
          opts.out, EvalResultToJson(*result), &manifest,
          [](const std::string& t) {
            return CheckParses(ParseEvalResultJson(t));
          });
      !s.ok()) {
    return s;
  }
  ctx.out << "AP/L1 " << Percent(result->ap_l1) << "  AP/L2 "
          << Percent(result->ap_l2) << "\n";
  for (const auto& [class_id, c] : result->per_class) {
    ctx.out << absl::StrFormat("  %-10s AP/L1 %6s  AP/L2 %6s  (%d L1 / %d "
                               "objects, %d detections)\n",
                               std::string(kClassNames[class_id]),
                               Percent(c.ap_l1), Percent(c.ap_l2), c.num_gt_l1,
                               c.num_gt_l2, c.num_detections);
  }
  return WriteManifest(ctx, manifest, opts.out);
}

// ---------------------------------------------------------------------------
// ablate

struct AblateOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> frames;
  bool with_latency = false;
  std::string out;
};

absl::Status RunAblate(const Context& ctx, const AblateOptions& opts) {
  Manifest manifest("ablate", ctx.args);
  absl::StatusOr<RunConfig> config = LoadConfig(ctx, &manifest);
  if (!config.ok()) return config.status();
  if (opts.seed) {
    config->scene.seed = *opts.seed;
    config->oracle.seed = *opts.seed;
  }
  if (opts.frames) config->scene.frames = *opts.frames;
  manifest.SetConfig(*config);
  if (absl::Status s = config->pipeline.Validate(); !s.ok()) return s;
  if (absl::Status s = config->oracle.Validate(); !s.ok()) return s;

  absl::StatusOr<std::vector<Frame>> frames = GenerateScenes(config->scene);
  if (!frames.ok()) return frames.status();
  const std::vector<AblationStep> ladder =
      DetectorAblationLadder(config->pipeline, config->oracle);
  absl::StatusOr<std::vector<AblationRow>> rows = RunAblation(
      *frames, ladder, config->eval, ctx.jobs, opts.with_latency);
  if (!rows.ok()) return rows.status();

  std::string csv = "step,name,num_stages,min_level,max_level,num_proposals,"
                    "nms_threshold,precision,ap_l1,ap_l2,delta_ap_l1";
  if (opts.with_latency) absl::StrAppend(&csv, ",latency_ms,delta_latency_pct");
  absl::StrAppend(&csv, "\n");
  ctx.out << absl::StrFormat("%-4s %-58s %8s %8s %8s", "step", "change",
                             "AP/L1", "AP/L2", "dAP/L1");
  if (opts.with_latency) ctx.out << absl::StrFormat(" %10s %8s", "ms/frame",
                                                    "dLat");
  ctx.out << "\n";
  for (std::size_t i = 0; i < rows->size(); ++i) {
    const AblationRow& row = (*rows)[i];
    const PipelineConfig& p = ladder[i].pipeline;
    const double delta = i == 0 ? 0.0 : row.ap_l1 - (*rows)[i - 1].ap_l1;
    absl::StrAppend(
        &csv,
        absl::StrFormat("%d,\"%s\",%d,%d,%d,%d,%.2f,%s,%.4f,%.4f,%+.4f", i,
                        row.name, p.cascade.NumStages(), p.min_level,
                        p.max_level, p.num_proposals, p.final_nms_threshold,
                        std::string(PrecisionModeName(p.precision.decode)),
                        100.0 * row.ap_l1, 100.0 * row.ap_l2, 100.0 * delta));
    ctx.out << absl::StrFormat("%-4d %-58s %8s %8s %+8.2f", i, row.name,
                               Percent(row.ap_l1), Percent(row.ap_l2),
                               100.0 * delta);
    if (opts.with_latency) {
      const double prev = i == 0 ? row.latency_ms : (*rows)[i - 1].latency_ms;
      const double pct = prev > 0.0 ? 100.0 * (row.latency_ms - prev) / prev
                                    : 0.0;
      absl::StrAppend(&csv, absl::StrFormat(",%.3f,%+.1f", row.latency_ms, pct));
      ctx.out << absl::StrFormat(" %10.2f %+7.1f%%", row.latency_ms, pct);
    }
    absl::StrAppend(&csv, "\n");
    ctx.out << "\n";
  }
  if (!opts.out.empty()) {
    if (absl::Status s = WriteValidated(opts.out, csv, &manifest); !s.ok()) {
      return s;
    }
    return WriteManifest(ctx, manifest, opts.out);
  }
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// pareto

struct ParetoOptions {
  std::string registry;
  std::string framework;
  double budget_ms = 70.0;
  std::string out;
  std::string json;
  std::string series_json;
  std::string compare;
};

void PrintRecord(std::ostream& out, absl::string_view prefix,
                 const ModelRecord& r) {
  out << absl::StrFormat("%s%-34s %7.1f ms  AP/L1 %.1f  AP/L2 %.1f%s\n",
                         std::string(prefix), r.Label(), r.latency_ms, r.ap_l1,
                         r.ap_l2, r.flag.empty() ? "" : "  [" + r.flag + "]");
}

absl::Status RunPareto(const Context& ctx, const ParetoOptions& opts) {
  Manifest manifest("pareto", ctx.args);
  absl::StatusOr<std::vector<ModelRecord>> records;
  if (opts.registry.empty()) {
    records = LoadBundledRegistry();
    manifest.AddInput("<bundled paper_tables.csv>", BundledRegistryCsv());
  } else {
    records = ReadInput<std::vector<ModelRecord>>(opts.registry, ParseRegistry,
                                                  &manifest);
  }
  if (!records.ok()) return records.status();
  if (!opts.framework.empty()) {
    absl::StatusOr<Framework> fw = ParseFramework(opts.framework);
    if (!fw.ok()) return fw.status();
    *records = FilterFramework(*records, *fw);
  }
  if (records->empty()) {
    return absl::InvalidArgumentError("registry has no matching records");
  }

  const std::vector<ModelRecord> frontier = ParetoFrontier(*records);
  absl::StatusOr<ModelRecord> best = BestUnderLatency(*records, opts.budget_ms);
  ctx.out << absl::StrFormat("Pareto frontier (%d of %d records):\n",
                             frontier.size(), records->size());
  for (const auto& r : frontier) PrintRecord(ctx.out, "  ", r);
  if (best.ok()) {
    ctx.out << absl::StrFormat("best under %g ms/frame:\n", opts.budget_ms);
    PrintRecord(ctx.out, "  ", *best);
  } else {
    ctx.out << best.status().message() << "\n";
  }

  if (!opts.compare.empty()) {
    std::vector<std::string> names = absl::StrSplit(opts.compare, ',');
    if (names.size() != 2) {
      return absl::InvalidArgumentError(
          "--compare takes two series: SERIES_A,SERIES_B");
    }
    absl::StatusOr<SeriesKey> a = ParseSeriesKey(names[0]);
    if (!a.ok()) return a.status();
    absl::StatusOr<SeriesKey> b = ParseSeriesKey(names[1]);
    if (!b.ok()) return b.status();
    absl::StatusOr<ScalingComparison> cmp = CompareScaling(*records, *a, *b);
    if (!cmp.ok()) return cmp.status();
    for (const auto* facts : {&cmp->a_dominates_b, &cmp->b_dominates_a}) {
      for (const auto& f : *facts) {
        ctx.out << absl::StrFormat("  %s dominates %s\n", f.dominator.Label(),
                                   f.dominated.Label());
      }
    }
    for (const auto& g : cmp->matched_gaps) {
      ctx.out << absl::StrFormat("  %s vs %s: %+.1f AP/L1 at %.1f/%.1f ms\n",
                                 g.record.Label(), g.reference.Label(),
                                 g.ap_l1_gap, g.record.latency_ms,
                                 g.reference.latency_ms);
    }
  }

  std::string primary;
  if (!opts.out.empty()) {
    if (absl::Status s = WriteValidated(
            opts.out, RegistryToCsv(frontier), &manifest,
            [](const std::string& t) { return CheckParses(ParseRegistry(t)); });
        !s.ok()) {
      return s;
    }
    primary = opts.out;
  }
  if (!opts.json.empty()) {
    if (absl::Status s = WriteValidated(
            opts.json,
            FrontierToJson(frontier, best.ok() ? &*best : nullptr,
                           opts.budget_ms),
            &manifest);
        !s.ok()) {
      return s;
    }
    if (primary.empty()) primary = opts.json;
  }
  if (!opts.series_json.empty()) {
    if (absl::Status s = WriteValidated(opts.series_json,
                                        SeriesToJson(*records), &manifest);
        !s.ok()) {
      return s;
    }
    if (primary.empty()) primary = opts.series_json;
  }
  if (!best.ok()) return best.status();
  if (!primary.empty()) return WriteManifest(ctx, manifest, primary);
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// bench

struct BenchCliOptions {
  std::string scenes;
  bool one_stage = false;
  bool parallel = false;
  int warmup = 10;
  int iterations = 50;
  std::string out;
  std::string raw;
};

absl::Status RunBench(const Context& ctx, const BenchCliOptions& opts) {
  Manifest manifest("bench", ctx.args);
  absl::StatusOr<RunConfig> config = LoadConfig(ctx, &manifest);
  if (!config.ok()) return config.status();
  PipelineConfig pipeline = config->pipeline;
  if (opts.one_stage) pipeline.anchor_spec = AnchorSpec::OneStage();
  manifest.SetConfig(*config);
  if (absl::Status s = pipeline.Validate(); !s.ok()) return s;

  absl::StatusOr<std::vector<Frame>> frames;
  if (opts.scenes.empty()) {
    frames = GenerateScenes(config->scene);
  } else {
    frames = ReadInput<std::vector<Frame>>(opts.scenes, ParseScenesJsonl,
                                           &manifest);
  }
  if (!frames.ok()) return frames.status();
  if (frames->empty()) return absl::InvalidArgumentError("no frames to time");

  const OracleHead head(config->oracle);
  std::size_t next = 0;
  BenchClosure closure;
  if (opts.parallel) {
    // One iteration is the whole scene set; stage timing is not available.
    closure = [&](StageTimer*) -> absl::Status {
      if (opts.one_stage) {
        return RunOneStageBatch(*frames, head, pipeline, ctx.jobs).status();
      }
      return RunTwoStageBatch(*frames, head, pipeline, ctx.jobs).status();
    };
  } else {
    // One iteration is one frame, cycling through the scene set.
    closure = [&](StageTimer* timer) -> absl::Status {
      const Frame& frame = (*frames)[next++ % frames->size()];
      RunOptions run;
      run.timer = timer;
      if (opts.one_stage) {
        return RunOneStage(frame, head, pipeline, run).status();
      }
      return RunTwoStage(frame, head, pipeline, run).status();
    };
  }
  absl::StatusOr<BenchStats> stats =
      Measure(closure, BenchOptions{opts.warmup, opts.iterations});
  if (!stats.ok()) return stats.status();

  ctx.out << absl::StrFormat(
      "%s: mean %.3f ms  p50 %.3f  p90 %.3f  std %.3f  (n=%d%s)\n",
      opts.parallel ? "scene set" : "per frame", stats->total.mean_ms,
      stats->total.p50_ms, stats->total.p90_ms, stats->total.std_ms,
      stats->total.n_iterations,
      opts.parallel ? absl::StrCat(", ", frames->size(), " frames") : "");
  for (const auto& s : stats->stages) {
    ctx.out << absl::StrFormat("  %-12s mean %.3f ms  p50 %.3f  p90 %.3f\n",
                               s.name, s.mean_ms, s.p50_ms, s.p90_ms);
  }
  if (!opts.out.empty()) {
    if (absl::Status s = WriteValidated(opts.out, BenchStatsToJson(*stats),
                                        &manifest);
        !s.ok()) {
      return s;
    }
  }
  if (!opts.raw.empty()) {
    if (absl::Status s = WriteValidated(opts.raw, RawSamplesCsv(*stats),
                                        &manifest);
        !s.ok()) {
      return s;
    }
  }
  if (!opts.out.empty()) return WriteManifest(ctx, manifest, opts.out);
  return absl::OkStatus();
}

int DefaultJobs() {
  const char* env = std::getenv(kJobsEnvVar);
  int jobs = 1;
  if (env != nullptr && absl::SimpleAtoi(env, &jobs) && jobs >= 1) return jobs;
  return 1;
}

}  // namespace

int RunCommand(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  Context ctx{out, err, args, "", "", 1};
  ctx.jobs = DefaultJobs();

  CLI::App app{"Post-processing, evaluation and scaling analysis for "
               "anchor-based driving-scene detectors",
               "drivedet"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.add_option("--config", ctx.config_path,
                 "JSON run config (scene, oracle, pipeline, eval sections)")
      ->check(CLI::ExistingFile);
  app.add_option("--jobs", ctx.jobs,
                 absl::StrCat("Frames processed in parallel (default $",
                              kJobsEnvVar, " or 1)"))
      ->check(CLI::PositiveNumber);
  app.add_option("--manifest", ctx.manifest_path,
                 "Manifest path (default: <primary output>.manifest.json)");

  SynthOptions synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate synthetic scenes");
  synth_cmd->add_option("--seed", synth.seed, "Scene seed");
  synth_cmd->add_option("--oracle-seed", synth.oracle_seed,
                        "Oracle head seed (for --head-out)");
  synth_cmd->add_option("--frames", synth.frames, "Number of frames");
  synth_cmd->add_option("--out", synth.out, "Scenes JSONL output")->required();
  synth_cmd->add_option("--head-out", synth.head_out,
                        "Also record oracle head outputs for replay");
  synth_cmd->add_option("--head-mode", synth.head_mode,
                        "Which head outputs to record")
      ->check(CLI::IsMember({"two_stage", "one_stage", "both"}));

  DetectOptions detect;
  CLI::App* detect_cmd =
      app.add_subcommand("detect", "Run a detection pipeline over scenes");
  detect_cmd->add_option("--scenes", detect.scenes, "Scenes JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  detect_cmd->add_option("--replay", detect.replay,
                         "Recorded head outputs (default: oracle head)")
      ->check(CLI::ExistingFile);
  detect_cmd->add_flag("--one-stage", detect.one_stage,
                       "One-stage path (9 anchors per location)");
  detect_cmd->add_option("--precision", detect.precision,
                         "full or half_emulated");
  detect_cmd->add_option("--num-proposals", detect.num_proposals);
  detect_cmd->add_option("--rpn-nms", detect.rpn_nms,
                         "Proposal NMS IoU threshold");
  detect_cmd->add_option("--final-nms", detect.final_nms,
                         "Final detection NMS IoU threshold");
  detect_cmd->add_option("--oracle-seed", detect.oracle_seed);
  detect_cmd->add_option("--out", detect.out, "Detections JSONL output")
      ->required();
  detect_cmd->add_option("--diagnostics", detect.diagnostics,
                         "Per-stage quality JSONL (default <out>.stages.jsonl)");

  EvalOptions eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Compute AP/L1 and AP/L2");
  eval_cmd->add_option("--detections", eval.detections)
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--scenes", eval.scenes, "Ground truth scenes JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval.out, "Metrics JSON output")->required();

  AblateOptions ablate;
  CLI::App* ablate_cmd = app.add_subcommand(
      "ablate", "Run the cumulative detector improvement ladder");
  ablate_cmd->add_option("--seed", ablate.seed, "Scene and oracle seed");
  ablate_cmd->add_option("--frames", ablate.frames);
  ablate_cmd->add_flag("--with-latency", ablate.with_latency,
                       "Also time each step (output no longer reproducible)");
  ablate_cmd->add_option("--out", ablate.out, "Delta table CSV output");

  ParetoOptions pareto;
  CLI::App* pareto_cmd = app.add_subcommand(
      "pareto", "Speed/accuracy frontier and latency-constrained selection");
  pareto_cmd->add_option("--registry", pareto.registry,
                         "Registry CSV (default: bundled measurement tables)")
      ->check(CLI::ExistingFile);
  pareto_cmd->add_option("--framework", pareto.framework,
                         "Restrict to CRCNN-RS, RetinaNet-RS or external");
  pareto_cmd->add_option("--budget-ms", pareto.budget_ms,
                         "Latency budget in ms/frame")
      ->capture_default_str();
  pareto_cmd->add_option("--out", pareto.out, "Frontier CSV output");
  pareto_cmd->add_option("--json", pareto.json,
                         "Frontier and selection JSON output");
  pareto_cmd->add_option("--series-json", pareto.series_json,
                         "All records grouped by model family, for plotting");
  pareto_cmd->add_option("--compare", pareto.compare,
                         "Cross-dominance of two series, e.g. SN49,SN49x0.25");

  BenchCliOptions bench;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Time a pipeline configuration");
  bench_cmd->add_option("--scenes", bench.scenes,
                        "Scenes JSONL (default: generate from config)")
      ->check(CLI::ExistingFile);
  bench_cmd->add_flag("--one-stage", bench.one_stage);
  bench_cmd->add_flag("--parallel", bench.parallel,
                      "Time whole scene sets with --jobs threads");
  bench_cmd->add_option("--warmup", bench.warmup)->capture_default_str();
  bench_cmd->add_option("--iterations", bench.iterations)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", bench.out, "Stats JSON output");
  bench_cmd->add_option("--raw", bench.raw, "Raw samples CSV output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "drivedet: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  absl::Status status;
  if (synth_cmd->parsed()) {
    status = RunSynth(ctx, synth);
  } else if (detect_cmd->parsed()) {
    status = RunDetect(ctx, detect);
  } else if (eval_cmd->parsed()) {
    status = RunEval(ctx, eval);
  } else if (ablate_cmd->parsed()) {
    status = RunAblate(ctx, ablate);
  } else if (pareto_cmd->parsed()) {
    status = RunPareto(ctx, pareto);
  } else if (bench_cmd->parsed()) {
    status = RunBench(ctx, bench);
  }
  if (!status.ok()) {
    err << "drivedet: " << status.message() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace drivedet

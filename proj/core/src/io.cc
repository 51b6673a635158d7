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
#include "drivedet/io.h"

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "absl/strings/string_view.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "nlohmann/json.hpp"

namespace drivedet {
namespace {

using Json = nlohmann::ordered_json;

Json BoxJson(const Box& b) { return Json::array({b.ymin, b.xmin, b.ymax, b.xmax}); }

Box BoxFrom(const Json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw std::invalid_argument("box must be [ymin, xmin, ymax, xmax]");
  }
  Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
        j[3].get<double>()};
  if (!b.IsValid()) throw std::invalid_argument("box has max < min");
  return b;
}

Json LevelJson(const LevelOutputs& l) {
  Json deltas = Json::array();
  for (const auto& d : l.deltas) deltas.push_back({d.ty, d.tx, d.th, d.tw});
  return Json{{"num_classes", l.num_classes},
              {"scores", l.scores},
              {"deltas", std::move(deltas)}};
}

LevelOutputs LevelFrom(const Json& j) {
  LevelOutputs l;
  l.num_classes = j.at("num_classes").get<int>();
  l.scores = j.at("scores").get<std::vector<double>>();
  for (const auto& d : j.at("deltas")) {
    if (!d.is_array() || d.size() != 4) {
      throw std::invalid_argument("delta must be [ty, tx, th, tw]");
    }
    l.deltas.push_back({d[0].get<double>(), d[1].get<double>(),
                        d[2].get<double>(), d[3].get<double>()});
  }
  if (l.num_classes < 1 ||
      l.scores.size() != l.deltas.size() * static_cast<std::size_t>(l.num_classes)) {
    throw std::invalid_argument("scores/deltas size mismatch");
  }
  return l;
}

std::vector<LevelOutputs> LevelsFrom(const Json& j) {
  std::vector<LevelOutputs> out;
  for (const auto& l : j) out.push_back(LevelFrom(l));
  return out;
}

Json LevelsJson(const std::vector<LevelOutputs>& levels) {
  Json out = Json::array();
  for (const auto& l : levels) out.push_back(LevelJson(l));
  return out;
}

int ClassFrom(const Json& j) {
  const int c = j.get<int>();
  if (!IsKnownClass(c)) {
    throw std::invalid_argument(absl::StrCat("unknown class_id ", c));
  }
  return c;
}

// Applies `parse` to every non-blank line, prefixing errors with the line
// number.
template <typename T, typename Fn>
absl::StatusOr<std::vector<T>> ParseLines(absl::string_view text, Fn parse) {
  std::vector<T> out;
  int line = 0;
  for (absl::string_view raw : absl::StrSplit(text, '\n')) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == absl::string_view::npos) continue;
    try {
      out.push_back(parse(Json::parse(raw)));
    } catch (const std::exception& e) {
      return absl::InvalidArgumentError(
          absl::StrFormat("line %d: %s", line, e.what()));
    }
  }
  return out;
}

Json QualityJson(const StageQuality& q) {
  return Json{{"mean_matched_iou", q.mean_matched_iou},
              {"matched_count", q.matched_count},
              {"num_proposals", q.num_proposals},
              {"fg_fraction", q.fg_fraction}};
}

// Reads fields of one config section and rejects unknown keys.
class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) {
      throw std::invalid_argument(absl::StrCat(name_, " must be an object"));
    }
  }

  template <typename T>
  void Get(const char* key, T* out) {
    seen_.insert(key);
    if (j_.contains(key)) *out = j_.at(key).template get<T>();
  }
  bool Has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const Json& At(const char* key) const { return j_.at(key); }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) {
        throw std::invalid_argument(
            absl::StrCat("unknown field '", name_, ".", key, "'"));
      }
    }
  }

 private:
  const Json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

template <typename T>
T OrThrow(absl::StatusOr<T> v) {
  if (!v.ok()) throw std::invalid_argument(std::string(v.status().message()));
  return *std::move(v);
}

int ClassIdByName(const std::string& name) {
  for (int c = 0; c < kNumClasses; ++c) {
    if (kClassNames[c] == name) return c;
  }
  throw std::invalid_argument(absl::StrCat("unknown class '", name, "'"));
}

void ReadScene(const Json& j, SceneConfig* c) {
  Section s(j, "scene");
  s.Get("image_h", &c->image_h);
  s.Get("image_w", &c->image_w);
  s.Get("frames", &c->frames);
  if (s.Has("objects_per_frame")) {
    const auto range = s.At("objects_per_frame").get<std::vector<int>>();
    if (range.size() != 2) {
      throw std::invalid_argument("objects_per_frame must be [min, max]");
    }
    c->min_objects = range[0];
    c->max_objects = range[1];
  }
  if (s.Has("class_mix")) {
    const auto mix = s.At("class_mix").get<std::vector<double>>();
    if (mix.size() != kNumClasses) {
      throw std::invalid_argument(
          "class_mix must list vehicle, pedestrian, cyclist probabilities");
    }
    std::copy(mix.begin(), mix.end(), c->class_mix.begin());
  }
  s.Get("size_log_mean", &c->size_log_mean);
  s.Get("size_log_std", &c->size_log_std);
  s.Get("crowd_cluster_prob", &c->crowd_cluster_prob);
  s.Get("max_gt_iou", &c->max_gt_iou);
  s.Get("l2_area_threshold", &c->l2_area_threshold);
  s.Get("seed", &c->seed);
  s.Finish();
}

void ReadOracle(const Json& j, OracleHeadConfig* c) {
  Section s(j, "oracle");
  s.Get("score_noise_std", &c->score_noise_std);
  s.Get("object_noise_std_per_stage", &c->object_noise_std_per_stage);
  s.Get("delta_noise_std_per_stage", &c->delta_noise_std_per_stage);
  s.Get("fp_rate", &c->fp_rate);
  s.Get("seed", &c->seed);
  s.Finish();
}

void ReadPipeline(const Json& j, PipelineConfig* c) {
  Section s(j, "pipeline");
  s.Get("min_level", &c->min_level);
  s.Get("max_level", &c->max_level);
  if (s.Has("anchor_spec")) {
    Section a(s.At("anchor_spec"), "pipeline.anchor_spec");
    a.Get("aspect_ratios", &c->anchor_spec.aspect_ratios);
    a.Get("octave_scales", &c->anchor_spec.octave_scales);
    a.Get("base_size_multiplier", &c->anchor_spec.base_size_multiplier);
    a.Finish();
  }
  s.Get("pre_nms_top_k", &c->pre_nms_top_k);
  s.Get("rpn_score_threshold", &c->rpn_score_threshold);
  s.Get("num_proposals", &c->num_proposals);
  s.Get("rpn_nms_threshold", &c->rpn_nms_threshold);
  s.Get("final_nms_threshold", &c->final_nms_threshold);
  if (s.Has("cascade")) {
    Section cs(s.At("cascade"), "pipeline.cascade");
    cs.Get("stage_fg_thresholds", &c->cascade.stage_fg_thresholds);
    cs.Finish();
  }
  if (s.Has("stage_score_mode")) {
    c->stage_score_mode =
        OrThrow(ParseStageScoreMode(s.At("stage_score_mode").get<std::string>()));
  }
  s.Get("score_threshold", &c->score_threshold);
  s.Get("max_detections", &c->max_detections);
  if (s.Has("precision")) {
    c->precision = PrecisionPolicy::Uniform(
        OrThrow(ParsePrecisionMode(s.At("precision").get<std::string>())));
  }
  if (s.Has("decode_precision")) {
    c->precision.decode =
        OrThrow(ParsePrecisionMode(s.At("decode_precision").get<std::string>()));
  }
  if (s.Has("score_precision")) {
    c->precision.score =
        OrThrow(ParsePrecisionMode(s.At("score_precision").get<std::string>()));
  }
  s.Finish();
}

void ReadEval(const Json& j, EvalConfig* c) {
  Section s(j, "eval");
  if (s.Has("iou_thresholds")) {
    c->iou_thresholds.clear();
    for (const auto& [name, value] : s.At("iou_thresholds").items()) {
      c->iou_thresholds[ClassIdByName(name)] = value.get<double>();
    }
  }
  s.Get("recall_points", &c->recall_points);
  s.Finish();
}

}  // namespace

std::string ScenesToJsonl(absl::Span<const Frame> frames) {
  std::string out;
  for (const auto& f : frames) {
    Json gts = Json::array();
    for (const auto& g : f.gts) {
      gts.push_back(Json{{"box", BoxJson(g.box)},
                         {"class_id", g.class_id},
                         {"difficulty", std::string(DifficultyName(g.difficulty))}});
    }
    Json j{{"frame_id", f.frame_id},
           {"width", f.width},
           {"height", f.height},
           {"gts", std::move(gts)}};
    absl::StrAppend(&out, j.dump(), "\n");
  }
  return out;
}

absl::StatusOr<std::vector<Frame>> ParseScenesJsonl(absl::string_view text) {
  return ParseLines<Frame>(text, [](const Json& j) {
    Frame f;
    f.frame_id = j.at("frame_id").get<std::string>();
    f.width = j.at("width").get<int>();
    f.height = j.at("height").get<int>();
    if (f.width <= 0 || f.height <= 0) {
      throw std::invalid_argument("frame size must be positive");
    }
    for (const auto& g : j.at("gts")) {
      GroundTruth gt;
      gt.frame_id = f.frame_id;
      gt.box = BoxFrom(g.at("box"));
      gt.class_id = ClassFrom(g.at("class_id"));
      gt.difficulty =
          OrThrow(ParseDifficulty(g.at("difficulty").get<std::string>()));
      f.gts.push_back(std::move(gt));
    }
    return f;
  });
}

std::string DetectionsToJsonl(absl::Span<const Detection> detections) {
  std::string out;
  for (const auto& d : detections) {
    Json j{{"frame_id", d.frame_id},
           {"box", BoxJson(d.box)},
           {"class_id", d.class_id},
           {"score", d.score}};
    absl::StrAppend(&out, j.dump(), "\n");
  }
  return out;
}

absl::StatusOr<std::vector<Detection>> ParseDetectionsJsonl(
    absl::string_view text) {
  return ParseLines<Detection>(text, [](const Json& j) {
    Detection d;
    d.frame_id = j.at("frame_id").get<std::string>();
    d.box = BoxFrom(j.at("box"));
    d.class_id = j.at("class_id").get<int>();
    d.score = j.at("score").get<double>();
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
      throw std::invalid_argument("score must be in [0, 1]");
    }
    return d;
  });
}

std::string HeadRecordsToJsonl(absl::Span<const HeadRecord> records) {
  std::string out;
  for (const auto& r : records) {
    Json j{{"frame_id", r.frame_id},
           {"rpn", LevelsJson(r.rpn)},
           {"stages", LevelsJson(r.stages)},
           {"dense", LevelsJson(r.dense)}};
    absl::StrAppend(&out, j.dump(), "\n");
  }
  return out;
}

absl::StatusOr<std::vector<HeadRecord>> ParseHeadRecordsJsonl(
    absl::string_view text) {
  return ParseLines<HeadRecord>(text, [](const Json& j) {
    HeadRecord r;
    r.frame_id = j.at("frame_id").get<std::string>();
    r.rpn = LevelsFrom(j.at("rpn"));
    r.stages = LevelsFrom(j.at("stages"));
    r.dense = LevelsFrom(j.at("dense"));
    return r;
  });
}

std::string EvalResultToJson(const EvalResult& result) {
  Json per_class = Json::object();
  for (const auto& [class_id, c] : result.per_class) {
    const std::string name = IsKnownClass(class_id)
                                 ? std::string(kClassNames[class_id])
                                 : absl::StrCat("class_", class_id);
    per_class[name] = Json{{"class_id", class_id},
                           {"ap_l1", c.ap_l1},
                           {"ap_l2", c.ap_l2},
                           {"num_gt_l1", c.num_gt_l1},
                           {"num_gt_l2", c.num_gt_l2},
                           {"num_detections", c.num_detections},
                           {"tp_l1", c.tp_l1},
                           {"tp_l2", c.tp_l2}};
  }
  Json j{{"ap_l1", result.ap_l1},
         {"ap_l2", result.ap_l2},
         {"per_class", std::move(per_class)}};
  return j.dump(2) + "\n";
}

absl::StatusOr<EvalResult> ParseEvalResultJson(absl::string_view text) {
  try {
    const Json j = Json::parse(text);
    EvalResult r;
    r.ap_l1 = j.at("ap_l1").get<double>();
    r.ap_l2 = j.at("ap_l2").get<double>();
    for (const auto& [name, c] : j.at("per_class").items()) {
      ClassResult cr;
      cr.ap_l1 = c.at("ap_l1").get<double>();
      cr.ap_l2 = c.at("ap_l2").get<double>();
      cr.num_gt_l1 = c.at("num_gt_l1").get<std::size_t>();
      cr.num_gt_l2 = c.at("num_gt_l2").get<std::size_t>();
      cr.num_detections = c.at("num_detections").get<std::size_t>();
      cr.tp_l1 = c.at("tp_l1").get<std::size_t>();
      cr.tp_l2 = c.at("tp_l2").get<std::size_t>();
      r.per_class[c.at("class_id").get<int>()] = cr;
    }
    return r;
  } catch (const std::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed metrics JSON: ", e.what()));
  }
}

std::string DiagnosticsToJsonl(absl::Span<const FrameDiagnostics> diagnostics) {
  std::string out;
  for (const auto& d : diagnostics) {
    Json stages = Json::array();
    for (const auto& q : d.stage_quality) stages.push_back(QualityJson(q));
    Json j{{"frame_id", d.frame_id},
           {"num_proposals", d.num_proposals},
           {"proposals", QualityJson(d.proposal_quality)},
           {"stages", std::move(stages)}};
    absl::StrAppend(&out, j.dump(), "\n");
  }
  return out;
}

absl::StatusOr<RunConfig> ParseRunConfig(absl::string_view json_text) {
  RunConfig config;
  try {
    const Json j = Json::parse(json_text);
    Section root(j, "config");
    if (root.Has("scene")) ReadScene(root.At("scene"), &config.scene);
    if (root.Has("oracle")) ReadOracle(root.At("oracle"), &config.oracle);
    if (root.Has("pipeline")) {
      ReadPipeline(root.At("pipeline"), &config.pipeline);
    }
    if (root.Has("eval")) ReadEval(root.At("eval"), &config.eval);
    root.Finish();
  } catch (const std::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("config: ", e.what()));
  }
  return config;
}

std::string RunConfigToJson(const RunConfig& config) {
  const SceneConfig& s = config.scene;
  const OracleHeadConfig& o = config.oracle;
  const PipelineConfig& p = config.pipeline;
  Json iou = Json::object();
  for (const auto& [class_id, t] : config.eval.iou_thresholds) {
    iou[std::string(kClassNames[class_id])] = t;
  }
  Json j{
      {"scene",
       {{"image_h", s.image_h},
        {"image_w", s.image_w},
        {"frames", s.frames},
        {"objects_per_frame", {s.min_objects, s.max_objects}},
        {"class_mix", s.class_mix},
        {"size_log_mean", s.size_log_mean},
        {"size_log_std", s.size_log_std},
        {"crowd_cluster_prob", s.crowd_cluster_prob},
        {"max_gt_iou", s.max_gt_iou},
        {"l2_area_threshold", s.l2_area_threshold},
        {"seed", s.seed}}},
      {"oracle",
       {{"score_noise_std", o.score_noise_std},
        {"object_noise_std_per_stage", o.object_noise_std_per_stage},
        {"delta_noise_std_per_stage", o.delta_noise_std_per_stage},
        {"fp_rate", o.fp_rate},
        {"seed", o.seed}}},
      {"pipeline",
       {{"min_level", p.min_level},
        {"max_level", p.max_level},
        {"anchor_spec",
         {{"aspect_ratios", p.anchor_spec.aspect_ratios},
          {"octave_scales", p.anchor_spec.octave_scales},
          {"base_size_multiplier", p.anchor_spec.base_size_multiplier}}},
        {"pre_nms_top_k", p.pre_nms_top_k},
        {"rpn_score_threshold", p.rpn_score_threshold},
        {"num_proposals", p.num_proposals},
        {"rpn_nms_threshold", p.rpn_nms_threshold},
        {"final_nms_threshold", p.final_nms_threshold},
        {"cascade", {{"stage_fg_thresholds", p.cascade.stage_fg_thresholds}}},
        {"stage_score_mode", std::string(StageScoreModeName(p.stage_score_mode))},
        {"score_threshold", p.score_threshold},
        {"max_detections", p.max_detections},
        {"decode_precision", std::string(PrecisionModeName(p.precision.decode))},
        {"score_precision", std::string(PrecisionModeName(p.precision.score))}}},
      {"eval",
       {{"iou_thresholds", std::move(iou)},
        {"recall_points", config.eval.recall_points}}}};
  return j.dump(2) + "\n";
}

namespace {

Json RecordJson(const ModelRecord& r) {
  Json j{{"label", r.Label()},
         {"framework", std::string(FrameworkName(r.framework))},
         {"backbone", r.backbone},
         {"input_h", r.input_h},
         {"input_w", r.input_w},
         {"latency_ms", r.latency_ms},
         {"ap_l1", r.ap_l1},
         {"ap_l2", r.ap_l2},
         {"flag", r.flag}};
  j["params_m"] = r.params_m ? Json(*r.params_m) : Json(nullptr);
  j["flops_b"] = r.flops_b ? Json(*r.flops_b) : Json(nullptr);
  return j;
}

}  // namespace

std::string FrontierToJson(absl::Span<const ModelRecord> frontier,
                           const ModelRecord* selected, double budget_ms) {
  Json points = Json::array();
  for (const auto& r : frontier) points.push_back(RecordJson(r));
  Json j{{"frontier", std::move(points)}};
  if (selected != nullptr) {
    j["budget_ms"] = budget_ms;
    j["selected"] = RecordJson(*selected);
  }
  return j.dump(2) + "\n";
}

std::string SeriesToJson(absl::Span<const ModelRecord> records) {
  Json series = Json::array();
  for (const auto& [key, members] : GroupSeries(records)) {
    Json points = Json::array();
    for (const auto& r : members) points.push_back(RecordJson(r));
    series.push_back(Json{{"series", SeriesName(key)},
                          {"points", std::move(points)}});
  }
  return Json{{"series", std::move(series)}}.dump(2) + "\n";
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

absl::Status WriteFile(const std::string& path, absl::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  if (!out) return absl::DataLossError(absl::StrCat("failed writing ", path));
  return absl::OkStatus();
}

}  // namespace drivedet

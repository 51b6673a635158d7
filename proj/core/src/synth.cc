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
#include "drivedet/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <utility>

#include "absl/strings/str_format.h"
#include "drivedet/rng.h"

namespace drivedet {
namespace {

constexpr int kMaxPlacementAttempts = 200;
constexpr int kMaxCrowdAttempts = 50;
constexpr double kAspectJitterStd = 0.15;
// Crowd centers land within +-kCrowdSpread/2 sizes of their neighbor.
constexpr double kCrowdSpread = 1.0;

// Stream tags mixed into oracle seeds.
enum Stream : std::uint64_t { kRpnStream = 1, kStageStream, kDenseStream,
                              kFalsePositiveStream, kObjectStream };

int SampleClass(const std::array<double, kNumClasses>& mix, Rng& rng) {
  const double u = rng.Uniform();
  double acc = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    acc += mix[c];
    if (u < acc) return c;
  }
  return kNumClasses - 1;
}

bool FitsAmong(const Box& box, const std::vector<GroundTruth>& existing,
               double max_iou) {
  for (const auto& g : existing) {
    if (Iou(box, g.box) > max_iou) return false;
  }
  return true;
}

absl::StatusOr<Frame> GenerateFrame(const SceneConfig& config, int index) {
  Rng rng(DeriveSeed(config.seed, {static_cast<std::uint64_t>(index)}));
  Frame frame;
  frame.frame_id = absl::StrFormat("frame_%06d", index);
  frame.height = config.image_h;
  frame.width = config.image_w;
  const double H = config.image_h;
  const double W = config.image_w;

  const int span = config.max_objects - config.min_objects + 1;
  const int count =
      config.min_objects + static_cast<int>(rng.UniformInt(
                               static_cast<std::uint64_t>(span)));
  for (int n = 0; n < count; ++n) {
    int class_id = SampleClass(config.class_mix, rng);
    // Crowded objects cluster around, and share the class of, an earlier one.
    const GroundTruth* neighbor = nullptr;
    if (!frame.gts.empty() && rng.Bernoulli(config.crowd_cluster_prob)) {
      neighbor = &frame.gts[rng.UniformInt(frame.gts.size())];
      class_id = neighbor->class_id;
    }
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed;
         ++attempt) {
      const double edge = std::exp(rng.Normal(config.size_log_mean,
                                              config.size_log_std));
      const double aspect =
          kClassAspect[class_id] * std::exp(rng.Normal(0.0, kAspectJitterStd));
      const double h = edge * std::sqrt(aspect);
      const double w = edge / std::sqrt(aspect);
      const double u = rng.Uniform();
      const double v = rng.Uniform();
      if (h > H || w > W) continue;

      Box box;
      const bool near = neighbor != nullptr && attempt < kMaxCrowdAttempts;
      if (near) {
        const Box& o = neighbor->box;
        const double cy = o.CenterY() + (u - 0.5) * kCrowdSpread * o.Height();
        const double cx = o.CenterX() + (v - 0.5) * kCrowdSpread * o.Width();
        const double ymin = std::clamp(cy - 0.5 * h, 0.0, H - h);
        const double xmin = std::clamp(cx - 0.5 * w, 0.0, W - w);
        box = Box{ymin, xmin, ymin + h, xmin + w};
      } else {
        const double ymin = u * (H - h);
        const double xmin = v * (W - w);
        box = Box{ymin, xmin, ymin + h, xmin + w};
      }
      if (near && Iou(box, neighbor->box) <= 0.0) continue;
      if (!FitsAmong(box, frame.gts, config.max_gt_iou)) continue;

      GroundTruth gt;
      gt.frame_id = frame.frame_id;
      gt.box = box;
      gt.class_id = class_id;
      gt.difficulty = box.Area() < config.l2_area_threshold
                          ? Difficulty::kLevel2
                          : Difficulty::kLevel1;
      frame.gts.push_back(std::move(gt));
      placed = true;
    }
    if (!placed) {
      return absl::ResourceExhaustedError(absl::StrFormat(
          "could not place object %d of frame %d without exceeding IoU %g; "
          "scene too crowded for a %dx%d image",
          n, index, config.max_gt_iou, config.image_h, config.image_w));
    }
  }
  return frame;
}

struct BestMatch {
  int index = -1;
  double iou = 0.0;
};

BestMatch FindBest(const Box& ref, const std::vector<GroundTruth>& gts) {
  BestMatch best;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    const double v = Iou(ref, gts[g].box);
    if (v > best.iou) {
      best.iou = v;
      best.index = static_cast<int>(g);
    }
  }
  return best;
}

// Where the head believes each object is: the ground truth moved by one
// shared error, so all references on an object regress to nearby boxes.
std::vector<Box> ObjectTargets(const Frame& frame, double std, Rng& rng) {
  std::vector<Box> targets;
  targets.reserve(frame.gts.size());
  for (const auto& g : frame.gts) {
    if (std == 0.0) {
      targets.push_back(g.box);
      continue;
    }
    BoxDelta d;
    d.ty = rng.Normal(0.0, std);
    d.tx = rng.Normal(0.0, std);
    d.th = rng.Normal(0.0, std);
    d.tw = rng.Normal(0.0, std);
    targets.push_back(Decode(d, g.box, std::nullopt));
  }
  return targets;
}

// Noise as a function of the reference box rather than of its position in
// the batch, so a prediction does not depend on which other references were
// scored alongside it. Fixed references (anchors) hash their exact grid cell.
// Moving references (proposals, refined boxes) interpolate standard normals
// drawn at the 16 surrounding corners of a 4-D lattice over box coordinates,
// which makes the noise continuous in the box: a slightly moved box, e.g. one
// decoded in lower precision, gets slightly different noise instead of an
// independent draw.
class KeyedNoise {
 public:
  enum class Mode { kCell, kSmooth };

  KeyedNoise(std::uint64_t stream, const Box& ref, Mode mode) {
    const double coords[4] = {ref.ymin, ref.xmin, ref.ymax, ref.xmax};
    if (mode == Mode::kCell) {
      corners_[num_corners_++] = {
          DeriveSeed(stream, {Cell(coords[0]), Cell(coords[1]),
                              Cell(coords[2]), Cell(coords[3])}),
          1.0};
      norm_ = 1.0;
      return;
    }
    double lo[4], frac[4];
    for (int d = 0; d < 4; ++d) {
      lo[d] = std::floor(coords[d] / kCellPx);
      frac[d] = coords[d] / kCellPx - lo[d];
    }
    double sum_sq = 0.0;
    for (int corner = 0; corner < 16; ++corner) {
      std::uint64_t cell[4];
      double weight = 1.0;
      for (int d = 0; d < 4; ++d) {
        const bool up = (corner >> d) & 1;
        cell[d] = static_cast<std::uint64_t>(static_cast<std::int64_t>(lo[d]) +
                                             (up ? 1 : 0));
        weight *= up ? frac[d] : 1.0 - frac[d];
      }
      if (weight == 0.0) continue;
      corners_[num_corners_++] = {
          DeriveSeed(stream, {cell[0], cell[1], cell[2], cell[3]}), weight};
      sum_sq += weight * weight;
    }
    norm_ = std::sqrt(sum_sq);
  }

  // Marginally N(0, stddev^2).
  double Normal(double stddev) {
    const std::uint64_t draw = count_++;
    double z = 0.0;
    for (int i = 0; i < num_corners_; ++i) {
      z += corners_[i].weight * CornerNormal(corners_[i].key, draw);
    }
    return stddev * z / norm_;
  }

 private:
  static constexpr double kCellPx = 8.0;
  static constexpr std::uint64_t kStep = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t Cell(double v) {
    return static_cast<std::uint64_t>(
        static_cast<std::int64_t>(std::floor(v / kCellPx)));
  }
  static double Unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }
  static double CornerNormal(std::uint64_t key, std::uint64_t draw) {
    const double u1 = 1.0 - Unit(SplitMix64(key + (2 * draw + 1) * kStep));
    const double u2 = Unit(SplitMix64(key + (2 * draw + 2) * kStep));
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  struct Corner {
    std::uint64_t key;
    double weight;
  };
  std::array<Corner, 16> corners_{};
  int num_corners_ = 0;
  double norm_ = 1.0;
  std::uint64_t count_ = 0;
};

struct NoiseModel {
  std::uint64_t stream = 0;
  double score_std = 0.0;
  double delta_std = 0.0;
  KeyedNoise::Mode mode = KeyedNoise::Mode::kCell;
};

// Appends oracle predictions for `refs` to `out`.
void Predict(const Frame& frame, absl::Span<const Box> refs,
             absl::Span<const Box> targets, int num_classes,
             const NoiseModel& model, LevelOutputs* out) {
  out->num_classes = num_classes;
  out->scores.reserve(out->scores.size() + refs.size() * num_classes);
  out->deltas.reserve(out->deltas.size() + refs.size());
  for (const Box& ref : refs) {
    KeyedNoise noise(model.stream, ref, model.mode);
    const BestMatch best = FindBest(ref, frame.gts);
    const int best_class =
        best.index >= 0 ? frame.gts[static_cast<std::size_t>(best.index)].class_id
                        : -1;
    for (int c = 0; c < num_classes; ++c) {
      const bool hit = num_classes == 1 ? best.index >= 0 : c == best_class;
      const double base = hit ? best.iou : 0.0;
      out->scores.push_back(
          std::clamp(base + noise.Normal(model.score_std), 0.0, 1.0));
    }
    BoxDelta delta;
    if (best.index >= 0) {
      absl::StatusOr<BoxDelta> d =
          Encode(targets[static_cast<std::size_t>(best.index)], ref);
      if (d.ok()) delta = *d;
    }
    delta.ty += noise.Normal(model.delta_std);
    delta.tx += noise.Normal(model.delta_std);
    delta.th += noise.Normal(model.delta_std);
    delta.tw += noise.Normal(model.delta_std);
    out->deltas.push_back(delta);
  }
}

struct FalsePositive {
  Box box;
  int class_id = 0;
  double score = 0.0;
};

// Confident predictions of objects that are not there: random boxes anywhere
// in the image, drawn per frame and call independently of the references.
std::vector<FalsePositive> SampleFalsePositives(const Frame& frame, double rate,
                                                int num_classes, Rng& rng) {
  const double whole = std::floor(rate);
  const int n = static_cast<int>(whole) + (rng.Bernoulli(rate - whole) ? 1 : 0);
  std::vector<FalsePositive> fps;
  for (int i = 0; i < n; ++i) {
    const double edge = std::exp(rng.Uniform(std::log(16.0), std::log(256.0)));
    const double aspect = std::exp(rng.Normal(0.0, 0.5));
    const double h = std::min(edge * std::sqrt(aspect), 1.0 * frame.height);
    const double w = std::min(edge / std::sqrt(aspect), 1.0 * frame.width);
    const double ymin = rng.Uniform() * (frame.height - h);
    const double xmin = rng.Uniform() * (frame.width - w);
    FalsePositive fp;
    fp.box = Box{ymin, xmin, ymin + h, xmin + w};
    fp.class_id = static_cast<int>(rng.UniformInt(
        static_cast<std::uint64_t>(num_classes)));
    fp.score = rng.Uniform(0.5, 1.0);
    fps.push_back(fp);
  }
  return fps;
}

// Routes each false positive through the reference that overlaps it most
// (first on ties), so it decodes to the sampled box whichever reference
// carries it.
void InjectFalsePositives(absl::Span<const FalsePositive> fps,
                          absl::Span<const absl::Span<const Box>> refs,
                          std::vector<LevelOutputs>* outputs) {
  for (const FalsePositive& fp : fps) {
    std::size_t best_level = 0;
    std::size_t best_index = 0;
    double best_iou = -1.0;
    for (std::size_t l = 0; l < refs.size(); ++l) {
      for (std::size_t i = 0; i < refs[l].size(); ++i) {
        const double v = Iou(fp.box, refs[l][i]);
        if (v > best_iou) {
          best_iou = v;
          best_level = l;
          best_index = i;
        }
      }
    }
    if (best_iou < 0.0) continue;
    LevelOutputs& level = (*outputs)[best_level];
    absl::StatusOr<BoxDelta> d = Encode(fp.box, refs[best_level][best_index]);
    if (!d.ok()) continue;
    level.deltas[best_index] = *d;
    const auto classes = static_cast<std::size_t>(level.num_classes);
    for (std::size_t c = 0; c < classes; ++c) {
      level.scores[best_index * classes + c] =
          static_cast<int>(c) == fp.class_id ? fp.score : 0.0;
    }
  }
}

std::uint64_t FrameHash(const Frame& frame) {
  return HashString(frame.frame_id.data(), frame.frame_id.size());
}

}  // namespace

absl::Status SceneConfig::Validate() const {
  if (image_h <= 0 || image_w <= 0) {
    return absl::InvalidArgumentError("image size must be positive");
  }
  if (frames < 0) return absl::InvalidArgumentError("frames must be >= 0");
  if (min_objects < 0 || max_objects < min_objects) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "invalid objects_per_frame range (%d, %d)", min_objects, max_objects));
  }
  double total = 0.0;
  for (double p : class_mix) {
    if (!(p >= 0.0)) {
      return absl::InvalidArgumentError("class_mix entries must be >= 0");
    }
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    return absl::InvalidArgumentError(
        absl::StrFormat("class_mix must sum to 1, sums to %g", total));
  }
  if (!(size_log_std >= 0.0) || !std::isfinite(size_log_mean)) {
    return absl::InvalidArgumentError("invalid object size distribution");
  }
  if (!(crowd_cluster_prob >= 0.0 && crowd_cluster_prob <= 1.0)) {
    return absl::InvalidArgumentError("crowd_cluster_prob must be in [0, 1]");
  }
  if (!(max_gt_iou > 0.0 && max_gt_iou <= 1.0)) {
    return absl::InvalidArgumentError("max_gt_iou must be in (0, 1]");
  }
  if (!(l2_area_threshold >= 0.0)) {
    return absl::InvalidArgumentError("l2_area_threshold must be >= 0");
  }
  const double median = std::exp(size_log_mean);
  for (int c = 0; c < kNumClasses; ++c) {
    if (class_mix[c] == 0.0) continue;
    const double h = median * std::sqrt(kClassAspect[c]);
    const double w = median / std::sqrt(kClassAspect[c]);
    if (h > image_h || w > image_w) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "median %s (%.1fx%.1f px) does not fit in a %dx%d image",
          kClassNames[c], h, w, image_h, image_w));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<Frame>> GenerateScenes(const SceneConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(config.frames));
  for (int i = 0; i < config.frames; ++i) {
    absl::StatusOr<Frame> f = GenerateFrame(config, i);
    if (!f.ok()) return f.status();
    frames.push_back(*std::move(f));
  }
  return frames;
}

double ExpectedLevel2Fraction(const SceneConfig& config) {
  if (config.l2_area_threshold <= 0.0) return 0.0;
  const double log_edge = 0.5 * std::log(config.l2_area_threshold);
  if (config.size_log_std == 0.0) {
    return log_edge > config.size_log_mean ? 1.0 : 0.0;
  }
  const double z = (log_edge - config.size_log_mean) / config.size_log_std;
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

absl::Status OracleHeadConfig::Validate() const {
  if (delta_noise_std_per_stage.empty()) {
    return absl::InvalidArgumentError(
        "oracle head needs one delta noise std per cascade stage");
  }
  if (object_noise_std_per_stage.size() != delta_noise_std_per_stage.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "object_noise_std_per_stage has %d entries, "
        "delta_noise_std_per_stage has %d",
        object_noise_std_per_stage.size(), delta_noise_std_per_stage.size()));
  }
  for (double s : object_noise_std_per_stage) {
    if (!(s >= 0.0)) {
      return absl::InvalidArgumentError("object noise stds must be >= 0");
    }
  }
  if (!(score_noise_std >= 0.0) || !(fp_rate >= 0.0)) {
    return absl::InvalidArgumentError(
        "score_noise_std and fp_rate must be >= 0");
  }
  for (double s : delta_noise_std_per_stage) {
    if (!(s >= 0.0)) {
      return absl::InvalidArgumentError("delta noise stds must be >= 0");
    }
  }
  return absl::OkStatus();
}

OracleHeadConfig OracleHeadConfig::Noiseless(int num_stages) {
  OracleHeadConfig c;
  c.score_noise_std = 0.0;
  c.delta_noise_std_per_stage.assign(static_cast<std::size_t>(num_stages), 0.0);
  c.object_noise_std_per_stage = c.delta_noise_std_per_stage;
  c.fp_rate = 0.0;
  return c;
}

OracleHead::OracleHead(OracleHeadConfig config) : config_(std::move(config)) {}

int OracleHead::NumStages() const {
  return static_cast<int>(config_.delta_noise_std_per_stage.size());
}

absl::StatusOr<std::vector<LevelOutputs>> OracleHead::Rpn(
    const Frame& frame, const AnchorPyramid& anchors) const {
  if (absl::Status s = config_.Validate(); !s.ok()) return s;
  return PredictPyramid(frame, anchors, kRpnStream, 1);
}

absl::StatusOr<LevelOutputs> OracleHead::Stage(
    const Frame& frame, int stage, absl::Span<const Box> boxes) const {
  if (absl::Status s = config_.Validate(); !s.ok()) return s;
  if (stage < 0 || stage >= NumStages()) {
    return absl::OutOfRangeError(absl::StrFormat(
        "oracle head has %d stages, asked for stage %d", NumStages(),
        stage + 1));
  }
  const auto index = static_cast<std::size_t>(stage);
  const std::uint64_t frame_hash = FrameHash(frame);
  Rng object_rng(DeriveSeed(config_.seed,
                            {frame_hash, kObjectStream, kStageStream, index}));
  const std::vector<Box> targets = ObjectTargets(
      frame, config_.object_noise_std_per_stage[index], object_rng);
  NoiseModel model;
  model.stream = DeriveSeed(config_.seed, {frame_hash, kStageStream, index});
  model.score_std = config_.score_noise_std;
  model.delta_std = config_.delta_noise_std_per_stage[index];
  model.mode = KeyedNoise::Mode::kSmooth;
  std::vector<LevelOutputs> out(1);
  Predict(frame, boxes, targets, kNumClasses, model, &out[0]);
  Rng fp_rng(DeriveSeed(config_.seed,
                        {frame_hash, kFalsePositiveStream, kStageStream, index}));
  const absl::Span<const Box> refs[] = {boxes};
  InjectFalsePositives(
      SampleFalsePositives(frame, config_.fp_rate, kNumClasses, fp_rng), refs,
      &out);
  return std::move(out[0]);
}

absl::StatusOr<std::vector<LevelOutputs>> OracleHead::Dense(
    const Frame& frame, const AnchorPyramid& anchors) const {
  if (absl::Status s = config_.Validate(); !s.ok()) return s;
  return PredictPyramid(frame, anchors, kDenseStream, kNumClasses);
}

std::vector<LevelOutputs> OracleHead::PredictPyramid(
    const Frame& frame, const AnchorPyramid& anchors, std::uint64_t kind,
    int num_classes) const {
  const std::uint64_t frame_hash = FrameHash(frame);
  Rng object_rng(DeriveSeed(config_.seed, {frame_hash, kObjectStream, kind}));
  const std::vector<Box> targets = ObjectTargets(
      frame, config_.object_noise_std_per_stage.front(), object_rng);
  NoiseModel model;
  model.stream = DeriveSeed(config_.seed, {frame_hash, kind});
  model.score_std = config_.score_noise_std;
  model.delta_std = config_.delta_noise_std_per_stage.front();
  std::vector<LevelOutputs> out(anchors.levels.size());
  std::vector<absl::Span<const Box>> refs;
  for (std::size_t l = 0; l < anchors.levels.size(); ++l) {
    Predict(frame, anchors.levels[l].anchors, targets, num_classes, model,
            &out[l]);
    refs.push_back(anchors.levels[l].anchors);
  }
  Rng fp_rng(DeriveSeed(config_.seed, {frame_hash, kFalsePositiveStream, kind}));
  InjectFalsePositives(
      SampleFalsePositives(frame, config_.fp_rate, num_classes, fp_rng), refs,
      &out);
  return out;
}

}  // namespace drivedet

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
#include <algorithm>
#include <atomic>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "drivedet/anchors.h"
#include "drivedet/head.h"
#include "drivedet/pipeline.h"
#include "drivedet/rng.h"
#include "drivedet/synth.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace drivedet {
namespace {

std::vector<LevelOutputs> ZeroOutputs(const AnchorPyramid& anchors,
                                      int num_classes) {
  std::vector<LevelOutputs> out;
  for (const AnchorLevel& level : anchors.levels) {
    LevelOutputs lo;
    lo.num_classes = num_classes;
    lo.scores.assign(level.anchors.size() * num_classes, 0.0);
    lo.deltas.assign(level.anchors.size(), BoxDelta{});
    out.push_back(std::move(lo));
  }
  return out;
}

// Head whose outputs are fixed by the test.
class ScriptedHead : public Head {
 public:
  using StageFn = std::function<LevelOutputs(int, absl::Span<const Box>)>;

  int num_stages = 3;
  std::vector<LevelOutputs> rpn;
  std::vector<LevelOutputs> dense;
  StageFn stage;

  int NumStages() const override { return num_stages; }
  absl::StatusOr<std::vector<LevelOutputs>> Rpn(
      const Frame&, const AnchorPyramid&) const override {
    return rpn;
  }
  absl::StatusOr<LevelOutputs> Stage(const Frame&, int s,
                                     absl::Span<const Box> boxes) const override {
    return stage(s, boxes);
  }
  absl::StatusOr<std::vector<LevelOutputs>> Dense(
      const Frame&, const AnchorPyramid&) const override {
    return dense;
  }
};

// Forwards to another head and remembers how many boxes each stage received.
class CountingHead : public Head {
 public:
  explicit CountingHead(const Head* inner) : inner_(inner) {}

  int NumStages() const override { return inner_->NumStages(); }
  absl::StatusOr<std::vector<LevelOutputs>> Rpn(
      const Frame& f, const AnchorPyramid& a) const override {
    return inner_->Rpn(f, a);
  }
  absl::StatusOr<LevelOutputs> Stage(const Frame& f, int s,
                                     absl::Span<const Box> boxes) const override {
    max_stage_input_ = std::max<std::size_t>(max_stage_input_, boxes.size());
    return inner_->Stage(f, s, boxes);
  }
  absl::StatusOr<std::vector<LevelOutputs>> Dense(
      const Frame& f, const AnchorPyramid& a) const override {
    return inner_->Dense(f, a);
  }
  std::size_t max_stage_input() const { return max_stage_input_; }

 private:
  const Head* inner_;
  mutable std::size_t max_stage_input_ = 0;
};

Frame SmallFrame(std::vector<GroundTruth> gts = {}) {
  Frame f;
  f.frame_id = "f0";
  f.height = 128;
  f.width = 128;
  f.gts = std::move(gts);
  return f;
}

PipelineConfig SmallConfig() {
  PipelineConfig c;
  c.min_level = 2;
  c.max_level = 4;
  return c;
}

std::vector<Frame> SyntheticFrames(int frames, std::uint64_t seed,
                                   int min_objects = 5, int max_objects = 30) {
  SceneConfig sc;
  sc.frames = frames;
  sc.image_h = 384;
  sc.image_w = 640;
  sc.min_objects = min_objects;
  sc.max_objects = max_objects;
  sc.seed = seed;
  return *GenerateScenes(sc);
}

OracleHead DefaultOracle(std::uint64_t seed = 1) {
  OracleHeadConfig oc;
  oc.seed = seed;
  return OracleHead(oc);
}

TEST(RpnProposalsTest, SingleHotAnchor) {
  const PipelineConfig config = SmallConfig();
  const AnchorPyramid anchors =
      *GeneratePyramid(128, 128, 2, 4, config.anchor_spec);
  std::vector<LevelOutputs> rpn = ZeroOutputs(anchors, 1);
  const std::size_t hot = 3 * 16 * 5 + 1;  // row 5, col 5, aspect 1.0 at L3
  rpn[1].scores[hot] = 0.9;
  rpn[1].deltas[hot] = {0.1, -0.2, 0.3, 0.0};
  const std::vector<ScoredBox> proposals =
      *RpnProposals(anchors, rpn, config, ImageSize{128, 128});
  ASSERT_EQ(proposals.size(), 1u);
  EXPECT_EQ(proposals[0].box,
            Decode(rpn[1].deltas[hot], anchors.levels[1].anchors[hot],
                   ImageSize{128, 128}));
  EXPECT_EQ(proposals[0].score, 0.9);
}

TEST(RpnProposalsTest, DuplicateDecodesCollapse) {
  const PipelineConfig config = SmallConfig();
  const AnchorPyramid anchors =
      *GeneratePyramid(128, 128, 2, 4, config.anchor_spec);
  std::vector<LevelOutputs> rpn = ZeroOutputs(anchors, 1);
  const Box target{40, 40, 72, 80};
  const std::size_t a = 3 * (16 * 6 + 6);
  const std::size_t b = a + 2;
  rpn[1].scores[a] = 0.9;
  rpn[1].scores[b] = 0.8;
  rpn[1].deltas[a] = *Encode(target, anchors.levels[1].anchors[a]);
  rpn[1].deltas[b] = *Encode(target, anchors.levels[1].anchors[b]);
  const std::vector<ScoredBox> proposals =
      *RpnProposals(anchors, rpn, config, ImageSize{128, 128});
  ASSERT_EQ(proposals.size(), 1u);
  EXPECT_EQ(proposals[0].score, 0.9);
}

TEST(RpnProposalsTest, MisalignmentNamesTheLevel) {
  const PipelineConfig config = SmallConfig();
  const AnchorPyramid anchors =
      *GeneratePyramid(128, 128, 2, 4, config.anchor_spec);
  std::vector<LevelOutputs> rpn = ZeroOutputs(anchors, 1);
  rpn[1].deltas.pop_back();
  const absl::Status s =
      RpnProposals(anchors, rpn, config, ImageSize{128, 128}).status();
  EXPECT_EQ(s.code(), absl::StatusCode::kInvalidArgument);
  EXPECT_NE(s.message().find("L3"), std::string::npos) << s;

  rpn = ZeroOutputs(anchors, 1);
  rpn.pop_back();
  EXPECT_FALSE(
      RpnProposals(anchors, rpn, config, ImageSize{128, 128}).ok());
}

TEST(RpnProposalsTest, CoversEveryObjectOfACrowdedFrame) {
  const std::vector<Frame> frames = SyntheticFrames(1, 7, 20, 20);
  const Frame& frame = frames[0];
  ASSERT_EQ(frame.gts.size(), 20u);
  PipelineConfig config;
  config.pre_nms_top_k = 0;
  const AnchorPyramid anchors = *GeneratePyramid(
      frame.height, frame.width, config.min_level, config.max_level,
      config.anchor_spec);
  const OracleHead head = DefaultOracle(3);
  const std::vector<LevelOutputs> rpn = *head.Rpn(frame, anchors);
  const std::vector<ScoredBox> proposals =
      *RpnProposals(anchors, rpn, config, frame.Size());

  // Survivor count from an independent decode + oracle NMS.
  std::vector<ScoredBox> candidates;
  for (std::size_t l = 0; l < rpn.size(); ++l) {
    for (std::size_t i = 0; i < rpn[l].size(); ++i) {
      const double s = std::clamp(rpn[l].scores[i], 0.0, 1.0);
      if (!(s > 0.0)) continue;
      const Box box =
          Decode(rpn[l].deltas[i], anchors.levels[l].anchors[i], frame.Size());
      if (box.Area() > 0.0) candidates.push_back({box, s, 0});
    }
  }
  const std::size_t survivors = oracle::Nms(candidates, 0.7).size();
  EXPECT_EQ(proposals.size(), std::min<std::size_t>(512, survivors));

  for (const GroundTruth& gt : frame.gts) {
    double best = 0.0;
    for (const ScoredBox& p : proposals) {
      best = std::max(best, oracle::Iou(p.box, gt.box));
    }
    EXPECT_GE(best, 0.5) << "object at (" << gt.box.ymin << ", "
                         << gt.box.xmin << ")";
  }
}

// Ground truth well apart from each other; the RPN fires once per object on
// its best anchor and every stage is the identity with perfect scores.
TEST(RunTwoStageTest, PerfectHeadIsAFixedPoint) {
  const Frame frame = SmallFrame({{"f0", {8, 8, 40, 56}, kVehicle},
                                  {"f0", {70, 20, 118, 40}, kPedestrian},
                                  {"f0", {60, 80, 92, 104}, kCyclist}});
  const PipelineConfig config = SmallConfig();
  const AnchorPyramid anchors =
      *GeneratePyramid(128, 128, 2, 4, config.anchor_spec);
  ScriptedHead head;
  head.rpn = ZeroOutputs(anchors, 1);
  for (const GroundTruth& gt : frame.gts) {
    std::size_t bl = 0, bi = 0;
    double best = -1.0;
    for (std::size_t l = 0; l < anchors.levels.size(); ++l) {
      for (std::size_t i = 0; i < anchors.levels[l].anchors.size(); ++i) {
        const double v = Iou(anchors.levels[l].anchors[i], gt.box);
        if (v > best) {
          best = v;
          bl = l;
          bi = i;
        }
      }
    }
    head.rpn[bl].scores[bi] = 1.0;
    head.rpn[bl].deltas[bi] = *Encode(gt.box, anchors.levels[bl].anchors[bi]);
  }
  head.stage = [&](int, absl::Span<const Box> boxes) {
    LevelOutputs out;
    out.num_classes = kNumClasses;
    out.deltas.assign(boxes.size(), BoxDelta{});
    out.scores.assign(boxes.size() * kNumClasses, 0.0);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      for (const GroundTruth& gt : frame.gts) {
        if (Iou(boxes[i], gt.box) > 0.99) {
          out.scores[i * kNumClasses + gt.class_id] = 1.0;
        }
      }
    }
    return out;
  };

  const TwoStageResult r = *RunTwoStage(frame, head, config);
  ASSERT_EQ(r.detections.size(), frame.gts.size());
  ASSERT_EQ(r.stage_boxes.size(), 3u);
  for (const GroundTruth& gt : frame.gts) {
    const auto it = std::find_if(
        r.detections.begin(), r.detections.end(),
        [&](const Detection& d) { return d.class_id == gt.class_id; });
    ASSERT_NE(it, r.detections.end());
    EXPECT_EQ(it->score, 1.0);
    EXPECT_NEAR(it->box.ymin, gt.box.ymin, 1e-9);
    EXPECT_NEAR(it->box.xmin, gt.box.xmin, 1e-9);
    EXPECT_NEAR(it->box.ymax, gt.box.ymax, 1e-9);
    EXPECT_NEAR(it->box.xmax, gt.box.xmax, 1e-9);
    EXPECT_EQ(it->frame_id, "f0");
  }
  for (const auto& stage : r.stage_boxes) {
    ASSERT_EQ(stage.size(), r.proposals.size());
    for (std::size_t i = 0; i < stage.size(); ++i) {
      EXPECT_EQ(stage[i], r.proposals[i].box);
    }
  }
}

TEST(RunTwoStageTest, StageScoreModes) {
  const Frame frame = SmallFrame();
  const PipelineConfig base = SmallConfig();
  const AnchorPyramid anchors =
      *GeneratePyramid(128, 128, 2, 4, base.anchor_spec);
  ScriptedHead head;
  head.rpn = ZeroOutputs(anchors, 1);
  head.rpn[1].scores[100] = 0.9;
  const std::vector<double> per_stage = {0.3, 0.6, 0.9};
  head.stage = [&](int s, absl::Span<const Box> boxes) {
    LevelOutputs out;
    out.num_classes = 1;
    out.deltas.assign(boxes.size(), BoxDelta{});
    out.scores.assign(boxes.size(), per_stage[s]);
    return out;
  };
  PipelineConfig config = base;
  std::vector<Detection> d = RunTwoStage(frame, head, config)->detections;
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].score, 0.9);
  config.stage_score_mode = StageScoreMode::kMean;
  d = RunTwoStage(frame, head, config)->detections;
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d[0].score, 0.6);
}

TEST(RunTwoStageTest, StageCountMismatchIsAnError) {
  const std::vector<Frame> frames = SyntheticFrames(1, 1);
  const OracleHead head = DefaultOracle();
  PipelineConfig config;
  config.cascade.stage_fg_thresholds = {0.5, 0.6};
  const absl::Status s = RunTwoStage(frames[0], head, config).status();
  EXPECT_EQ(s.code(), absl::StatusCode::kFailedPrecondition);
}

TEST(RunTwoStageTest, MisalignedStageOutputIsAnError) {
  const Frame frame = SmallFrame();
  const PipelineConfig config = SmallConfig();
  const AnchorPyramid anchors =
      *GeneratePyramid(128, 128, 2, 4, config.anchor_spec);
  ScriptedHead head;
  head.rpn = ZeroOutputs(anchors, 1);
  head.rpn[0].scores[7] = 0.5;
  head.stage = [](int, absl::Span<const Box> boxes) {
    LevelOutputs out;
    out.num_classes = 2;
    out.deltas.assign(boxes.size() + 1, BoxDelta{});
    out.scores.assign((boxes.size() + 1) * 2, 0.0);
    return out;
  };
  const absl::Status s = RunTwoStage(frame, head, config).status();
  EXPECT_EQ(s.code(), absl::StatusCode::kInvalidArgument);
  EXPECT_NE(s.message().find("stage 1"), std::string::npos) << s;
}

TEST(RunTwoStageTest, InvalidConfigIsRejected) {
  const std::vector<Frame> frames = SyntheticFrames(1, 1);
  const OracleHead head = DefaultOracle();
  PipelineConfig config;
  config.num_proposals = 0;
  EXPECT_FALSE(RunTwoStage(frames[0], head, config).ok());
  config = PipelineConfig();
  config.rpn_nms_threshold = 0.0;
  EXPECT_FALSE(RunTwoStage(frames[0], head, config).ok());
  config = PipelineConfig();
  config.min_level = 5;
  config.max_level = 3;
  EXPECT_FALSE(RunTwoStage(frames[0], head, config).ok());
}

TEST(RunTwoStageTest, DeterministicAndIndependentOfJobs) {
  const std::vector<Frame> frames = SyntheticFrames(4, 11);
  const OracleHead head = DefaultOracle(5);
  const PipelineConfig config;
  const TwoStageResult a = *RunTwoStage(frames[2], head, config);
  const TwoStageResult b = *RunTwoStage(frames[2], head, config);
  EXPECT_EQ(a.detections, b.detections);
  EXPECT_EQ(a.proposals, b.proposals);

  const std::vector<TwoStageResult> serial =
      *RunTwoStageBatch(frames, head, config, 1);
  const std::vector<TwoStageResult> parallel =
      *RunTwoStageBatch(frames, head, config, 3);
  ASSERT_EQ(serial.size(), 4u);
  ASSERT_EQ(parallel.size(), 4u);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    EXPECT_EQ(serial[i].detections, parallel[i].detections);
    EXPECT_EQ(serial[i].stage_boxes, parallel[i].stage_boxes);
  }
  EXPECT_EQ(serial[2].detections, a.detections);
}

TEST(RunTwoStageTest, DetectionContract) {
  const std::vector<Frame> frames = SyntheticFrames(3, 12);
  const OracleHead head = DefaultOracle(6);
  const PipelineConfig config;
  for (const Frame& frame : frames) {
    const TwoStageResult r = *RunTwoStage(frame, head, config);
    EXPECT_LE(r.proposals.size(), 512u);
    EXPECT_LE(r.detections.size(), 300u);
    for (std::size_t i = 0; i < r.detections.size(); ++i) {
      const Detection& d = r.detections[i];
      EXPECT_GE(d.score, config.score_threshold);
      EXPECT_GE(d.box.ymin, 0.0);
      EXPECT_GE(d.box.xmin, 0.0);
      EXPECT_LE(d.box.ymax, frame.height);
      EXPECT_LE(d.box.xmax, frame.width);
      if (i > 0) {
        EXPECT_GE(r.detections[i - 1].score, d.score);
      }
    }
  }
}

TEST(RunTwoStageTest, StageInputsAreBoundedByProposalCount) {
  const std::vector<Frame> frames = SyntheticFrames(2, 13, 25, 30);
  const OracleHead oracle = DefaultOracle(7);
  std::vector<std::size_t> largest;
  for (int n : {512, 1000}) {
    CountingHead head(&oracle);
    PipelineConfig config;
    config.num_proposals = n;
    for (const Frame& f : frames) ASSERT_TRUE(RunTwoStage(f, head, config).ok());
    EXPECT_LE(head.max_stage_input(), static_cast<std::size_t>(n));
    largest.push_back(head.max_stage_input());
  }
  EXPECT_LE(largest[0], largest[1]);
}

TEST(RunTwoStageTest, EmptySceneWithNoiseOnlyHead) {
  Frame frame;
  frame.frame_id = "empty";
  frame.height = 256;
  frame.width = 384;
  OracleHeadConfig oc;
  oc.fp_rate = 0.0;
  oc.seed = 9;
  const OracleHead head(oc);
  const PipelineConfig config;
  const TwoStageResult r = *RunTwoStage(frame, head, config);
  for (const Detection& d : r.detections) {
    EXPECT_GE(d.score, 0.05);
  }
  const std::vector<Detection> one = *RunOneStage(frame, head,
                                                  PipelineConfig::OneStage());
  for (const Detection& d : one) EXPECT_GE(d.score, 0.05);
}

TEST(RunTwoStageTest, HalfPrecisionKeepsDetectionCount) {
  const std::vector<Frame> frames = SyntheticFrames(4, 14);
  const OracleHead head = DefaultOracle(8);
  PipelineConfig full;
  PipelineConfig half;
  half.precision = PrecisionPolicy::Uniform(PrecisionMode::kHalfEmulated);
  std::size_t n_full = 0, n_half = 0;
  for (const Frame& f : frames) {
    n_full += RunTwoStage(f, head, full)->detections.size();
    n_half += RunTwoStage(f, head, half)->detections.size();
  }
  ASSERT_GT(n_full, 0u);
  EXPECT_LE(std::abs(static_cast<double>(n_full) - static_cast<double>(n_half)),
            0.01 * static_cast<double>(n_full));
}

TEST(RunOneStageTest, SingleHotAnchorAndDuplicates) {
  const Frame frame = SmallFrame();
  PipelineConfig config = PipelineConfig::OneStage();
  config.min_level = 2;
  config.max_level = 4;
  const AnchorPyramid anchors =
      *GeneratePyramid(128, 128, 2, 4, config.anchor_spec);
  ScriptedHead head;
  head.dense = ZeroOutputs(anchors, kNumClasses);
  const std::size_t a = 9 * (16 * 4 + 4);
  head.dense[1].scores[a * kNumClasses + kPedestrian] = 0.8;
  head.dense[1].deltas[a] = {0.05, 0.05, 0.1, -0.1};
  std::vector<Detection> d = *RunOneStage(frame, head, config);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].class_id, kPedestrian);
  EXPECT_EQ(d[0].score, 0.8);
  EXPECT_EQ(d[0].box, Decode(head.dense[1].deltas[a],
                             anchors.levels[1].anchors[a], frame.Size()));

  // Identical predictions for two classes on two anchors: one per class.
  const std::size_t b = a + 4;
  const Box target{30, 30, 60, 70};
  for (std::size_t i : {a, b}) {
    head.dense[1].deltas[i] = *Encode(target, anchors.levels[1].anchors[i]);
    head.dense[1].scores[i * kNumClasses + kVehicle] = 0.7;
    head.dense[1].scores[i * kNumClasses + kPedestrian] = 0.6;
  }
  d = *RunOneStage(frame, head, config);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].class_id, kVehicle);
  EXPECT_EQ(d[1].class_id, kPedestrian);
}

TEST(RunOneStageTest, MisalignedOutputsAreAnError) {
  const Frame frame = SmallFrame();
  PipelineConfig config = PipelineConfig::OneStage();
  config.min_level = 2;
  config.max_level = 4;
  const AnchorPyramid anchors =
      *GeneratePyramid(128, 128, 2, 4, config.anchor_spec);
  ScriptedHead head;
  head.dense = ZeroOutputs(anchors, kNumClasses);
  head.dense[2].scores.pop_back();
  const absl::Status s = RunOneStage(frame, head, config).status();
  EXPECT_EQ(s.code(), absl::StatusCode::kInvalidArgument);
  EXPECT_NE(s.message().find("L4"), std::string::npos) << s;
}

// Reorders the anchors inside every level and feeds outputs permuted the same
// way. Scores are distinct by construction, so the detection set must not
// change.
TEST(RunOneStageTest, AnchorOrderWithinALevelDoesNotMatter) {
  const Frame frame = SmallFrame();
  PipelineConfig config = PipelineConfig::OneStage();
  config.min_level = 2;
  config.max_level = 4;
  config.pre_nms_top_k = 50;
  const AnchorPyramid anchors =
      *GeneratePyramid(128, 128, 2, 4, config.anchor_spec);
  Rng rng(40);
  ScriptedHead head;
  head.dense = ZeroOutputs(anchors, kNumClasses);
  for (LevelOutputs& lo : head.dense) {
    for (double& s : lo.scores) s = rng.Uniform(0.01, 0.99);
    for (BoxDelta& d : lo.deltas) {
      d = {rng.Normal(0, 0.1), rng.Normal(0, 0.1), rng.Normal(0, 0.1),
           rng.Normal(0, 0.1)};
    }
  }
  AnchorPyramid shuffled = anchors;
  ScriptedHead permuted;
  permuted.dense = head.dense;
  for (std::size_t l = 0; l < anchors.levels.size(); ++l) {
    const std::size_t n = anchors.levels[l].anchors.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
      std::swap(perm[i - 1], perm[rng.UniformInt(i)]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      shuffled.levels[l].anchors[i] = anchors.levels[l].anchors[perm[i]];
      permuted.dense[l].deltas[i] = head.dense[l].deltas[perm[i]];
      for (int c = 0; c < kNumClasses; ++c) {
        permuted.dense[l].scores[i * kNumClasses + c] =
            head.dense[l].scores[perm[i] * kNumClasses + c];
      }
    }
  }
  const std::vector<Detection> a =
      *RunOneStage(frame, head, config, RunOptions{&anchors, nullptr});
  const std::vector<Detection> b =
      *RunOneStage(frame, permuted, config, RunOptions{&shuffled, nullptr});
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, b);
}

TEST(RunOneStageTest, DeterministicAndIndependentOfJobs) {
  const std::vector<Frame> frames = SyntheticFrames(3, 15);
  const OracleHead head = DefaultOracle(10);
  const PipelineConfig config = PipelineConfig::OneStage();
  const auto serial = *RunOneStageBatch(frames, head, config, 1);
  const auto parallel = *RunOneStageBatch(frames, head, config, 2);
  EXPECT_EQ(serial, parallel);
  EXPECT_EQ(serial[1], *RunOneStage(frames[1], head, config));
}

}  // namespace
}  // namespace drivedet

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
#include <vector>

#include "benchmark/benchmark.h"
#include "drivedet/anchors.h"
#include "drivedet/box.h"
#include "drivedet/half.h"
#include "drivedet/pipeline.h"
#include "drivedet/rng.h"
#include "drivedet/suppression.h"
#include "drivedet/synth.h"

namespace drivedet {
namespace {

std::vector<ScoredBox> RandomBoxes(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ScoredBox> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = rng.Uniform(0, 640), x = rng.Uniform(0, 1152);
    const double h = rng.Uniform(8, 120), w = rng.Uniform(8, 120);
    out.push_back({{y, x, y + h, x + w}, rng.Uniform(), 0});
  }
  return out;
}

void BM_GreedyNms(benchmark::State& state) {
  const auto items = RandomBoxes(state.range(0), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(GreedyNms(items, 0.7));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GreedyNms)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_IouMatrix(benchmark::State& state) {
  std::vector<Box> a, b;
  for (const auto& s : RandomBoxes(state.range(0), 2)) a.push_back(s.box);
  for (const auto& s : RandomBoxes(64, 3)) b.push_back(s.box);
  for (auto _ : state) {
    benchmark::DoNotOptimize(IouMatrix(a, b));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 64);
}
BENCHMARK(BM_IouMatrix)->Arg(512)->Arg(4096);

void BM_RoundF16(benchmark::State& state) {
  Rng rng(4);
  std::vector<double> xs(4096);
  for (double& x : xs) x = rng.Normal() * 100.0;
  for (auto _ : state) {
    double acc = 0.0;
    for (double x : xs) acc += RoundF16(x);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * xs.size());
}
BENCHMARK(BM_RoundF16);

void BM_Decode(benchmark::State& state) {
  const RoundingFn round = state.range(0) ? &RoundF16 : nullptr;
  const Box anchor{100, 200, 164, 232};
  const BoxDelta delta{0.1, -0.2, 0.05, 0.3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(Decode(delta, anchor, std::nullopt, round));
  }
}
BENCHMARK(BM_Decode)->ArgName("half")->Arg(0)->Arg(1);

void BM_GeneratePyramid(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        GeneratePyramid(640, 1152, 2, 6, AnchorSpec::RegionProposal()));
  }
}
BENCHMARK(BM_GeneratePyramid);

// One frame through the full two-stage path with the oracle head.
void BM_TwoStageFrame(benchmark::State& state) {
  SceneConfig sc;
  sc.image_h = 512;
  sc.image_w = 896;
  sc.frames = 8;
  sc.seed = 1;
  const std::vector<Frame> frames = *GenerateScenes(sc);
  OracleHeadConfig oc;
  oc.seed = 1;
  const OracleHead head(oc);
  PipelineConfig config;
  config.num_proposals = static_cast<int>(state.range(0));
  const AnchorPyramid anchors =
      *GeneratePyramid(sc.image_h, sc.image_w, config.min_level,
                       config.max_level, config.anchor_spec);
  RunOptions run;
  run.anchors = &anchors;
  std::size_t next = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        RunTwoStage(frames[next++ % frames.size()], head, config, run));
  }
}
BENCHMARK(BM_TwoStageFrame)
    ->ArgName("proposals")
    ->Arg(512)
    ->Arg(1000)
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace drivedet

BENCHMARK_MAIN();

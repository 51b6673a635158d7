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
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.h"
#include "drivedet/io.h"
#include "drivedet/scaling.h"
#include "gtest/gtest.h"
#include "nlohmann/json.hpp"

namespace drivedet {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome Invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = RunCommand(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Spit(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("drivedet_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    config_ = Path("config.json");
    Spit(config_,
         R"({"scene":{"image_h":128,"image_w":192,"frames":3,"seed":4},)"
         R"("oracle":{"seed":9}})");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const {
    return (dir_ / name).string();
  }

  // Runs synth into scenes.jsonl with the small config.
  void Synth(const std::vector<std::string>& extra = {}) {
    std::vector<std::string> args = {"--config", config_, "synth", "--out",
                                     Path("scenes.jsonl")};
    args.insert(args.end(), extra.begin(), extra.end());
    const Outcome r = Invoke(args);
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir_;
  std::string config_;
};

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(Invoke({}).code, 2);
  EXPECT_EQ(Invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(Invoke({"synth", "--out", Path("a"), "--bogus"}).code, 2);
  EXPECT_EQ(Invoke({"synth"}).code, 2);  // --out is required
  const Outcome missing = Invoke(
      {"eval", "--detections", Path("nope"), "--scenes", Path("nope"),
       "--out", Path("m.json")});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("drivedet:"), std::string::npos);
  EXPECT_EQ(Invoke({"--config", Path("nope.json"), "pareto"}).code, 2);
  EXPECT_EQ(Invoke({"--jobs", "0", "pareto"}).code, 2);
  EXPECT_EQ(Invoke({"synth", "--out", Path("a"), "--head-mode", "x"}).code, 2);
}

TEST_F(CliTest, HelpAndVersionExitZero) {
  const Outcome help = Invoke({"--help"});
  EXPECT_EQ(help.code, 0);
  for (const char* cmd : {"synth", "detect", "eval", "ablate", "pareto",
                          "bench"}) {
    EXPECT_NE(help.out.find(cmd), std::string::npos) << cmd;
  }
  const Outcome version = Invoke({"--version"});
  EXPECT_EQ(version.code, 0);
  EXPECT_EQ(version.out, std::string(kToolVersion) + "\n");
  EXPECT_EQ(Invoke({"detect", "--help"}).code, 0);
}

TEST_F(CliTest, BadConfigIsRuntimeError) {
  Spit(config_, R"({"pipeline":{"num_proposal":5}})");
  Outcome r = Invoke({"--config", config_, "synth", "--out", Path("s.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("num_proposal"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(Path("s.jsonl")));

  Spit(config_, "{not json");
  r = Invoke({"--config", config_, "synth", "--out", Path("s.jsonl")});
  EXPECT_EQ(r.code, 1);

  Spit(config_, R"({"pipeline":{"num_proposals":0}})");
  Synth();  // synth does not use the pipeline section
  r = Invoke({"--config", config_, "detect", "--scenes", Path("scenes.jsonl"),
           "--out", Path("d.jsonl")});
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, CorruptInputNamesTheLine) {
  Synth();
  std::string text = Slurp(Path("scenes.jsonl"));
  const std::size_t second = text.find('\n') + 1;
  text.insert(second, "{\"frame_id\": oops}\n");
  Spit(Path("bad.jsonl"), text);
  const Outcome r = Invoke({"detect", "--scenes", Path("bad.jsonl"), "--out",
                         Path("d.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("bad.jsonl"), std::string::npos) << r.err;
}

TEST_F(CliTest, SynthIsReproducibleAndWritesManifest) {
  Synth();
  const std::string first = Slurp(Path("scenes.jsonl"));
  const std::string manifest = Slurp(Path("scenes.jsonl.manifest.json"));
  ASSERT_FALSE(first.empty());
  Synth();
  EXPECT_EQ(Slurp(Path("scenes.jsonl")), first);
  EXPECT_EQ(Slurp(Path("scenes.jsonl.manifest.json")), manifest);

  const auto parsed = ParseScenesJsonl(first);
  ASSERT_TRUE(parsed.ok()) << parsed.status();
  EXPECT_EQ(parsed->size(), 3u);

  const auto m = nlohmann::json::parse(manifest);
  EXPECT_EQ(m["command"], "synth");
  EXPECT_EQ(m["config"]["scene"]["image_w"], 192);
  EXPECT_EQ(m["config"]["scene"]["seed"], 4);
  ASSERT_EQ(m["outputs"].size(), 1u);
  EXPECT_EQ(m["outputs"][0]["bytes"], first.size());

  Synth({"--seed", "5"});
  EXPECT_NE(Slurp(Path("scenes.jsonl")), first);
}

TEST_F(CliTest, DetectEvalRoundTrip) {
  Synth();
  const std::vector<std::string> detect = {
      "--config", config_, "detect", "--scenes", Path("scenes.jsonl"),
      "--out", Path("dets.jsonl")};
  Outcome r = Invoke(detect);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string dets = Slurp(Path("dets.jsonl"));
  const std::string stages = Slurp(Path("dets.jsonl.stages.jsonl"));
  ASSERT_TRUE(ParseDetectionsJsonl(dets).ok());
  EXPECT_EQ(std::count(stages.begin(), stages.end(), '\n'), 3);

  r = Invoke(detect);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Slurp(Path("dets.jsonl")), dets);

  std::vector<std::string> parallel = detect;
  parallel.insert(parallel.begin(), {"--jobs", "2"});
  parallel.back() = Path("dets2.jsonl");
  r = Invoke(parallel);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Slurp(Path("dets2.jsonl")), dets);

  r = Invoke({"eval", "--detections", Path("dets.jsonl"), "--scenes",
           Path("scenes.jsonl"), "--out", Path("metrics.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("AP/L1 ", 0), 0u) << r.out;
  const auto metrics = ParseEvalResultJson(Slurp(Path("metrics.json")));
  ASSERT_TRUE(metrics.ok()) << metrics.status();
  EXPECT_GT(metrics->ap_l1, 0.5);
  EXPECT_LE(metrics->ap_l1, 1.0);
  EXPECT_TRUE(fs::exists(Path("metrics.json.manifest.json")));
}

TEST_F(CliTest, ReplayMatchesLiveOracle) {
  Synth({"--head-out", Path("head.jsonl"), "--head-mode", "both"});
  for (const bool one_stage : {false, true}) {
    std::vector<std::string> live = {"--config", config_, "detect",
                                     "--scenes", Path("scenes.jsonl"),
                                     "--out", Path("live.jsonl")};
    std::vector<std::string> replay = {"detect", "--scenes",
                                       Path("scenes.jsonl"), "--replay",
                                       Path("head.jsonl"), "--out",
                                       Path("replay.jsonl")};
    if (one_stage) {
      live.push_back("--one-stage");
      replay.push_back("--one-stage");
    }
    Outcome r = Invoke(live);
    ASSERT_EQ(r.code, 0) << r.err;
    r = Invoke(replay);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(Slurp(Path("replay.jsonl")), Slurp(Path("live.jsonl")))
        << "one_stage=" << one_stage;
  }
}

TEST_F(CliTest, ParetoReportsBundledFrontier) {
  const Outcome r = Invoke({"pareto", "--framework", "CRCNN-RS", "--out",
                         Path("frontier.csv"), "--json", Path("f.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Pareto frontier (12 of 17 records)"),
            std::string::npos)
      << r.out;
  const std::size_t best = r.out.find("best under 70 ms/frame:");
  ASSERT_NE(best, std::string::npos) << r.out;
  const std::string tail = r.out.substr(best);
  EXPECT_NE(tail.find("SN49 @1280x2176"), std::string::npos) << tail;
  EXPECT_NE(tail.find("AP/L1 76.9"), std::string::npos) << tail;
  EXPECT_NE(tail.find("AP/L2 70.1"), std::string::npos) << tail;

  const auto written = ParseRegistry(Slurp(Path("frontier.csv")));
  ASSERT_TRUE(written.ok()) << written.status();
  auto records = LoadBundledRegistry();
  ASSERT_TRUE(records.ok());
  records = FilterFramework(*records, Framework::kCascadeRcnnRs);
  EXPECT_EQ(*written, ParetoFrontier(*records));
  EXPECT_TRUE(fs::exists(Path("frontier.csv.manifest.json")));
}

TEST_F(CliTest, ParetoCompareAndBudgetErrors) {
  Outcome r = Invoke({"pareto", "--compare", "SN49,SN49x0.25"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("dominates"), std::string::npos) << r.out;
  r = Invoke({"pareto", "--compare", "SN49"});
  EXPECT_EQ(r.code, 1);
  r = Invoke({"pareto", "--budget-ms", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("drivedet:"), std::string::npos);
}

TEST_F(CliTest, AblateWritesLadder) {
  const Outcome r = Invoke({"--config", config_, "ablate", "--frames", "2",
                         "--out", Path("ablate.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = Slurp(Path("ablate.csv"));
  EXPECT_EQ(csv.rfind("step,name,num_stages,min_level,max_level,"
                      "num_proposals,nms_threshold,precision,ap_l1,ap_l2,"
                      "delta_ap_l1\n",
                      0),
            0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  const Outcome again = Invoke({"--config", config_, "ablate", "--frames", "2",
                             "--out", Path("ablate.csv")});
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(Slurp(Path("ablate.csv")), csv);
}

TEST_F(CliTest, BenchWritesStats) {
  const Outcome r = Invoke({"--config", config_, "bench", "--warmup", "1",
                         "--iterations", "3", "--out", Path("bench.json"),
                         "--raw", Path("raw.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(Slurp(Path("bench.json")));
  EXPECT_TRUE(j.contains("total"));
  EXPECT_EQ(j["total"]["n_iterations"], 3);
  EXPECT_TRUE(fs::exists(Path("raw.csv")));
  EXPECT_EQ(Invoke({"bench", "--iterations", "0"}).code, 2);
}

}  // namespace
}  // namespace drivedet

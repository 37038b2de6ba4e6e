// Copyright 2026 The DriverSense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "driversense/pipeline/commands.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "gtest/gtest.h"

namespace driversense::pipeline {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("driversense_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void Spit(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

std::map<std::string, std::string> Digests(const RunManifest& m) {
  std::map<std::string, std::string> out;
  for (const auto& f : m.outputs) out[f.path] = f.sha256;
  return out;
}

PipelineConfig SmallConfig() {
  PipelineConfig c;
  c.episodes = 12;
  c.seed = 7;
  c.eval_stride = 15;
  c.train_stride = 3;
  c.split = 0.5;
  return c;
}

ErrorKind KindOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kInvariant;
}

// ---- config ----------------------------------------------------------------------

TEST(ConfigTest, TextRoundTrip) {
  PipelineConfig c;
  c.seed = 42;
  c.tau = 0.65;
  c.grid.frame = GridFrame::kEgoRelative;
  c.dump_pgm = true;
  std::istringstream in(ConfigToText(c));
  PipelineConfig back;
  ApplyConfigText(back, in);
  EXPECT_EQ(ConfigSnapshot(back), ConfigSnapshot(c));
}

TEST(ConfigTest, CommentsBlankLinesAndWhitespace) {
  std::istringstream in("# header\n\n  train.k = 7   # fewer actionlets\nmode=landmark\n");
  PipelineConfig c;
  ApplyConfigText(c, in);
  EXPECT_EQ(c.k, 7);
  EXPECT_EQ(c.mode, "landmark");
}

TEST(ConfigTest, ErrorsNameTheLine) {
  std::istringstream in("seed = 3\ntrain.k = ten\n");
  PipelineConfig c;
  try {
    ApplyConfigText(c, in);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_EQ(KindOf([&] { SetConfigValue(c, "no.such.key", "1"); }),
            ErrorKind::kInvalidArgument);
  EXPECT_EQ(KindOf([&] { SetConfigValue(c, "eval.dump_pgm", "maybe"); }),
            ErrorKind::kInvalidArgument);
}

TEST(ConfigTest, ValidationRejectsBadValues) {
  PipelineConfig c;
  c.split = 1.0;
  EXPECT_THROW(c.Validate(), Error);
  c = {};
  c.mode = "video";
  EXPECT_THROW(c.Validate(), Error);
  c = {};
  c.psi_region = "half";
  EXPECT_THROW(c.Validate(), Error);
  EXPECT_NO_THROW(PipelineConfig{}.Validate());
}

// ---- split and datasets ------------------------------------------------------------

TEST(SplitTest, ExactTrainingCount) {
  const auto train = SplitTrain(1000, 0.2, 5);
  EXPECT_EQ(std::count(train.begin(), train.end(), true), 200);
  EXPECT_EQ(SplitTrain(1000, 0.2, 5), train);
  EXPECT_NE(SplitTrain(1000, 0.2, 6), train);
  EXPECT_THROW(SplitTrain(10, 0.0, 1), Error);
}

TEST(DatasetTest, DefaultEpisodeCount) {
  PipelineConfig c;
  EXPECT_EQ(c.episodes, 1440);
  EXPECT_EQ(SimulateEpisodes(c).size(), 1440u);
}

TEST(DatasetTest, EvaluableFramesSkipHistoryAndKeepAnchors) {
  PipelineConfig c = SmallConfig();
  c.episodes = 3;
  for (const auto& log : SimulateEpisodes(c)) {
    const auto frames = EvaluableFrames(log, 15);
    ASSERT_FALSE(frames.empty());
    EXPECT_EQ(frames.front(), 15u);
    EXPECT_EQ(frames.back(), log.frames.size() - 1);
    const auto s = SliceFramesOf(log);
    EXPECT_NE(std::find(frames.begin(), frames.end(), s.middle), frames.end());
  }
}

TEST(DatasetTest, LandmarkRecordsRoundTrip) {
  PipelineConfig c = SmallConfig();
  c.mode = "landmark";
  std::vector<LandmarkRecord> records;
  for (const auto& log : SimulateEpisodes(c)) {
    for (auto& r : LandmarkRecordsFromEpisode(log, c)) records.push_back(r);
  }
  ASSERT_FALSE(records.empty());
  std::ostringstream os;
  WriteLandmarksJsonl(os, records);
  std::istringstream in(os.str());
  const auto back = ReadLandmarksJsonl(in);
  std::ostringstream again;
  WriteLandmarksJsonl(again, back);
  EXPECT_EQ(again.str(), os.str());
}

// ---- commands ------------------------------------------------------------------------

TEST(CmdSimulateTest, SameSeedSameBytes) {
  TempDir dir;
  PipelineConfig c = SmallConfig();
  c.episodes = 10;
  const auto a = CmdSimulate(c, dir / "a");
  const auto b = CmdSimulate(c, dir / "b");
  EXPECT_EQ(Digests(a), Digests(b));
  EXPECT_EQ(Slurp(dir / "a" / kEpisodesFile), Slurp(dir / "b" / kEpisodesFile));
  c.seed = 8;
  EXPECT_NE(Digests(CmdSimulate(c, dir / "c")), Digests(a));
}

TEST(CmdSimulateTest, ZeroEpisodesFailsWithManifest) {
  TempDir dir;
  PipelineConfig c = SmallConfig();
  c.episodes = 0;
  EXPECT_EQ(KindOf([&] { CmdSimulate(c, dir.path()); }), ErrorKind::kInvalidArgument);
  const Json m = Json::parse(Slurp(dir / "manifest_simulate.json"));
  EXPECT_EQ(m.at("status"), "failed");
  EXPECT_FALSE(m.at("error").get<std::string>().empty());
}

TEST(CmdSimulateTest, ManifestDigestsMatchFiles) {
  TempDir dir;
  const auto m = CmdSimulate(SmallConfig(), dir.path());
  ASSERT_EQ(m.outputs.size(), 1u);
  EXPECT_EQ(m.outputs[0].sha256, Sha256File(dir / kEpisodesFile));
  EXPECT_EQ(m.outputs[0].sha256.size(), 64u);
  // Digest of the empty string.
  Spit(dir / "empty", "");
  EXPECT_EQ(Sha256File(dir / "empty"),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(CmdTrainTest, GridModelsPassSchemaValidation) {
  TempDir dir;
  const PipelineConfig c = SmallConfig();
  CmdSimulate(c, dir / "data");
  const auto m = CmdTrain(c, dir / "data", dir / "models");
  EXPECT_EQ(m.status, "ok");
  const auto actionlets =
      ActionletModelFromJson(Json::parse(Slurp(dir / "models" / kActionletsFile)));
  const auto table =
      LikelihoodTableFromJson(Json::parse(Slurp(dir / "models" / kLikelihoodsFile)));
  EXPECT_EQ(actionlets.k(), c.k);
  EXPECT_EQ(table.num_actions(), c.k);
  EXPECT_EQ(table.spec(), c.grid);
  const Json split = Json::parse(Slurp(dir / "models" / kSplitFile));
  EXPECT_EQ(split.at("unit"), "episode");
  EXPECT_EQ(split.at("train").size(), 6u);
}

TEST(CmdTrainTest, LandmarkModelMatchesDirectFit) {
  TempDir dir;
  PipelineConfig c = SmallConfig();
  c.mode = "landmark";
  CmdSimulate(c, dir / "data");
  CmdTrain(c, dir / "data", dir / "models");
  const LogitModel stored =
      LogitModelFromJson(Json::parse(Slurp(dir / "models" / kLogitFile)));
  std::ifstream in(dir / "data" / kLandmarksFile);
  const auto records = ReadLandmarksJsonl(in);
  const auto split = MakeLandmarkSplit(c, records);
  std::vector<LogitSample> samples;
  for (const auto& r : records) {
    if (split.IsTrain(r.clip_id)) samples.push_back({{r.xi}, r.action});
  }
  const auto direct = FitLogit(samples, c.logit).model;
  for (int a = 0; a < kNumSemanticActions; ++a) {
    for (int d = 0; d < kLogitFeatureDim; ++d) {
      EXPECT_EQ(stored.weights[a][d], direct.weights[a][d]);
    }
  }
}

TEST(CmdEvalTest, TruthAgainstItselfScoresZero) {
  PipelineConfig c = SmallConfig();
  c.episodes = 4;
  const auto logs = SimulateEpisodes(c);
  const std::vector<bool> use(logs.size(), true);
  const auto report = EvaluateGrid(c, logs, use, nullptr);
  ASSERT_FALSE(report.frames.empty());
  for (const auto& f : report.frames) {
    EXPECT_EQ(ImageSimilarity(*f.truth, *f.truth), 0.0);
  }
}

TEST(CmdEvalTest, BaselineNeedsNoModelsAndMatchesFusedRun) {
  TempDir dir;
  const PipelineConfig c = SmallConfig();
  CmdSimulate(c, dir / "data");
  CmdTrain(c, dir / "data", dir / "models");
  CmdEval(c, dir / "data", std::nullopt, dir / "baseline");
  CmdEval(c, dir / "data", dir / "models", dir / "fused");
  const Json base = Json::parse(Slurp(dir / "baseline" / "summary.json"));
  const Json fused = Json::parse(Slurp(dir / "fused" / "summary.json"));
  EXPECT_TRUE(base.at("fused").is_null());
  EXPECT_TRUE(base.at("fused_to_standard_ratio").is_null());
  EXPECT_EQ(base.at("standard"), fused.at("standard"));
  EXPECT_FALSE(fused.at("fused").is_null());
  EXPECT_GT(base.at("frames").get<int>(), 0);
}

TEST(CmdEvalTest, RejectsSplitFromAnotherSeed) {
  TempDir dir;
  PipelineConfig c = SmallConfig();
  CmdSimulate(c, dir / "data");
  CmdTrain(c, dir / "data", dir / "models");
  c.seed = 99;
  EXPECT_EQ(KindOf([&] { CmdEval(c, dir / "data", dir / "models", dir / "eval"); }),
            ErrorKind::kData);
  EXPECT_TRUE(fs::exists(dir / "eval" / "manifest_eval.json"));
}

TEST(CmdEvalTest, MissingDataIsAnIoError) {
  TempDir dir;
  EXPECT_EQ(KindOf([&] {
              CmdEval(SmallConfig(), dir / "nowhere", std::nullopt, dir / "eval");
            }),
            ErrorKind::kIo);
}

TEST(CmdEvalTest, ConstantLikelihoodModelHasZeroImprovement) {
  TempDir dir;
  PipelineConfig c = SmallConfig();
  c.mode = "landmark";
  c.episodes = 30;
  CmdSimulate(c, dir / "data");
  CmdTrain(c, dir / "data", dir / "models");
  Spit(dir / "models" / kLogitFile, ToJson(LogitModel{}).dump());
  CmdEval(c, dir / "data", dir / "models", dir / "eval");
  const Json table = Json::parse(Slurp(dir / "eval" / "table.json"));
  int rows_with_data = 0;
  for (const auto& row : table.at("rows")) {
    if (row.at("improvement_ratio").is_null()) continue;
    ++rows_with_data;
    EXPECT_NEAR(row.at("improvement_ratio").get<double>(), 0.0, 1e-12);
  }
  EXPECT_GT(rows_with_data, 0);
}

TEST(CmdEvalTest, LandmarkModeRequiresModels) {
  TempDir dir;
  PipelineConfig c = SmallConfig();
  c.mode = "landmark";
  CmdSimulate(c, dir / "data");
  EXPECT_EQ(KindOf([&] { CmdEval(c, dir / "data", std::nullopt, dir / "eval"); }),
            ErrorKind::kInvalidArgument);
}

// ---- ingest ----------------------------------------------------------------------------

constexpr const char* kValidRecord =
    R"({"clip_id":"video_0001","frame":12,"bbox":[940,540,40,100],)"
    R"("action_label":"Stopped","camera":{"fx":1000,"fy":1000,"cx":960,"cy":540,"height_m":1.2},)"
    R"("occluded":true})";

TEST(IngestTest, EmptyInputGivesEmptyDataset) {
  IngestStats stats;
  std::istringstream in("");
  EXPECT_TRUE(IngestAnnotations(in, "empty", {}, stats).empty());
  EXPECT_EQ(stats.records, 0);
  EXPECT_EQ(stats.skipped_above_horizon, 0);
}

TEST(IngestTest, PinholeRecord) {
  IngestStats stats;
  std::istringstream in(std::string(kValidRecord) + "\n");
  const auto r = IngestAnnotations(in, "one", {}, stats);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0].xi.x, 0.0, 1e-12);
  EXPECT_NEAR(r[0].xi.y, 12.0, 1e-12);
  EXPECT_EQ(r[0].action, SemanticAction::kStopped);
  EXPECT_TRUE(r[0].occluded);
  EXPECT_EQ(stats.accepted, 1);
}

TEST(IngestTest, MissingLabelIsCountedRejection) {
  IngestStats stats;
  std::istringstream in(
      R"({"clip_id":"a","frame":1,"bbox":[940,540,40,100],"occluded":false})"
      "\n"
      R"({"clip_id":"a","frame":2,"bbox":[940,540,40,100],"action_label":null,"occluded":false})"
      "\n");
  EXPECT_TRUE(IngestAnnotations(in, "x", {}, stats).empty());
  EXPECT_EQ(stats.rejected_missing_action, 2);
  EXPECT_EQ(stats.records, 2);
}

TEST(IngestTest, HorizonBoxesAreSkipped) {
  IngestStats stats;
  std::istringstream in(
      R"({"clip_id":"a","frame":1,"bbox":[940,400,40,100],"action_label":"MovingFast","occluded":false})"
      "\n");
  EXPECT_TRUE(IngestAnnotations(in, "x", {}, stats).empty());
  EXPECT_EQ(stats.skipped_above_horizon, 1);
}

TEST(IngestTest, SchemaViolationsNameSourceAndLine) {
  IngestStats stats;
  std::istringstream in(std::string(kValidRecord) + "\n" +
                        R"({"clip_id":"a","frame":1,"bbox":[1,2,3],"action_label":"Stopped","occluded":true})" +
                        "\n");
  try {
    IngestAnnotations(in, "labels.jsonl", {}, stats);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
    EXPECT_NE(std::string(e.what()).find("labels.jsonl:2"), std::string::npos) << e.what();
  }
  std::istringstream unknown(
      R"({"clip_id":"a","frame":1,"bbox":[940,540,40,100],"action_label":"Reversing","occluded":true})"
      "\n");
  EXPECT_EQ(KindOf([&] { IngestAnnotations(unknown, "u", {}, stats); }), ErrorKind::kData);
}

TEST(CmdIngestTest, WritesLandmarksAndCounters) {
  TempDir dir;
  Spit(dir / "in.jsonl", std::string(kValidRecord) + "\n" +
                             R"({"clip_id":"b","frame":3,"bbox":[1,600,2,2],"occluded":true})" +
                             "\n");
  const auto m = CmdIngest(SmallConfig(), {dir / "in.jsonl"}, dir / "out");
  std::map<std::string, std::int64_t> counters(m.counters.begin(), m.counters.end());
  EXPECT_EQ(counters["records"], 2);
  EXPECT_EQ(counters["accepted"], 1);
  EXPECT_EQ(counters["rejected_missing_action"], 1);
  std::ifstream in(dir / "out" / kLandmarksFile);
  EXPECT_EQ(ReadLandmarksJsonl(in).size(), 1u);
}

// ---- CLI --------------------------------------------------------------------------------

int RunCli(const std::string& args) {
  const std::string cmd =
      std::string(DRIVERSENSE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliTest, EndToEndAndExitCodes) {
  TempDir dir;
  const std::string d = dir.path().string();
  Spit(dir / "run.cfg", "seed = 3\ntrain.k = 4\neval.frame_stride = 30\ntrain.split = 0.5\n");
  const std::string cfg = " --config " + d + "/run.cfg";
  EXPECT_EQ(RunCli("simulate --episodes 6 --out " + d + "/data" + cfg), 0);
  EXPECT_EQ(RunCli("train --data " + d + "/data --out " + d + "/models" + cfg), 0);
  EXPECT_EQ(RunCli("eval --data " + d + "/data --models " + d + "/models --out " + d +
                   "/eval" + cfg),
            0);
  EXPECT_TRUE(fs::exists(dir / "eval" / "summary.json"));
  EXPECT_EQ(RunCli("eval --data " + d + "/data --out " + d + "/base" + cfg), 0);

  EXPECT_EQ(RunCli(""), 1);
  EXPECT_EQ(RunCli("simulate --bogus"), 1);
  EXPECT_EQ(RunCli("simulate --mode video --out " + d + "/x"), 1);
  EXPECT_EQ(RunCli("simulate --set nope=1 --out " + d + "/x"), 1);
  EXPECT_EQ(RunCli("simulate --episodes 0 --out " + d + "/x"), 1);
  EXPECT_EQ(RunCli("eval --data " + d + "/missing --out " + d + "/y"), 2);
  Spit(dir / "bad" / kEpisodesFile, "{\"type\":\"episode\"}\n");
  EXPECT_EQ(RunCli("eval --data " + d + "/bad --out " + d + "/z"), 2);
}

TEST(CliTest, SeedFlagGivesReproducibleDigests) {
  TempDir dir;
  const std::string d = dir.path().string();
  ASSERT_EQ(RunCli("simulate --episodes 4 --seed 11 --out " + d + "/a"), 0);
  ASSERT_EQ(RunCli("simulate --episodes 4 --seed 11 --out " + d + "/b"), 0);
  EXPECT_EQ(Slurp(dir / "a" / kEpisodesFile), Slurp(dir / "b" / kEpisodesFile));
  const Json m = Json::parse(Slurp(dir / "a" / "manifest_simulate.json"));
  EXPECT_EQ(m.at("seed"), 11);
  EXPECT_EQ(m.at("status"), "ok");
}

}  // namespace
}  // namespace driversense::pipeline

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

// The four pipeline commands. Each writes its artifacts plus a
// manifest_<command>.json into the output directory.

#ifndef DRIVERSENSE_PIPELINE_COMMANDS_HPP_
#define DRIVERSENSE_PIPELINE_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "driversense/actionlets.hpp"
#include "driversense/error.hpp"
#include "driversense/fusion.hpp"
#include "driversense/grid.hpp"
#include "driversense/grid_io.hpp"
#include "driversense/landmark.hpp"
#include "driversense/likelihood_table.hpp"
#include "driversense/metrics.hpp"
#include "driversense/perception.hpp"
#include "driversense/pipeline/config.hpp"
#include "driversense/pipeline/dataset.hpp"
#include "driversense/pipeline/manifest.hpp"
#include "driversense/random.hpp"
#include "driversense/serialization.hpp"
#include "driversense/simulator.hpp"

namespace driversense::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kEpisodesFile = "episodes.jsonl";
inline constexpr const char* kLandmarksFile = "landmarks.jsonl";
inline constexpr const char* kActionletsFile = "actionlets.json";
inline constexpr const char* kLikelihoodsFile = "likelihoods.json";
inline constexpr const char* kLogitFile = "logit.json";
inline constexpr const char* kSplitFile = "split.json";
inline constexpr const char* kSplitSchema = "driversense.split";
inline constexpr const char* kSummarySchema = "driversense.eval_summary";

namespace internal {

inline std::ifstream OpenInput(const fs::path& path) {
  std::ifstream in(path);
  if (!in) ThrowIo("cannot open '" + path.string() + "'");
  return in;
}

inline Json ReadJsonFile(const fs::path& path) {
  auto in = OpenInput(path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    ThrowData(path.string() + ": " + e.what());
  }
}

// Writes `content` to out_dir/name and records its digest.
inline void WriteOutput(RunManifest& manifest, const fs::path& out_dir,
                        const std::string& name, const std::string& content) {
  const fs::path path = out_dir / name;
  fs::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) ThrowIo("cannot write '" + path.string() + "'");
    out << content;
    if (!out) ThrowIo("write failed for '" + path.string() + "'");
  }
  FileDigest d = DigestOf(path);
  d.path = name;
  manifest.outputs.push_back(d);
}

inline void RecordInput(RunManifest& manifest, const fs::path& path) {
  manifest.inputs.push_back(DigestOf(path));
}

// Runs `body`, then writes the manifest whether or not the body succeeded.
inline RunManifest RunCommand(const std::string& name,
                              const PipelineConfig& config,
                              const fs::path& out_dir,
                              const std::function<void(RunManifest&)>& body) {
  RunManifest manifest;
  manifest.command = name;
  manifest.config = config;
  const fs::path manifest_path = out_dir / ("manifest_" + name + ".json");
  try {
    fs::create_directories(out_dir);
  } catch (const fs::filesystem_error& e) {
    ThrowIo("cannot create output directory '" + out_dir.string() +
            "': " + e.what());
  }
  try {
    {
      StageTimer total(manifest, "total");
      config.Validate();
      body(manifest);
    }
    manifest.status = "ok";
  } catch (const std::exception& e) {
    manifest.status = "failed";
    manifest.error = e.what();
    try {
      manifest.Write(manifest_path);
    } catch (...) {
    }
    throw;
  }
  manifest.Write(manifest_path);
  return manifest;
}

inline std::string Fmt(double v) { return FormatDouble(v); }

}  // namespace internal

inline std::vector<EpisodeLog> LoadEpisodes(const fs::path& data_dir,
                                            RunManifest* manifest = nullptr) {
  const fs::path path = data_dir / kEpisodesFile;
  auto in = internal::OpenInput(path);
  std::vector<EpisodeLog> logs;
  try {
    logs = ReadEpisodesJsonl(in);
  } catch (const Error& e) {
    ThrowData(path.string() + ": " + e.what());
  }
  if (manifest) internal::RecordInput(*manifest, path);
  return logs;
}

inline std::vector<LandmarkRecord> LoadLandmarks(const fs::path& data_dir,
                                                 RunManifest* manifest = nullptr) {
  const fs::path path = data_dir / kLandmarksFile;
  auto in = internal::OpenInput(path);
  std::vector<LandmarkRecord> records;
  try {
    records = ReadLandmarksJsonl(in);
  } catch (const Error& e) {
    ThrowData(path.string() + ": " + e.what());
  }
  if (manifest) internal::RecordInput(*manifest, path);
  return records;
}

// ---- simulate -----------------------------------------------------------------

inline std::vector<EpisodeLog> SimulateEpisodes(const PipelineConfig& config) {
  std::vector<EpisodeLog> logs;
  logs.reserve(config.episodes);
  for (int i = 0; i < config.episodes; ++i) {
    const std::uint64_t seed = DeriveSeed(config.seed, "simulate", i);
    Rng rng(seed);
    const Scenario scenario = SampleScenario(config.scenario, rng);
    logs.push_back(RunEpisode(config.scenario, scenario, i, seed));
  }
  return logs;
}

inline RunManifest CmdSimulate(const PipelineConfig& config,
                               const fs::path& out_dir) {
  return internal::RunCommand("simulate", config, out_dir, [&](RunManifest& m) {
    if (config.episodes <= 0) ThrowInvalid("episodes must be positive");
    std::vector<EpisodeLog> logs;
    {
      StageTimer timer(m, "simulate");
      logs = SimulateEpisodes(config);
    }
    std::int64_t frames = 0;
    std::ostringstream os;
    for (const auto& log : logs) {
      WriteEpisodeJsonl(os, log);
      frames += static_cast<std::int64_t>(log.frames.size());
    }
    internal::WriteOutput(m, out_dir, kEpisodesFile, os.str());
    m.counters.emplace_back("episodes", static_cast<std::int64_t>(logs.size()));
    m.counters.emplace_back("frames", frames);
    if (config.mode == "landmark") {
      StageTimer timer(m, "landmarks");
      std::ostringstream ls;
      std::int64_t n = 0;
      std::int64_t occluded = 0;
      for (const auto& log : logs) {
        const auto records = LandmarkRecordsFromEpisode(log, config);
        for (const auto& r : records) occluded += r.occluded ? 1 : 0;
        n += static_cast<std::int64_t>(records.size());
        WriteLandmarksJsonl(ls, records);
      }
      internal::WriteOutput(m, out_dir, kLandmarksFile, ls.str());
      m.counters.emplace_back("landmark_records", n);
      m.counters.emplace_back("landmark_occluded", occluded);
    }
  });
}

// ---- train --------------------------------------------------------------------

inline Json SplitJson(const PipelineConfig& config, const std::string& unit,
                      const Json& train, const Json& eval) {
  return {{"schema", kSplitSchema}, {"version", kSchemaVersion},
          {"unit", unit},           {"fraction", config.split},
          {"seed", config.seed},    {"train", train},
          {"eval", eval}};
}

struct GridSplit {
  std::vector<bool> train;
  Json ToJson(const PipelineConfig& config,
              const std::vector<EpisodeLog>& logs) const {
    Json tr = Json::array();
    Json ev = Json::array();
    for (std::size_t i = 0; i < logs.size(); ++i) {
      (train[i] ? tr : ev).push_back(logs[i].episode_id);
    }
    return SplitJson(config, "episode", tr, ev);
  }
};

inline GridSplit MakeGridSplit(const PipelineConfig& config,
                               const std::vector<EpisodeLog>& logs) {
  return {SplitTrain(logs.size(), config.split, config.seed)};
}

struct GridModels {
  ActionletModel actionlets;
  LikelihoodTable table;
};

struct GridTrainResult {
  GridModels models;
  KMeansResult kmeans;
  std::size_t train_frames = 0;
};

inline GridTrainResult TrainGridModels(const PipelineConfig& config,
                                       const std::vector<EpisodeLog>& logs,
                                       const std::vector<bool>& train) {
  std::vector<FeatureWindow> features;
  std::vector<BinaryMap> truths;
  for (std::size_t e = 0; e < logs.size(); ++e) {
    if (!train[e]) continue;
    const EpisodeLog& log = logs[e];
    const auto track = log.OccluderTrack();
    for (std::size_t k : EvaluableFrames(log, config.train_stride)) {
      features.push_back(FrameFeatures(log, track, k));
      truths.push_back(GroundTruthGrid(log, log.frames[k].t, config.grid));
    }
  }
  if (features.size() < static_cast<std::size_t>(config.k)) {
    ThrowData("training split has " + std::to_string(features.size()) +
              " frames, fewer than k = " + std::to_string(config.k));
  }
  KMeansResult km = KMeansFit(features, config.k, config.kmeans_max_iters,
                              DeriveSeed(config.seed, "train.kmeans", 0));
  std::vector<LabeledMap> labeled;
  labeled.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    labeled.push_back({AssignActionlet(km.model, features[i]), truths[i]});
  }
  LikelihoodTable table =
      EstimateLikelihoods(labeled, config.grid, config.k, config.alpha);
  return {{km.model, std::move(table)}, std::move(km), features.size()};
}

struct LandmarkSplit {
  std::vector<std::string> clips;  // first-appearance order
  std::vector<bool> train;

  bool IsTrain(const std::string& clip) const {
    for (std::size_t i = 0; i < clips.size(); ++i) {
      if (clips[i] == clip) return train[i];
    }
    return false;
  }
  Json ToJson(const PipelineConfig& config) const {
    Json tr = Json::array();
    Json ev = Json::array();
    for (std::size_t i = 0; i < clips.size(); ++i) {
      (train[i] ? tr : ev).push_back(clips[i]);
    }
    return SplitJson(config, "clip", tr, ev);
  }
};

inline LandmarkSplit MakeLandmarkSplit(const PipelineConfig& config,
                                       const std::vector<LandmarkRecord>& records) {
  LandmarkSplit s;
  std::map<std::string, bool> seen;
  for (const auto& r : records) {
    if (seen.emplace(r.clip_id, true).second) s.clips.push_back(r.clip_id);
  }
  s.train = SplitTrain(s.clips.size(), config.split, config.seed);
  return s;
}

inline std::vector<bool> TrainMask(const LandmarkSplit& split,
                                   const std::vector<LandmarkRecord>& records) {
  std::map<std::string, bool> is_train;
  for (std::size_t i = 0; i < split.clips.size(); ++i) {
    is_train[split.clips[i]] = split.train[i];
  }
  std::vector<bool> mask(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    mask[i] = is_train.at(records[i].clip_id);
  }
  return mask;
}

inline LogitFitResult TrainLandmarkModel(const PipelineConfig& config,
                                         const std::vector<LandmarkRecord>& records,
                                         const std::vector<bool>& train) {
  std::vector<LogitSample> samples;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (train[i]) samples.push_back({{records[i].xi}, records[i].action});
  }
  if (samples.empty()) ThrowData("training split has no landmark samples");
  return FitLogit(samples, config.logit);
}

inline RunManifest CmdTrain(const PipelineConfig& config,
                            const fs::path& data_dir, const fs::path& out_dir) {
  return internal::RunCommand("train", config, out_dir, [&](RunManifest& m) {
    if (config.mode == "grid") {
      const auto logs = LoadEpisodes(data_dir, &m);
      if (logs.empty()) ThrowData("dataset has no episodes");
      const GridSplit split = MakeGridSplit(config, logs);
      const GridTrainResult result = [&] {
        StageTimer timer(m, "fit");
        return TrainGridModels(config, logs, split.train);
      }();
      internal::WriteOutput(m, out_dir, kActionletsFile,
                            ToJson(result.models.actionlets).dump(2) + "\n");
      internal::WriteOutput(m, out_dir, kLikelihoodsFile,
                            ToJson(result.models.table).dump(2) + "\n");
      internal::WriteOutput(m, out_dir, kSplitFile,
                            split.ToJson(config, logs).dump(2) + "\n");
      std::int64_t n_train = 0;
      for (bool b : split.train) n_train += b ? 1 : 0;
      m.counters.emplace_back("train_episodes", n_train);
      m.counters.emplace_back("train_frames",
                              static_cast<std::int64_t>(result.train_frames));
      m.counters.emplace_back("kmeans_iterations", result.kmeans.iterations);
    } else {
      const auto records = LoadLandmarks(data_dir, &m);
      if (records.empty()) ThrowData("dataset has no landmark records");
      const LandmarkSplit split = MakeLandmarkSplit(config, records);
      LogitFitResult fit;
      {
        StageTimer timer(m, "fit");
        fit = TrainLandmarkModel(config, records, TrainMask(split, records));
      }
      internal::WriteOutput(m, out_dir, kLogitFile, ToJson(fit.model).dump(2) + "\n");
      internal::WriteOutput(m, out_dir, kSplitFile,
                            split.ToJson(config).dump(2) + "\n");
      std::int64_t n_train = 0;
      for (bool b : split.train) n_train += b ? 1 : 0;
      m.counters.emplace_back("train_clips", n_train);
      m.counters.emplace_back("logit_iterations", fit.iterations);
    }
  });
}

// ---- eval ---------------------------------------------------------------------

struct GridFrameResult {
  std::uint64_t episode_id = 0;
  std::size_t frame = 0;
  double t = 0.0;
  PedestrianBehavior behavior = PedestrianBehavior::kAbsent;
  bool pedestrian_present = false;
  std::size_t occluded_cells = 0;
  std::optional<ActionId> action;
  SimilarityTerms standard;
  std::optional<SimilarityTerms> fused;
  std::optional<OccupancyGrid> standard_grid;
  std::optional<OccupancyGrid> fused_grid;
  std::optional<BinaryMap> truth;
};

inline GridFrameResult EvaluateGridFrame(const PipelineConfig& config,
                                         const EpisodeLog& log,
                                         const std::vector<TrackSample>& track,
                                         std::size_t k,
                                         const GridModels* models) {
  const EpisodeFrame& f = log.frames.at(k);
  const Pose2D& ref = f.ego.pose;
  GridFrameResult r;
  r.episode_id = log.episode_id;
  r.frame = k;
  r.t = f.t;
  r.behavior = log.scenario.behavior;
  r.pedestrian_present = f.pedestrian.has_value();

  const Scan scan = EgoScan(log, k, config);
  const auto vis = VisibilityMask(scan, config.grid, ref);
  std::vector<std::uint8_t> mask;
  for (auto v : vis) r.occluded_cells += v == CellVisibility::kOccluded ? 1 : 0;
  if (config.psi_region == "occluded") {
    for (auto v : vis) mask.push_back(v == CellVisibility::kOccluded ? 1 : 0);
  }
  r.truth = GroundTruthGrid(log, f.t, config.grid);
  r.standard_grid = StandardInverseUpdate(NewUniformGrid(config.grid), scan,
                                          ref, config.inverse);
  r.standard = SimilarityBreakdown(Threshold(*r.standard_grid, config.tau),
                                   *r.truth, mask);
  if (models != nullptr) {
    r.action = AssignActionlet(models->actionlets, FrameFeatures(log, track, k));
    r.fused_grid = FuseAction(*r.standard_grid, models->table, *r.action);
    r.fused = SimilarityBreakdown(Threshold(*r.fused_grid, config.tau), *r.truth,
                                  mask);
  }
  return r;
}

struct MethodSummary {
  SummaryStats overall;
  SummaryStats t_start;
  SummaryStats t_half;
  SummaryStats t_end;
  SimilarityTerms mean_terms;
};

struct GridEvalReport {
  std::vector<GridFrameResult> frames;
  std::size_t episodes = 0;
  MethodSummary standard;
  std::optional<MethodSummary> fused;

  std::optional<double> Ratio() const {
    if (!fused || !(standard.overall.mean > 0.0)) return std::nullopt;
    return fused->overall.mean / standard.overall.mean;
  }
};

namespace internal {

inline MethodSummary SummarizeMethod(
    const std::vector<GridFrameResult>& frames,
    const std::vector<SliceFrames>& slices,
    const std::vector<std::size_t>& episode_begin,
    const std::function<const SimilarityTerms*(const GridFrameResult&)>& get) {
  MethodSummary s;
  std::vector<double> all;
  for (const auto& f : frames) {
    const SimilarityTerms* t = get(f);
    all.push_back(t->psi());
    s.mean_terms.ab0 += t->ab0;
    s.mean_terms.ab1 += t->ab1;
    s.mean_terms.ba0 += t->ba0;
    s.mean_terms.ba1 += t->ba1;
  }
  if (!frames.empty()) {
    const double n = static_cast<double>(frames.size());
    s.mean_terms = {s.mean_terms.ab0 / n, s.mean_terms.ab1 / n,
                    s.mean_terms.ba0 / n, s.mean_terms.ba1 / n};
  }
  s.overall = Summarize(all);
  std::vector<double> start, half, end;
  for (std::size_t e = 0; e < slices.size(); ++e) {
    const std::size_t b = episode_begin[e];
    const std::size_t stop = episode_begin[e + 1];
    for (std::size_t i = b; i < stop; ++i) {
      const double psi = get(frames[i])->psi();
      if (frames[i].frame == slices[e].start) start.push_back(psi);
      if (frames[i].frame == slices[e].middle) half.push_back(psi);
      if (frames[i].frame == slices[e].end) end.push_back(psi);
    }
  }
  s.t_start = Summarize(start);
  s.t_half = Summarize(half);
  s.t_end = Summarize(end);
  return s;
}

inline Json StatsJson(const SummaryStats& s) {
  return {{"mean", s.mean}, {"std_error", s.std_error}, {"count", s.count}};
}

inline Json MethodJson(const MethodSummary& s) {
  return {{"overall", StatsJson(s.overall)},
          {"t_start", StatsJson(s.t_start)},
          {"t_half", StatsJson(s.t_half)},
          {"t_end", StatsJson(s.t_end)},
          {"mean_terms",
           {{"d_est_truth_0", s.mean_terms.ab0},
            {"d_est_truth_1", s.mean_terms.ab1},
            {"d_truth_est_0", s.mean_terms.ba0},
            {"d_truth_est_1", s.mean_terms.ba1}}}};
}

}  // namespace internal

// Scores every evaluable frame of the episodes flagged in `use`.
inline GridEvalReport EvaluateGrid(const PipelineConfig& config,
                                   const std::vector<EpisodeLog>& logs,
                                   const std::vector<bool>& use,
                                   const GridModels* models) {
  if (models != nullptr) {
    if (!(models->table.spec() == config.grid)) {
      ThrowData("likelihood table grid does not match the configured grid");
    }
    if (models->table.num_actions() != models->actionlets.k()) {
      ThrowData("likelihood table and actionlet model disagree on k");
    }
  }
  GridEvalReport report;
  std::vector<SliceFrames> slices;
  std::vector<std::size_t> begin;
  for (std::size_t e = 0; e < logs.size(); ++e) {
    if (!use[e]) continue;
    const EpisodeLog& log = logs[e];
    const auto track = log.OccluderTrack();
    begin.push_back(report.frames.size());
    slices.push_back(SliceFramesOf(log));
    for (std::size_t k : EvaluableFrames(log, config.eval_stride)) {
      report.frames.push_back(EvaluateGridFrame(config, log, track, k, models));
    }
    ++report.episodes;
  }
  begin.push_back(report.frames.size());
  report.standard = internal::SummarizeMethod(
      report.frames, slices, begin,
      [](const GridFrameResult& f) { return &f.standard; });
  if (models != nullptr) {
    report.fused = internal::SummarizeMethod(
        report.frames, slices, begin,
        [](const GridFrameResult& f) { return &*f.fused; });
  }
  return report;
}

inline std::string GridFramesCsv(const GridEvalReport& report) {
  using internal::Fmt;
  std::ostringstream os;
  os << "episode_id,frame,t,behavior,pedestrian_present,occluded_cells,action,"
        "psi_standard,psi_fused,standard_d_est_truth_0,standard_d_est_truth_1,"
        "standard_d_truth_est_0,standard_d_truth_est_1,fused_d_est_truth_0,"
        "fused_d_est_truth_1,fused_d_truth_est_0,fused_d_truth_est_1\n";
  for (const auto& f : report.frames) {
    os << f.episode_id << ',' << f.frame << ',' << Fmt(f.t) << ','
       << ToString(f.behavior) << ',' << (f.pedestrian_present ? 1 : 0) << ','
       << f.occluded_cells << ',';
    if (f.action) os << *f.action;
    os << ',' << Fmt(f.standard.psi()) << ',';
    if (f.fused) os << Fmt(f.fused->psi());
    os << ',' << Fmt(f.standard.ab0) << ',' << Fmt(f.standard.ab1) << ','
       << Fmt(f.standard.ba0) << ',' << Fmt(f.standard.ba1);
    if (f.fused) {
      os << ',' << Fmt(f.fused->ab0) << ',' << Fmt(f.fused->ab1) << ','
         << Fmt(f.fused->ba0) << ',' << Fmt(f.fused->ba1);
    } else {
      os << ",,,,";
    }
    os << '\n';
  }
  return os.str();
}

inline Json GridSummaryJson(const PipelineConfig& config,
                            const GridEvalReport& report) {
  Json j = {{"schema", kSummarySchema},
            {"version", kSchemaVersion},
            {"mode", "grid"},
            {"psi_region", config.psi_region},
            {"tau", config.tau},
            {"episodes", report.episodes},
            {"frames", report.frames.size()},
            {"standard", internal::MethodJson(report.standard)}};
  j["fused"] = report.fused ? internal::MethodJson(*report.fused) : Json(nullptr);
  const auto ratio = report.Ratio();
  j["fused_to_standard_ratio"] = ratio ? Json(*ratio) : Json(nullptr);
  return j;
}

struct LandmarkSampleResult {
  std::string clip_id;
  std::int64_t frame = 0;
  SemanticAction action = SemanticAction::kMovingFast;
  std::size_t candidates = 0;
  double p_uniform = 0.0;
  double p_ours = 0.0;
};

struct LandmarkRow {
  SemanticAction action = SemanticAction::kMovingFast;
  std::size_t count = 0;
  double p_uniform = 0.0;
  double p_ours = 0.0;
  std::optional<double> improvement;
};

struct LandmarkEvalReport {
  std::vector<LandmarkSampleResult> samples;
  std::vector<LandmarkRow> rows;  // one per semantic action
  std::int64_t skipped_not_occluded = 0;
  std::int64_t skipped_outside_region = 0;

  const LandmarkRow& Row(SemanticAction a) const {
    return rows.at(static_cast<std::size_t>(a));
  }
};

inline LandmarkEvalReport EvaluateLandmarks(const PipelineConfig& config,
                                            const std::vector<LandmarkRecord>& records,
                                            const std::vector<bool>& use,
                                            const LogitModel& model) {
  const GridSpec& region = config.landmark_region;
  LandmarkEvalReport report;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!use[i]) continue;
    const LandmarkRecord& r = records[i];
    if (!r.occluded) {
      ++report.skipped_not_occluded;
      continue;
    }
    std::vector<std::size_t> cells;
    if (r.candidate_cells) {
      cells = *r.candidate_cells;
    } else {
      for (std::size_t c = 0; c < region.size(); ++c) cells.push_back(c);
    }
    const auto truth_cell = region.LocateLocal(r.xi);
    const auto it = truth_cell ? std::find(cells.begin(), cells.end(), *truth_cell)
                               : cells.end();
    if (it == cells.end()) {
      ++report.skipped_outside_region;
      continue;
    }
    OccludedRegion occ;
    for (std::size_t c : cells) {
      if (c >= region.size()) ThrowData("candidate cell outside the region");
      occ.candidates.push_back(region.CellCenterLocal(c));
    }
    const auto post = PosteriorOverRegion(model, occ, r.action);
    report.samples.push_back(
        {r.clip_id, r.frame, r.action, cells.size(),
         1.0 / static_cast<double>(cells.size()),
         PosteriorMassAtTruth(post, static_cast<std::size_t>(it - cells.begin()))});
  }
  for (auto a : kAllSemanticActions) {
    LandmarkRow row;
    row.action = a;
    for (const auto& s : report.samples) {
      if (s.action != a) continue;
      ++row.count;
      row.p_uniform += s.p_uniform;
      row.p_ours += s.p_ours;
    }
    if (row.count > 0) {
      row.p_uniform /= static_cast<double>(row.count);
      row.p_ours /= static_cast<double>(row.count);
      row.improvement = ImprovementRatio(row.p_ours, row.p_uniform);
    }
    report.rows.push_back(row);
  }
  return report;
}

inline std::string LandmarkSamplesCsv(const LandmarkEvalReport& report) {
  using internal::Fmt;
  std::ostringstream os;
  os << "clip_id,frame,action,candidates,p_uniform,p_ours\n";
  for (const auto& s : report.samples) {
    os << s.clip_id << ',' << s.frame << ',' << ToString(s.action) << ','
       << s.candidates << ',' << Fmt(s.p_uniform) << ',' << Fmt(s.p_ours) << '\n';
  }
  return os.str();
}

inline std::string LandmarkTableCsv(const LandmarkEvalReport& report) {
  using internal::Fmt;
  std::ostringstream os;
  os << "action,count,p_uniform,p_ours,improvement_ratio\n";
  for (const auto& r : report.rows) {
    os << ToString(r.action) << ',' << r.count << ',';
    if (r.count > 0) {
      os << Fmt(r.p_uniform) << ',' << Fmt(r.p_ours) << ',' << Fmt(*r.improvement);
    } else {
      os << ",,";
    }
    os << '\n';
  }
  return os.str();
}

inline Json LandmarkTableJson(const LandmarkEvalReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json row = {{"action", ToString(r.action)}, {"count", r.count}};
    row["p_uniform"] = r.count ? Json(r.p_uniform) : Json(nullptr);
    row["p_ours"] = r.count ? Json(r.p_ours) : Json(nullptr);
    row["improvement_ratio"] = r.improvement ? Json(*r.improvement) : Json(nullptr);
    rows.push_back(row);
  }
  return {{"schema", kSummarySchema},
          {"version", kSchemaVersion},
          {"mode", "landmark"},
          {"samples", report.samples.size()},
          {"skipped_not_occluded", report.skipped_not_occluded},
          {"skipped_outside_region", report.skipped_outside_region},
          {"rows", rows}};
}

namespace internal {

// A split.json next to the models must match the split recomputed from the
// configuration.
inline void CheckSplit(const std::optional<fs::path>& models_dir,
                       const Json& expected) {
  if (!models_dir) return;
  const fs::path path = *models_dir / kSplitFile;
  if (!fs::exists(path)) return;
  const Json stored = ReadJsonFile(path);
  driversense::internal::CheckSchema(stored, kSplitSchema);
  if (stored.at("train") != expected.at("train")) {
    ThrowData("stored split does not match the configured seed and fraction");
  }
}

}  // namespace internal

inline RunManifest CmdEval(const PipelineConfig& config, const fs::path& data_dir,
                           const std::optional<fs::path>& models_dir,
                           const fs::path& out_dir) {
  return internal::RunCommand("eval", config, out_dir, [&](RunManifest& m) {
    if (config.mode == "grid") {
      const auto logs = LoadEpisodes(data_dir, &m);
      if (logs.empty()) ThrowData("dataset has no episodes");
      const GridSplit split = MakeGridSplit(config, logs);
      internal::CheckSplit(models_dir, split.ToJson(config, logs));
      std::optional<GridModels> models;
      if (models_dir) {
        const fs::path a = *models_dir / kActionletsFile;
        const fs::path l = *models_dir / kLikelihoodsFile;
        try {
          models = GridModels{ActionletModelFromJson(internal::ReadJsonFile(a)),
                              LikelihoodTableFromJson(internal::ReadJsonFile(l))};
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::kIo) throw;
          ThrowData(std::string("models: ") + e.what());
        }
        internal::RecordInput(m, a);
        internal::RecordInput(m, l);
      }
      std::vector<bool> use(split.train.size());
      for (std::size_t i = 0; i < use.size(); ++i) use[i] = !split.train[i];
      GridEvalReport report;
      {
        StageTimer timer(m, "evaluate");
        report = EvaluateGrid(config, logs, use, models ? &*models : nullptr);
      }
      internal::WriteOutput(m, out_dir, "frames.csv", GridFramesCsv(report));
      internal::WriteOutput(m, out_dir, "summary.json",
                            GridSummaryJson(config, report).dump(2) + "\n");
      if (config.dump_pgm) {
        for (const auto& f : report.frames) {
          const auto& log = *std::find_if(logs.begin(), logs.end(), [&](const EpisodeLog& l) {
            return l.episode_id == f.episode_id;
          });
          const SliceFrames s = SliceFramesOf(log);
          if (f.frame != s.start && f.frame != s.middle && f.frame != s.end) continue;
          char stem[64];
          std::snprintf(stem, sizeof(stem), "pgm/ep%06llu_k%05zu_",
                        static_cast<unsigned long long>(f.episode_id), f.frame);
          std::ostringstream a;
          WriteGridPgm(a, *f.standard_grid);
          internal::WriteOutput(m, out_dir, std::string(stem) + "standard.pgm", a.str());
          if (f.fused_grid) {
            std::ostringstream b;
            WriteGridPgm(b, *f.fused_grid);
            internal::WriteOutput(m, out_dir, std::string(stem) + "fused.pgm", b.str());
          }
          std::vector<double> probs(f.truth->size());
          for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = f.truth->at(i);
          std::ostringstream c;
          WriteGridPgm(c, OccupancyGrid(f.truth->spec(), probs));
          internal::WriteOutput(m, out_dir, std::string(stem) + "truth.pgm", c.str());
        }
      }
      m.counters.emplace_back("eval_episodes", static_cast<std::int64_t>(report.episodes));
      m.counters.emplace_back("eval_frames",
                              static_cast<std::int64_t>(report.frames.size()));
    } else {
      if (!models_dir) ThrowInvalid("landmark evaluation needs --models");
      const auto records = LoadLandmarks(data_dir, &m);
      const LandmarkSplit split = MakeLandmarkSplit(config, records);
      internal::CheckSplit(models_dir, split.ToJson(config));
      const fs::path lp = *models_dir / kLogitFile;
      LogitModel model;
      try {
        model = LogitModelFromJson(internal::ReadJsonFile(lp));
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kIo) throw;
        ThrowData(std::string("models: ") + e.what());
      }
      internal::RecordInput(m, lp);
      auto use = TrainMask(split, records);
      for (std::size_t i = 0; i < use.size(); ++i) use[i] = !use[i];
      LandmarkEvalReport report;
      {
        StageTimer timer(m, "evaluate");
        report = EvaluateLandmarks(config, records, use, model);
      }
      internal::WriteOutput(m, out_dir, "samples.csv", LandmarkSamplesCsv(report));
      internal::WriteOutput(m, out_dir, "table.csv", LandmarkTableCsv(report));
      internal::WriteOutput(m, out_dir, "table.json",
                            LandmarkTableJson(report).dump(2) + "\n");
      m.counters.emplace_back("eval_samples",
                              static_cast<std::int64_t>(report.samples.size()));
    }
  });
}

// ---- ingest -------------------------------------------------------------------

inline RunManifest CmdIngest(const PipelineConfig& config,
                             const std::vector<fs::path>& inputs,
                             const fs::path& out_dir) {
  return internal::RunCommand("ingest", config, out_dir, [&](RunManifest& m) {
    IngestStats stats;
    std::vector<LandmarkRecord> records;
    for (const auto& path : inputs) {
      auto in = internal::OpenInput(path);
      auto part = IngestAnnotations(in, path.string(), config.camera, stats);
      records.insert(records.end(), part.begin(), part.end());
      internal::RecordInput(m, path);
    }
    std::ostringstream os;
    WriteLandmarksJsonl(os, records);
    internal::WriteOutput(m, out_dir, kLandmarksFile, os.str());
    m.counters.emplace_back("records", stats.records);
    m.counters.emplace_back("accepted", stats.accepted);
    m.counters.emplace_back("rejected_missing_action", stats.rejected_missing_action);
    m.counters.emplace_back("warnings_above_horizon", stats.skipped_above_horizon);
  });
}

}  // namespace driversense::pipeline

#endif  // DRIVERSENSE_PIPELINE_COMMANDS_HPP_

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

// Per-frame data extraction shared by the pipeline commands: feature windows
// and truth maps for the grid mode, landmark records for the landmark mode,
// and annotation ingestion.

#ifndef DRIVERSENSE_PIPELINE_DATASET_HPP_
#define DRIVERSENSE_PIPELINE_DATASET_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "driversense/actionlets.hpp"
#include "driversense/error.hpp"
#include "driversense/landmark.hpp"
#include "driversense/perception.hpp"
#include "driversense/pipeline/config.hpp"
#include "driversense/random.hpp"
#include "driversense/serialization.hpp"
#include "driversense/simulator.hpp"

namespace driversense::pipeline {

// Seeded split of n items: exactly round(fraction * n) are marked for
// training.
inline std::vector<bool> SplitTrain(std::size_t n, double fraction,
                                    std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) ThrowInvalid("split must lie in (0, 1)");
  const auto n_train = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng = MakeRng(seed, "split");
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) train[order[i]] = true;
  return train;
}

// ---- Grid mode -----------------------------------------------------------------

// Frames with a full feature history, thinned by `stride`. The first, middle
// and last such frames are always included.
inline std::vector<std::size_t> EvaluableFrames(const EpisodeLog& log,
                                                int stride) {
  std::vector<std::size_t> out;
  if (log.frames.empty()) return out;
  const auto first = static_cast<std::size_t>(
      std::ceil(kHistoryWindow * log.config.log_rate - 1e-9));
  const std::size_t last = log.frames.size() - 1;
  if (first > last) return out;
  std::set<std::size_t> ks;
  for (std::size_t k = first; k <= last; k += stride) ks.insert(k);
  ks.insert(last);
  ks.insert(std::max(first, log.FrameIndex(0.5 * log.duration())));
  return {ks.begin(), ks.end()};
}

struct SliceFrames {
  std::size_t start = 0;
  std::size_t middle = 0;
  std::size_t end = 0;
};

inline SliceFrames SliceFramesOf(const EpisodeLog& log) {
  const auto frames = EvaluableFrames(log, 1);
  if (frames.empty()) ThrowData("episode is shorter than the feature window");
  return {frames.front(),
          std::max(frames.front(), log.FrameIndex(0.5 * log.duration())),
          frames.back()};
}

inline FeatureWindow FrameFeatures(const EpisodeLog& log,
                                   const std::vector<TrackSample>& track,
                                   std::size_t k) {
  return ExtractFeatures(track, log.crosswalk_y(), log.frames.at(k).t);
}

inline Scan EgoScan(const EpisodeLog& log, std::size_t k,
                    const PipelineConfig& config) {
  return RaycastScan(log.SceneAt(k), log.frames.at(k).ego.pose,
                     config.lidar_beams, config.lidar_max_range);
}

// ---- Landmark records ----------------------------------------------------------

inline constexpr const char* kLandmarkSchema = "driversense.landmark";

// One pedestrian observation paired with the observed driver's action. `xi`
// is in the observed vehicle's frame (x right, y forward).
struct LandmarkRecord {
  std::string clip_id;
  std::int64_t frame = 0;
  Vec2 xi;
  std::array<double, 4> covariance{};
  SemanticAction action = SemanticAction::kMovingFast;
  bool occluded = false;
  std::optional<std::vector<std::size_t>> candidate_cells;

  friend bool operator==(const LandmarkRecord&, const LandmarkRecord&) = default;
};

inline Json ToJson(const LandmarkRecord& r) {
  Json j = {{"schema", kLandmarkSchema},
            {"version", kSchemaVersion},
            {"clip_id", r.clip_id},
            {"frame", r.frame},
            {"xi", {r.xi.x, r.xi.y}},
            {"covariance", r.covariance},
            {"action", ToString(r.action)},
            {"occluded", r.occluded}};
  if (r.candidate_cells) j["candidate_cells"] = *r.candidate_cells;
  return j;
}

inline LandmarkRecord LandmarkRecordFromJson(const Json& j) {
  using driversense::internal::Get;
  driversense::internal::CheckSchema(j, kLandmarkSchema);
  LandmarkRecord r;
  r.clip_id = Get<std::string>(j, "clip_id");
  r.frame = Get<std::int64_t>(j, "frame");
  const auto xi = Get<std::vector<double>>(j, "xi");
  if (xi.size() != 2) ThrowData("xi must have two entries");
  r.xi = {xi[0], xi[1]};
  r.covariance = Get<std::array<double, 4>>(j, "covariance");
  const auto action = ParseSemanticAction(Get<std::string>(j, "action"));
  if (!action) ThrowData("unknown action '" + j.at("action").dump() + "'");
  r.action = *action;
  r.occluded = Get<bool>(j, "occluded");
  if (j.contains("candidate_cells")) {
    r.candidate_cells = Get<std::vector<std::size_t>>(j, "candidate_cells");
  }
  return r;
}

inline void WriteLandmarksJsonl(std::ostream& out,
                                const std::vector<LandmarkRecord>& records) {
  for (const auto& r : records) out << ToJson(r).dump() << '\n';
}

inline std::vector<LandmarkRecord> ReadLandmarksJsonl(std::istream& in) {
  std::vector<LandmarkRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(LandmarkRecordFromJson(Json::parse(line)));
    } catch (const Json::exception& e) {
      ThrowData("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      ThrowData("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline std::string ClipIdOf(std::uint64_t episode_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ep%06llu",
                static_cast<unsigned long long>(episode_id));
  return buf;
}

// Occluder speed profile over the last `window` seconds before frame k.
inline VelocityProfile OccluderProfile(const EpisodeLog& log, std::size_t k,
                                       double window) {
  VelocityProfile p;
  const double t_end = log.frames.at(k).t;
  for (std::size_t i = 0; i <= k; ++i) {
    if (log.frames[i].t < t_end - window - 1e-9) continue;
    p.times.push_back(log.frames[i].t);
    p.speeds.push_back(log.frames[i].occluder.speed);
  }
  return p;
}

// Landmark observations from one simulated episode. The observed driver is
// the occluder; candidates are the region cells the ego cannot see.
inline std::vector<LandmarkRecord> LandmarkRecordsFromEpisode(
    const EpisodeLog& log, const PipelineConfig& config) {
  std::vector<LandmarkRecord> out;
  const GridSpec& region = config.landmark_region;
  const auto first = static_cast<std::size_t>(
      std::ceil(config.action_window * log.config.log_rate - 1e-9));
  for (std::size_t k = first; k < log.frames.size(); k += config.landmark_stride) {
    const EpisodeFrame& f = log.frames[k];
    if (!f.pedestrian) continue;
    const Pose2D& observer = f.occluder.pose;
    LandmarkRecord r;
    r.clip_id = ClipIdOf(log.episode_id);
    r.frame = static_cast<std::int64_t>(k);
    r.xi = observer.WorldToBody(f.pedestrian->pose.position());
    r.action = ClassifyAction(OccluderProfile(log, k, config.action_window),
                              config.action_window, config.logit.thresholds);

    const Scan scan = EgoScan(log, k, config);
    const auto mask = VisibilityMask(scan, region, observer);
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < region.size(); ++i) {
      if (mask[i] == CellVisibility::kOccluded) cells.push_back(i);
    }
    const driversense::internal::BeamLookup lookup(scan);
    const bool hidden =
        driversense::internal::ObserveCell(scan, lookup, f.pedestrian->pose.position(),
                              log.layout().ped_size) == CellObservation::kOccluded;
    const auto truth = region.LocateLocal(r.xi);
    r.occluded = hidden && truth &&
                 std::find(cells.begin(), cells.end(), *truth) != cells.end();
    r.candidate_cells = std::move(cells);
    out.push_back(std::move(r));
  }
  return out;
}

// ---- Annotation ingestion -------------------------------------------------------

struct IngestStats {
  std::int64_t records = 0;
  std::int64_t accepted = 0;
  std::int64_t rejected_missing_action = 0;
  std::int64_t skipped_above_horizon = 0;
};

// Reads annotation JSON lines {clip_id, frame, bbox:[x,y,w,h], action_label,
// camera:{fx,fy,cx,cy,height_m}, occluded}. `camera` falls back to
// `default_camera`. Schema violations throw with the source and line.
inline std::vector<LandmarkRecord> IngestAnnotations(
    std::istream& in, const std::string& source,
    const CameraModel& default_camera, IngestStats& stats) {
  using driversense::internal::Get;
  std::vector<LandmarkRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (internal::Trim(line).empty()) continue;
    ++stats.records;
    const std::string where = source + ":" + std::to_string(line_no);
    try {
      const Json j = Json::parse(line);
      if (!j.is_object()) ThrowData("record must be a JSON object");
      LandmarkRecord r;
      r.clip_id = Get<std::string>(j, "clip_id");
      r.frame = Get<std::int64_t>(j, "frame");
      const auto bbox = Get<std::vector<double>>(j, "bbox");
      if (bbox.size() != 4) ThrowData("bbox must be [x, y, w, h]");
      if (!(bbox[2] >= 0.0 && bbox[3] >= 0.0)) ThrowData("bbox size must be >= 0");
      r.occluded = Get<bool>(j, "occluded");
      CameraModel cam = default_camera;
      if (j.contains("camera")) {
        const Json& c = j.at("camera");
        cam = {Get<double>(c, "fx"), Get<double>(c, "fy"), Get<double>(c, "cx"),
               Get<double>(c, "cy"), Get<double>(c, "height_m")};
        if (!(cam.fx > 0.0 && cam.fy > 0.0 && cam.height_m > 0.0)) {
          ThrowData("camera focal lengths and height must be positive");
        }
      }
      const bool has_label = j.contains("action_label") &&
                             j.at("action_label").is_string() &&
                             !internal::Trim(j.at("action_label").get<std::string>()).empty();
      if (!has_label) {
        if (j.contains("action_label") && !j.at("action_label").is_null() &&
            !j.at("action_label").is_string()) {
          ThrowData("action_label must be a string");
        }
        ++stats.rejected_missing_action;
        continue;
      }
      const auto label = j.at("action_label").get<std::string>();
      const auto action = ParseSemanticAction(label);
      if (!action) ThrowData("unknown action_label '" + label + "'");
      r.action = *action;
      const BoundingBox box{bbox[0], bbox[1], bbox[2], bbox[3]};
      if (!(box.y + box.h > cam.cy)) {
        ++stats.skipped_above_horizon;
        continue;
      }
      const LandmarkEstimate est = BboxToLandmark(box, cam);
      r.xi = est.mean.xi;
      r.covariance = est.covariance;
      out.push_back(std::move(r));
      ++stats.accepted;
    } catch (const Json::exception& e) {
      ThrowData(where + ": " + e.what());
    } catch (const Error& e) {
      ThrowData(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace driversense::pipeline

#endif  // DRIVERSENSE_PIPELINE_DATASET_HPP_

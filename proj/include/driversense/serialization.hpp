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

// JSON encodings of models, grids and episode logs. Every top-level document
// carries "schema" and "version" fields; readers reject anything else.

#ifndef DRIVERSENSE_SERIALIZATION_HPP_
#define DRIVERSENSE_SERIALIZATION_HPP_

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "driversense/actionlets.hpp"
#include "driversense/error.hpp"
#include "driversense/grid.hpp"
#include "driversense/landmark.hpp"
#include "driversense/likelihood_table.hpp"
#include "driversense/simulator.hpp"

namespace driversense {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kActionletSchema = "driversense.actionlets";
inline constexpr const char* kLikelihoodSchema = "driversense.likelihoods";
inline constexpr const char* kLogitSchema = "driversense.logit";
inline constexpr const char* kEpisodeSchema = "driversense.episode";

namespace internal {

template <typename T>
T Get(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    ThrowData(std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    ThrowData(std::string("bad field '") + key + "': " + e.what());
  }
}

inline void CheckSchema(const Json& j, const char* schema) {
  if (Get<std::string>(j, "schema") != schema) {
    ThrowData(std::string("expected a '") + schema + "' document");
  }
  const int version = Get<int>(j, "version");
  if (version != kSchemaVersion) {
    ThrowData("unsupported " + std::string(schema) + " version " +
              std::to_string(version));
  }
}

}  // namespace internal

inline Json ToJson(const GridSpec& spec) {
  return {{"width_cells", spec.width_cells},
          {"height_cells", spec.height_cells},
          {"resolution", spec.resolution},
          {"origin", {spec.origin.x, spec.origin.y}},
          {"frame", ToString(spec.frame)}};
}

inline GridSpec GridSpecFromJson(const Json& j) {
  using internal::Get;
  GridSpec spec;
  spec.width_cells = Get<int>(j, "width_cells");
  spec.height_cells = Get<int>(j, "height_cells");
  spec.resolution = Get<double>(j, "resolution");
  const auto origin = Get<std::vector<double>>(j, "origin");
  if (origin.size() != 2) ThrowData("grid origin must have two entries");
  spec.origin = {origin[0], origin[1]};
  spec.frame = GridFrameFromString(Get<std::string>(j, "frame"));
  try {
    spec.Validate();
  } catch (const Error& e) {
    ThrowData(e.what());
  }
  return spec;
}

// ---- Actionlets -------------------------------------------------------------

inline Json ToJson(const ActionletModel& model) {
  Json centroids = Json::array();
  for (const auto& c : model.centroids) centroids.push_back(c);
  return {{"schema", kActionletSchema},
          {"version", kSchemaVersion},
          {"k", model.k()},
          {"feature_dim", kFeatureDim},
          {"feature_layout",
           "dist_to_crosswalk, vel[10] oldest first, acc[10] oldest first"},
          {"scaler", {{"mean", model.scaler.mean}, {"scale", model.scaler.scale}}},
          {"centroids", centroids}};
}

inline ActionletModel ActionletModelFromJson(const Json& j) {
  using internal::Get;
  internal::CheckSchema(j, kActionletSchema);
  if (Get<int>(j, "feature_dim") != kFeatureDim) {
    ThrowData("actionlet feature dimension mismatch");
  }
  ActionletModel m;
  const Json& scaler = j.at("scaler");
  m.scaler.mean = Get<FeatureVector>(scaler, "mean");
  m.scaler.scale = Get<FeatureVector>(scaler, "scale");
  m.centroids = Get<std::vector<FeatureVector>>(j, "centroids");
  if (static_cast<int>(m.centroids.size()) != Get<int>(j, "k")) {
    ThrowData("actionlet centroid count does not match k");
  }
  try {
    m.Validate();
  } catch (const Error& e) {
    ThrowData(e.what());
  }
  return m;
}

// ---- Likelihood table -------------------------------------------------------

inline Json ToJson(const LikelihoodTable& table) {
  const GridSpec& spec = table.spec();
  Json cells = Json::array();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    auto free = table.Distribution(i, 0);
    auto occ = table.Distribution(i, 1);
    cells.push_back({{"index", i},
                     {"col", spec.Col(i)},
                     {"row", spec.Row(i)},
                     {"free", std::vector<double>(free.begin(), free.end())},
                     {"occupied", std::vector<double>(occ.begin(), occ.end())},
                     {"count_free", table.SampleCount(i, 0)},
                     {"count_occupied", table.SampleCount(i, 1)}});
  }
  return {{"schema", kLikelihoodSchema},
          {"version", kSchemaVersion},
          {"grid", ToJson(spec)},
          {"num_actions", table.num_actions()},
          {"cells", cells}};
}

inline LikelihoodTable LikelihoodTableFromJson(const Json& j) {
  using internal::Get;
  internal::CheckSchema(j, kLikelihoodSchema);
  const GridSpec spec = GridSpecFromJson(j.at("grid"));
  const int k = Get<int>(j, "num_actions");
  const Json& cells = j.at("cells");
  if (!cells.is_array() || cells.size() != spec.size()) {
    ThrowData("likelihood table must list every grid cell once");
  }
  std::vector<double> entries(spec.size() * 2 * k);
  std::vector<std::uint64_t> counts(spec.size() * 2);
  for (const Json& cell : cells) {
    const auto i = Get<std::size_t>(cell, "index");
    if (i >= spec.size()) ThrowData("likelihood cell index out of range");
    const auto free = Get<std::vector<double>>(cell, "free");
    const auto occ = Get<std::vector<double>>(cell, "occupied");
    if (static_cast<int>(free.size()) != k || static_cast<int>(occ.size()) != k) {
      ThrowData("likelihood arrays must have num_actions entries");
    }
    std::copy(free.begin(), free.end(), entries.begin() + (i * 2) * k);
    std::copy(occ.begin(), occ.end(), entries.begin() + (i * 2 + 1) * k);
    counts[i * 2] = Get<std::uint64_t>(cell, "count_free");
    counts[i * 2 + 1] = Get<std::uint64_t>(cell, "count_occupied");
  }
  try {
    return LikelihoodTable(spec, k, std::move(entries), std::move(counts));
  } catch (const Error& e) {
    ThrowData(e.what());
  }
}

// ---- Logit model ------------------------------------------------------------

inline Json ToJson(const ActionThresholds& th) {
  return {{"fast_speed", th.fast_speed},
          {"stopped_speed", th.stopped_speed},
          {"accel", th.accel}};
}

inline ActionThresholds ActionThresholdsFromJson(const Json& j) {
  using internal::Get;
  return {Get<double>(j, "fast_speed"), Get<double>(j, "stopped_speed"),
          Get<double>(j, "accel")};
}

inline Json ToJson(const LogitModel& model) {
  Json actions = Json::array();
  for (auto a : kAllSemanticActions) actions.push_back(ToString(a));
  return {{"schema", kLogitSchema},
          {"version", kSchemaVersion},
          {"feature_map", kLogitFeatureMapId},
          {"actions", actions},
          {"weights", model.weights},
          {"regularization", model.regularization},
          {"thresholds", ToJson(model.thresholds)}};
}

inline LogitModel LogitModelFromJson(const Json& j) {
  using internal::Get;
  internal::CheckSchema(j, kLogitSchema);
  if (Get<std::string>(j, "feature_map") != kLogitFeatureMapId) {
    ThrowData("unsupported logit feature map");
  }
  const auto actions = Get<std::vector<std::string>>(j, "actions");
  if (actions.size() != kNumSemanticActions) ThrowData("expected 5 actions");
  for (int a = 0; a < kNumSemanticActions; ++a) {
    if (actions[a] != ToString(kAllSemanticActions[a])) {
      ThrowData("logit action order mismatch");
    }
  }
  LogitModel m;
  m.weights = Get<LogitWeights>(j, "weights");
  m.regularization = Get<double>(j, "regularization");
  m.thresholds = ActionThresholdsFromJson(j.at("thresholds"));
  try {
    m.Validate();
  } catch (const Error& e) {
    ThrowData(e.what());
  }
  return m;
}

// ---- Scenario and episode logs ------------------------------------------------

inline Json ToJson(const Range& r) { return {r.min, r.max}; }

inline Range RangeFromJson(const Json& j) {
  if (!j.is_array() || j.size() != 2) ThrowData("range must be [min, max]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Json ToJson(const ScenarioConfig& c) {
  const RoadLayout& L = c.layout;
  return {
      {"d0", ToJson(c.d0)},
      {"v0", ToJson(c.v0)},
      {"weights",
       {{"bold_cross", c.weights.bold_cross},
        {"wait_then_cross", c.weights.wait_then_cross},
        {"stand", c.weights.stand},
        {"absent", c.weights.absent}}},
      {"pedestrian_speed", ToJson(c.pedestrian_speed)},
      {"pedestrian_offset", ToJson(c.pedestrian_offset)},
      {"episode_duration", ToJson(c.episode_duration)},
      {"log_rate", c.log_rate},
      {"policy",
       {{"reaction_distance", c.policy.reaction_distance},
        {"a_max_brake", c.policy.a_max_brake},
        {"a_max_accel", c.policy.a_max_accel},
        {"stop_margin", c.policy.stop_margin},
        {"accel_noise_sigma", c.policy.accel_noise_sigma},
        {"wait_trigger_speed", c.policy.wait_trigger_speed}}},
      {"ego_gap", c.ego_gap},
      {"ego_speed_ratio", ToJson(c.ego_speed_ratio)},
      {"layout",
       {{"lane_width", L.lane_width},
        {"crosswalk_y", L.crosswalk_y},
        {"crosswalk_half_width", L.crosswalk_half_width},
        {"occluder_lane_x", L.occluder_lane_x},
        {"ego_lane_x", L.ego_lane_x},
        {"ped_spawn_x", L.ped_spawn_x},
        {"ped_curb_x", L.ped_curb_x},
        {"ped_far_x", L.ped_far_x},
        {"vehicle_length", L.vehicle_length},
        {"vehicle_width", L.vehicle_width},
        {"ped_size", L.ped_size},
        {"bus_stop",
         {L.bus_stop.center.x, L.bus_stop.center.y, L.bus_stop.half_extents.x,
          L.bus_stop.half_extents.y, L.bus_stop.heading}}}}};
}

inline ScenarioConfig ScenarioConfigFromJson(const Json& j) {
  using internal::Get;
  ScenarioConfig c;
  c.d0 = RangeFromJson(j.at("d0"));
  c.v0 = RangeFromJson(j.at("v0"));
  const Json& w = j.at("weights");
  c.weights = {Get<double>(w, "bold_cross"), Get<double>(w, "wait_then_cross"),
               Get<double>(w, "stand"), Get<double>(w, "absent")};
  c.pedestrian_speed = RangeFromJson(j.at("pedestrian_speed"));
  c.pedestrian_offset = RangeFromJson(j.at("pedestrian_offset"));
  c.episode_duration = RangeFromJson(j.at("episode_duration"));
  c.log_rate = Get<double>(j, "log_rate");
  const Json& p = j.at("policy");
  c.policy = {Get<double>(p, "reaction_distance"), Get<double>(p, "a_max_brake"),
              Get<double>(p, "a_max_accel"), Get<double>(p, "stop_margin"),
              Get<double>(p, "accel_noise_sigma"),
              Get<double>(p, "wait_trigger_speed")};
  c.ego_gap = Get<double>(j, "ego_gap");
  c.ego_speed_ratio = RangeFromJson(j.at("ego_speed_ratio"));
  const Json& l = j.at("layout");
  RoadLayout& L = c.layout;
  L.lane_width = Get<double>(l, "lane_width");
  L.crosswalk_y = Get<double>(l, "crosswalk_y");
  L.crosswalk_half_width = Get<double>(l, "crosswalk_half_width");
  L.occluder_lane_x = Get<double>(l, "occluder_lane_x");
  L.ego_lane_x = Get<double>(l, "ego_lane_x");
  L.ped_spawn_x = Get<double>(l, "ped_spawn_x");
  L.ped_curb_x = Get<double>(l, "ped_curb_x");
  L.ped_far_x = Get<double>(l, "ped_far_x");
  L.vehicle_length = Get<double>(l, "vehicle_length");
  L.vehicle_width = Get<double>(l, "vehicle_width");
  L.ped_size = Get<double>(l, "ped_size");
  const auto bs = Get<std::vector<double>>(l, "bus_stop");
  if (bs.size() != 5) ThrowData("bus_stop must have 5 entries");
  L.bus_stop = {{bs[0], bs[1]}, {bs[2], bs[3]}, bs[4]};
  return c;
}

inline Json ToJson(const Scenario& s) {
  return {{"d0", s.d0},
          {"v0", s.v0},
          {"behavior", ToString(s.behavior)},
          {"pedestrian_speed", s.pedestrian_speed},
          {"pedestrian_offset", s.pedestrian_offset},
          {"trigger_gap", s.trigger_gap},
          {"appear_time", s.appear_time},
          {"duration", s.duration},
          {"ego_speed", s.ego_speed},
          {"noise_seed", s.noise_seed}};
}

inline Scenario ScenarioFromJson(const Json& j) {
  using internal::Get;
  Scenario s;
  s.d0 = Get<double>(j, "d0");
  s.v0 = Get<double>(j, "v0");
  s.behavior = PedestrianBehaviorFromString(Get<std::string>(j, "behavior"));
  s.pedestrian_speed = Get<double>(j, "pedestrian_speed");
  s.pedestrian_offset = Get<double>(j, "pedestrian_offset");
  s.trigger_gap = Get<double>(j, "trigger_gap");
  s.appear_time = Get<double>(j, "appear_time");
  s.duration = Get<double>(j, "duration");
  s.ego_speed = Get<double>(j, "ego_speed");
  s.noise_seed = Get<std::uint64_t>(j, "noise_seed");
  return s;
}

inline Json EpisodeHeaderJson(const EpisodeLog& log) {
  return {{"type", "episode"},
          {"schema", kEpisodeSchema},
          {"version", kSchemaVersion},
          {"episode_id", log.episode_id},
          {"seed", log.seed},
          {"frame_count", log.frames.size()},
          {"scenario", ToJson(log.scenario)},
          {"config", ToJson(log.config)}};
}

inline Json FrameJson(const EpisodeLog& log, const EpisodeFrame& f) {
  auto vehicle = [](const VehicleState& v) {
    return Json{v.pose.x, v.pose.y, v.pose.heading, v.speed, v.accel};
  };
  Json j = {{"type", "frame"},
            {"episode_id", log.episode_id},
            {"t", f.t},
            {"ego", vehicle(f.ego)},
            {"occluder", vehicle(f.occluder)}};
  if (f.pedestrian) {
    const auto& p = *f.pedestrian;
    j["pedestrian"] = {{"pose", {p.pose.x, p.pose.y, p.pose.heading}},
                       {"speed", p.speed},
                       {"phase", ToString(p.phase)}};
  } else {
    j["pedestrian"] = nullptr;
  }
  return j;
}

// One header line followed by one line per frame.
inline void WriteEpisodeJsonl(std::ostream& out, const EpisodeLog& log) {
  out << EpisodeHeaderJson(log).dump() << '\n';
  for (const auto& f : log.frames) out << FrameJson(log, f).dump() << '\n';
}

// Reads every episode in a JSON-lines stream. Errors name the line number.
inline std::vector<EpisodeLog> ReadEpisodesJsonl(std::istream& in) {
  using internal::Get;
  std::vector<EpisodeLog> logs;
  std::string line;
  std::size_t line_no = 0;
  std::size_t expected_frames = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      const auto type = Get<std::string>(j, "type");
      if (type == "episode") {
        if (!logs.empty() && logs.back().frames.size() != expected_frames) {
          ThrowData("previous episode is missing frames");
        }
        internal::CheckSchema(j, kEpisodeSchema);
        EpisodeLog log;
        log.episode_id = Get<std::uint64_t>(j, "episode_id");
        log.seed = Get<std::uint64_t>(j, "seed");
        log.scenario = ScenarioFromJson(j.at("scenario"));
        log.config = ScenarioConfigFromJson(j.at("config"));
        expected_frames = Get<std::size_t>(j, "frame_count");
        log.frames.reserve(expected_frames);
        logs.push_back(std::move(log));
      } else if (type == "frame") {
        if (logs.empty()) ThrowData("frame record before any episode header");
        EpisodeLog& log = logs.back();
        if (Get<std::uint64_t>(j, "episode_id") != log.episode_id) {
          ThrowData("frame belongs to a different episode");
        }
        auto vehicle = [](const Json& v) {
          const auto a = v.get<std::vector<double>>();
          if (a.size() != 5) ThrowData("vehicle state must have 5 entries");
          return VehicleState{{a[0], a[1], a[2]}, a[3], a[4]};
        };
        EpisodeFrame f;
        f.t = Get<double>(j, "t");
        f.ego = vehicle(j.at("ego"));
        f.occluder = vehicle(j.at("occluder"));
        const Json& p = j.at("pedestrian");
        if (!p.is_null()) {
          const auto pose = Get<std::vector<double>>(p, "pose");
          if (pose.size() != 3) ThrowData("pedestrian pose must have 3 entries");
          f.pedestrian = PedestrianState{
              {pose[0], pose[1], pose[2]}, Get<double>(p, "speed"),
              PedestrianPhaseFromString(Get<std::string>(p, "phase"))};
        }
        log.frames.push_back(f);
      } else {
        ThrowData("unknown record type '" + type + "'");
      }
    } catch (const Json::exception& e) {
      ThrowData("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      ThrowData("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!logs.empty() && logs.back().frames.size() != expected_frames) {
    ThrowData("last episode is missing frames");
  }
  return logs;
}

}  // namespace driversense

#endif  // DRIVERSENSE_SERIALIZATION_HPP_

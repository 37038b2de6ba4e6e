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

#ifndef DRIVERSENSE_SIMULATOR_HPP_
#define DRIVERSENSE_SIMULATOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "driversense/actionlets.hpp"
#include "driversense/error.hpp"
#include "driversense/geometry.hpp"
#include "driversense/grid.hpp"
#include "driversense/perception.hpp"
#include "driversense/random.hpp"

namespace driversense {

// Crosswalk scene, world frame: vehicles drive along +y; the occluding
// vehicle's lane is centered on x = 0 with the ego lane to its left. The
// crosswalk is centered on y = crosswalk_y and the pedestrian enters from the
// sidewalk on the right (+x) and crosses toward -x.
struct RoadLayout {
  double lane_width = 3.5;
  double crosswalk_y = 0.0;
  double crosswalk_half_width = 1.5;
  double occluder_lane_x = 0.0;
  double ego_lane_x = -3.5;
  double ped_spawn_x = 4.25;  // behind the bus stop
  double ped_curb_x = 2.25;   // waiting spot at the curb
  double ped_far_x = -7.5;    // end of the crossing
  double vehicle_length = 4.5;
  double vehicle_width = 1.8;
  double ped_size = 0.5;
  OrientedRect bus_stop{{5.0, -4.0}, {0.75, 1.5}, 0.0};

  // Pedestrians with x above this are still in (or before) the occluder's
  // lane and block it.
  double LaneClearX() const { return occluder_lane_x - 0.5 * lane_width - 0.5; }
  double LaneCorridorMaxX() const {
    return occluder_lane_x + 0.5 * lane_width + 0.5;
  }
  // The occluder's front stops here.
  double StopLineY(double stop_margin) const {
    return crosswalk_y - crosswalk_half_width - stop_margin;
  }

  friend bool operator==(const RoadLayout&, const RoadLayout&) = default;
};

// Default occupancy grid: 6 x 7 cells of 1 m centered on the crosswalk, with
// column 2 on the occluder's lane center and the last row just in front of
// the stop line.
inline GridSpec CrosswalkGridSpec(const RoadLayout& layout = {}) {
  GridSpec spec;
  spec.width_cells = 6;
  spec.height_cells = 7;
  spec.resolution = 1.0;
  spec.origin = {layout.occluder_lane_x - 2.5, layout.crosswalk_y + 3.5};
  spec.frame = GridFrame::kWorld;
  return spec;
}

enum class PedestrianBehavior { kBoldCross, kWaitThenCross, kStand, kAbsent };

inline std::string ToString(PedestrianBehavior b) {
  switch (b) {
    case PedestrianBehavior::kBoldCross: return "BoldCross";
    case PedestrianBehavior::kWaitThenCross: return "WaitThenCross";
    case PedestrianBehavior::kStand: return "Stand";
    case PedestrianBehavior::kAbsent: return "Absent";
  }
  return "?";
}

inline PedestrianBehavior PedestrianBehaviorFromString(const std::string& s) {
  for (auto b : {PedestrianBehavior::kBoldCross,
                 PedestrianBehavior::kWaitThenCross, PedestrianBehavior::kStand,
                 PedestrianBehavior::kAbsent}) {
    if (ToString(b) == s) return b;
  }
  ThrowData("unknown pedestrian behavior '" + s + "'");
}

enum class PedestrianPhase {
  kApproaching,  // walking from the spawn point to the curb
  kWaiting,
  kCrossing,
  kStanding,
  kDone,  // reached the far side
};

inline std::string ToString(PedestrianPhase p) {
  switch (p) {
    case PedestrianPhase::kApproaching: return "approaching";
    case PedestrianPhase::kWaiting: return "waiting";
    case PedestrianPhase::kCrossing: return "crossing";
    case PedestrianPhase::kStanding: return "standing";
    case PedestrianPhase::kDone: return "done";
  }
  return "?";
}

inline PedestrianPhase PedestrianPhaseFromString(const std::string& s) {
  for (auto p : {PedestrianPhase::kApproaching, PedestrianPhase::kWaiting,
                 PedestrianPhase::kCrossing, PedestrianPhase::kStanding,
                 PedestrianPhase::kDone}) {
    if (ToString(p) == s) return p;
  }
  ThrowData("unknown pedestrian phase '" + s + "'");
}

struct Range {
  double min = 0.0;
  double max = 0.0;

  double Sample(Rng& rng) const {
    if (min == max) return min;
    return std::uniform_real_distribution<double>(min, max)(rng);
  }
  friend bool operator==(const Range&, const Range&) = default;
};

struct BehaviorWeights {
  double bold_cross = 1.0 / 6.0;
  double wait_then_cross = 1.0 / 6.0;
  double stand = 1.0 / 6.0;
  double absent = 0.5;
  friend bool operator==(const BehaviorWeights&, const BehaviorWeights&) = default;
};

// Longitudinal policy of the human-driven (occluding) vehicle.
struct OccluderPolicy {
  double reaction_distance = 20.0;  // m, front to crosswalk center
  double a_max_brake = 3.0;         // m/s^2
  double a_max_accel = 1.5;         // m/s^2
  double stop_margin = 2.0;         // m before the crosswalk edge
  double accel_noise_sigma = 0.2;   // m/s^2, while braking or resuming
  double wait_trigger_speed = 1.0;  // waiting pedestrians cross below this
  friend bool operator==(const OccluderPolicy&, const OccluderPolicy&) = default;
};

struct ScenarioConfig {
  Range d0{30.0, 45.0};  // occluder front to crosswalk center at t = 0
  Range v0{4.5, 6.7};    // 10-15 mph
  BehaviorWeights weights;
  Range pedestrian_speed{1.0, 1.6};
  Range pedestrian_offset{-1.0, 1.0};  // along the crosswalk, m
  Range episode_duration{5.0, 10.0};
  double log_rate = 30.0;
  OccluderPolicy policy;
  double ego_gap = 10.0;          // ego front behind occluder front, m
  Range ego_speed_ratio{0.8, 0.8};  // ego speed as a fraction of v0
  RoadLayout layout;

  // Smallest trigger gap that still lets the occluder stop comfortably.
  double MinTriggerGap(double v0_value) const {
    return 1.25 * v0_value * v0_value / (2.0 * policy.a_max_brake) +
           policy.stop_margin + layout.crosswalk_half_width + 0.5;
  }

  void Validate() const {
    auto check_range = [](const Range& r, const char* name, bool positive) {
      if (!(r.min <= r.max) || !std::isfinite(r.min) || !std::isfinite(r.max)) {
        ThrowInvalid(std::string("invalid range for ") + name);
      }
      if (positive && !(r.min > 0.0)) {
        ThrowInvalid(std::string(name) + " must be positive");
      }
    };
    check_range(d0, "d0", true);
    check_range(v0, "v0", true);
    check_range(pedestrian_speed, "pedestrian_speed", true);
    check_range(pedestrian_offset, "pedestrian_offset", false);
    check_range(episode_duration, "episode_duration", true);
    check_range(ego_speed_ratio, "ego_speed_ratio", false);
    const double w[] = {weights.bold_cross, weights.wait_then_cross,
                        weights.stand, weights.absent};
    double sum = 0.0;
    for (double v : w) {
      if (!(v >= 0.0)) ThrowInvalid("behavior weights must be non-negative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) ThrowInvalid("behavior weights must sum to 1");
    if (!(log_rate >= 20.0)) ThrowInvalid("log rate must be at least 20 Hz");
    if (!(policy.a_max_brake > 0.0 && policy.a_max_accel > 0.0)) {
      ThrowInvalid("acceleration bounds must be positive");
    }
    if (!(policy.accel_noise_sigma >= 0.0)) ThrowInvalid("noise sigma must be >= 0");
    if (!(ego_speed_ratio.min >= 0.0)) ThrowInvalid("ego speed ratio must be >= 0");
    const double g_min = MinTriggerGap(v0.max);
    if (policy.reaction_distance < g_min ||
        d0.min < g_min) {
      ThrowInvalid("scenario ranges leave no room to brake before the "
                   "crosswalk; widen d0 or the reaction distance");
    }
  }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

// One drawn scenario. Everything random about an episode is fixed here,
// including the seed of the acceleration noise.
struct Scenario {
  double d0 = 0.0;
  double v0 = 0.0;
  PedestrianBehavior behavior = PedestrianBehavior::kAbsent;
  double pedestrian_speed = 0.0;
  double pedestrian_offset = 0.0;
  double trigger_gap = 0.0;   // gap when the pedestrian starts to matter
  double appear_time = 0.0;   // pedestrian appears at the bus stop
  double duration = 0.0;
  double ego_speed = 0.0;
  std::uint64_t noise_seed = 0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline Scenario SampleScenario(const ScenarioConfig& config, Rng& rng) {
  config.Validate();
  Scenario s;
  const double w[] = {config.weights.bold_cross, config.weights.wait_then_cross,
                      config.weights.stand, config.weights.absent};
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  s.behavior = PedestrianBehavior::kAbsent;
  const PedestrianBehavior order[] = {
      PedestrianBehavior::kBoldCross, PedestrianBehavior::kWaitThenCross,
      PedestrianBehavior::kStand, PedestrianBehavior::kAbsent};
  for (int b = 0; b < 4; ++b) {
    acc += w[b];
    if (u < acc && w[b] > 0.0) {
      s.behavior = order[b];
      break;
    }
  }
  s.d0 = config.d0.Sample(rng);
  s.v0 = config.v0.Sample(rng);
  s.pedestrian_speed = config.pedestrian_speed.Sample(rng);
  s.pedestrian_offset = config.pedestrian_offset.Sample(rng);
  s.ego_speed = config.ego_speed_ratio.Sample(rng) * s.v0;

  // Pedestrians appear at the bus stop once the occluder is within a sampled
  // gap of the crosswalk. Standing pedestrians stay there.
  const double g_min = config.MinTriggerGap(s.v0);
  const double g_max = std::min(config.policy.reaction_distance, s.d0);
  s.trigger_gap = Range{g_min, std::max(g_min, g_max)}.Sample(rng);
  const double trigger_time = (s.d0 - s.trigger_gap) / s.v0;
  s.appear_time = trigger_time;

  Range duration = config.episode_duration;
  if (s.behavior != PedestrianBehavior::kAbsent) {
    duration.min = std::clamp(trigger_time + 3.0, duration.min, duration.max);
  }
  s.duration = duration.Sample(rng);
  s.noise_seed = rng();
  if (s.behavior == PedestrianBehavior::kAbsent) {
    s.trigger_gap = 0.0;
    s.appear_time = 0.0;
  }
  return s;
}

struct VehicleState {
  Pose2D pose;
  double speed = 0.0;
  double accel = 0.0;  // applied from this frame to the next
};

struct PedestrianState {
  Pose2D pose;
  double speed = 0.0;
  PedestrianPhase phase = PedestrianPhase::kApproaching;
};

struct EpisodeFrame {
  double t = 0.0;
  VehicleState ego;
  VehicleState occluder;
  std::optional<PedestrianState> pedestrian;
};

struct EpisodeLog {
  std::uint64_t episode_id = 0;
  std::uint64_t seed = 0;
  Scenario scenario;
  ScenarioConfig config;
  std::vector<EpisodeFrame> frames;

  const RoadLayout& layout() const { return config.layout; }
  double dt() const { return 1.0 / config.log_rate; }
  double duration() const { return frames.empty() ? 0.0 : frames.back().t; }
  double crosswalk_y() const { return config.layout.crosswalk_y; }

  OrientedRect VehicleRect(const VehicleState& v) const {
    return {v.pose.position(),
            {0.5 * layout().vehicle_length, 0.5 * layout().vehicle_width},
            v.pose.heading};
  }
  OrientedRect PedestrianRect(const PedestrianState& p) const {
    return {p.pose.position(),
            {0.5 * layout().ped_size, 0.5 * layout().ped_size},
            p.pose.heading};
  }
  double FrontY(const VehicleState& v) const {
    return v.pose.y + 0.5 * layout().vehicle_length;
  }

  // Obstacles at frame k. The ego vehicle is left out by default because
  // the scene is usually cast from the ego's own sensor.
  SceneGeometry SceneAt(std::size_t k, bool include_ego = false) const {
    const EpisodeFrame& f = frames.at(k);
    SceneGeometry scene;
    scene.obstacles.push_back({layout().bus_stop, ObstacleKind::kStructure});
    scene.obstacles.push_back({VehicleRect(f.occluder), ObstacleKind::kVehicle});
    if (f.pedestrian) {
      scene.obstacles.push_back(
          {PedestrianRect(*f.pedestrian), ObstacleKind::kPedestrian});
    }
    if (include_ego) {
      scene.obstacles.push_back({VehicleRect(f.ego), ObstacleKind::kVehicle});
    }
    return scene;
  }

  std::size_t FrameIndex(double t) const {
    if (frames.empty()) ThrowInvalid("episode has no frames");
    const double k = std::round(t * config.log_rate);
    if (!(t >= -1e-9) || k > static_cast<double>(frames.size() - 1)) {
      ThrowInvalid("time " + std::to_string(t) + " outside the episode");
    }
    return static_cast<std::size_t>(std::max(0.0, k));
  }

  // Occluder front along its lane, for feature extraction.
  std::vector<TrackSample> OccluderTrack() const {
    std::vector<TrackSample> track;
    track.reserve(frames.size());
    for (const auto& f : frames) {
      track.push_back({f.t, FrontY(f.occluder), f.occluder.speed,
                       f.occluder.accel});
    }
    return track;
  }
};

// Integrates one scenario at the log rate with forward Euler.
inline EpisodeLog RunEpisode(const ScenarioConfig& config,
                             const Scenario& scenario,
                             std::uint64_t episode_id = 0,
                             std::uint64_t seed = 0) {
  config.Validate();
  const RoadLayout& L = config.layout;
  const OccluderPolicy& P = config.policy;
  const double dt = 1.0 / config.log_rate;
  const double heading = std::numbers::pi / 2.0;
  const double half_len = 0.5 * L.vehicle_length;
  const double stop_y = L.StopLineY(P.stop_margin);

  EpisodeLog log;
  log.episode_id = episode_id;
  log.seed = seed;
  log.scenario = scenario;
  log.config = config;

  Rng noise_rng(scenario.noise_seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  double occ_y = L.crosswalk_y - scenario.d0 - half_len;
  double occ_v = scenario.v0;
  double ego_y = occ_y - config.ego_gap;
  std::optional<PedestrianState> ped;
  bool ped_spawned = false;

  const auto n_frames = static_cast<std::size_t>(
      std::floor(scenario.duration * config.log_rate + 1e-9)) + 1;
  log.frames.reserve(n_frames);

  for (std::size_t k = 0; k < n_frames; ++k) {
    const double t = static_cast<double>(k) * dt;

    // Pedestrian script.
    if (scenario.behavior != PedestrianBehavior::kAbsent && !ped_spawned &&
        t + 1e-9 >= scenario.appear_time) {
      ped_spawned = true;
      PedestrianState p;
      p.pose = MakePose(L.ped_spawn_x, L.crosswalk_y + scenario.pedestrian_offset,
                        std::numbers::pi);
      switch (scenario.behavior) {
        case PedestrianBehavior::kBoldCross: p.phase = PedestrianPhase::kCrossing; break;
        case PedestrianBehavior::kStand: p.phase = PedestrianPhase::kStanding; break;
        default: p.phase = PedestrianPhase::kApproaching; break;
      }
      ped = p;
    }
    if (ped) {
      if (ped->phase == PedestrianPhase::kApproaching &&
          ped->pose.x <= L.ped_curb_x) {
        ped->pose.x = L.ped_curb_x;
        ped->phase = PedestrianPhase::kWaiting;
      }
      if (ped->phase == PedestrianPhase::kWaiting &&
          occ_v < P.wait_trigger_speed) {
        ped->phase = PedestrianPhase::kCrossing;
      }
      if (ped->phase == PedestrianPhase::kCrossing && ped->pose.x <= L.ped_far_x) {
        ped->pose.x = L.ped_far_x;
        ped->phase = PedestrianPhase::kDone;
      }
      const bool walking = ped->phase == PedestrianPhase::kApproaching ||
                           ped->phase == PedestrianPhase::kCrossing;
      ped->speed = walking ? scenario.pedestrian_speed : 0.0;
    }

    // Occluder policy.
    const double front = occ_y + half_len;
    const double gap = L.crosswalk_y - front;
    const bool ped_blocking =
        ped && (ped->phase == PedestrianPhase::kApproaching ||
                ped->phase == PedestrianPhase::kWaiting ||
                ped->phase == PedestrianPhase::kCrossing) &&
        ped->pose.x > L.LaneClearX();
    const bool triggered = ped_blocking && gap <= P.reaction_distance &&
                           front < stop_y + 0.5;
    double a = 0.0;
    bool resuming = false;
    if (triggered) {
      if (occ_v > 0.0) {
        const double to_stop = stop_y - front;
        const double a_req = to_stop > 0.05
                                 ? occ_v * occ_v / (2.0 * to_stop)
                                 : occ_v * config.log_rate;
        a = -a_req + P.accel_noise_sigma * noise(noise_rng);
        a = std::clamp(a, -P.a_max_brake, 0.0);
      }
    } else if (occ_v < scenario.v0 - 1e-12) {
      resuming = true;
      a = std::min(P.a_max_accel, (scenario.v0 - occ_v) * config.log_rate) +
          P.accel_noise_sigma * noise(noise_rng);
      a = std::clamp(a, -P.a_max_brake, P.a_max_accel);
    }
    double v_next = std::max(0.0, occ_v + a * dt);
    if (resuming) v_next = std::min(v_next, scenario.v0);
    a = (v_next - occ_v) / dt;
    if (k + 1 == n_frames) a = 0.0;

    EpisodeFrame frame;
    frame.t = t;
    frame.ego.pose = MakePose(L.ego_lane_x, ego_y, heading);
    frame.ego.speed = scenario.ego_speed;
    frame.ego.accel = 0.0;
    frame.occluder.pose = MakePose(L.occluder_lane_x, occ_y, heading);
    frame.occluder.speed = occ_v;
    frame.occluder.accel = a;
    frame.pedestrian = ped;
    log.frames.push_back(frame);

    occ_y += occ_v * dt;
    occ_v = v_next;
    ego_y += scenario.ego_speed * dt;
    if (ped) ped->pose.x -= ped->speed * dt;
  }
  return log;
}

// Cells overlapping the pedestrian footprint are occupied; everything else is
// free. Ego-relative grids are anchored on the ego pose at time t.
inline BinaryMap GroundTruthGrid(const EpisodeLog& log, double t,
                                 const GridSpec& spec) {
  spec.Validate();
  const EpisodeFrame& f = log.frames.at(log.FrameIndex(t));
  BinaryMap map(spec);
  if (!f.pedestrian) return map;
  const OrientedRect footprint = log.PedestrianRect(*f.pedestrian);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (RectsOverlap(spec.CellRectWorld(i, f.ego.pose), footprint)) {
      map.set(i, true);
    }
  }
  return map;
}

}  // namespace driversense

#endif  // DRIVERSENSE_SIMULATOR_HPP_

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

// Pipeline configuration. The on-disk form is flat "key = value" text with
// '#' comments; every key is listed by VisitFields below.

#ifndef DRIVERSENSE_PIPELINE_CONFIG_HPP_
#define DRIVERSENSE_PIPELINE_CONFIG_HPP_

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "driversense/error.hpp"
#include "driversense/grid.hpp"
#include "driversense/grid_io.hpp"
#include "driversense/landmark.hpp"
#include "driversense/perception.hpp"
#include "driversense/simulator.hpp"

namespace driversense::pipeline {

struct PipelineConfig {
  std::string mode = "grid";  // grid | landmark
  std::uint64_t seed = 1;
  std::string out = "run";
  int episodes = 1440;

  GridSpec grid = CrosswalkGridSpec();
  ScenarioConfig scenario;

  double split = 0.2;
  int k = 10;
  double alpha = 1.0;
  int kmeans_max_iters = 100;
  int train_stride = 1;

  int lidar_beams = 360;
  double lidar_max_range = 60.0;
  InverseSensorParams inverse;

  double tau = 0.6;
  std::string psi_region = "full";  // full | occluded
  int eval_stride = 1;
  bool dump_pgm = false;

  LogitFitOptions logit;
  double action_window = 1.0;
  GridSpec landmark_region = DefaultLandmarkRegion();
  int landmark_stride = 3;
  CameraModel camera;

  static GridSpec DefaultLandmarkRegion() {
    GridSpec spec;
    spec.width_cells = 4;
    spec.height_cells = 4;
    spec.resolution = 5.0;
    spec.origin = {-10.0, 22.0};
    spec.frame = GridFrame::kEgoRelative;
    return spec;
  }

  void Validate() const {
    if (mode != "grid" && mode != "landmark") {
      ThrowInvalid("mode must be 'grid' or 'landmark'");
    }
    if (episodes < 0) ThrowInvalid("episodes must be non-negative");
    grid.Validate();
    scenario.Validate();
    if (!(split > 0.0 && split < 1.0)) ThrowInvalid("split must lie in (0, 1)");
    if (k < 1) ThrowInvalid("k must be at least 1");
    if (!(alpha >= 0.0)) ThrowInvalid("alpha must be non-negative");
    if (kmeans_max_iters < 0) ThrowInvalid("kmeans_max_iters must be >= 0");
    if (train_stride < 1 || eval_stride < 1 || landmark_stride < 1) {
      ThrowInvalid("strides must be at least 1");
    }
    if (lidar_beams < 4) ThrowInvalid("lidar needs at least 4 beams");
    if (!(lidar_max_range > 0.0)) ThrowInvalid("lidar range must be positive");
    auto prob = [](double p) { return p > 0.0 && p < 1.0; };
    if (!prob(inverse.p_occ_update) || !prob(inverse.p_free_update)) {
      ThrowInvalid("inverse sensor probabilities must lie in (0, 1)");
    }
    if (!prob(tau)) ThrowInvalid("tau must lie in (0, 1)");
    if (psi_region != "full" && psi_region != "occluded") {
      ThrowInvalid("psi_region must be 'full' or 'occluded'");
    }
    if (!(logit.regularization >= 0.0)) ThrowInvalid("logit.reg must be >= 0");
    if (logit.max_iters < 0) ThrowInvalid("logit.max_iters must be >= 0");
    if (!(action_window >= 0.5)) ThrowInvalid("action.window must be >= 0.5 s");
    landmark_region.Validate();
    if (landmark_region.frame != GridFrame::kEgoRelative) {
      ThrowInvalid("the landmark region must be ego-relative");
    }
  }
};

namespace internal {

// Calls f(key, field) for every configurable field, in file order.
template <typename Config, typename F>
void VisitFields(Config& c, F&& f) {
  f("mode", c.mode);
  f("seed", c.seed);
  f("out", c.out);
  f("episodes", c.episodes);

  f("grid.width", c.grid.width_cells);
  f("grid.height", c.grid.height_cells);
  f("grid.resolution", c.grid.resolution);
  f("grid.origin_x", c.grid.origin.x);
  f("grid.origin_y", c.grid.origin.y);
  f("grid.frame", c.grid.frame);

  auto& s = c.scenario;
  f("scenario.d0_min", s.d0.min);
  f("scenario.d0_max", s.d0.max);
  f("scenario.v0_min", s.v0.min);
  f("scenario.v0_max", s.v0.max);
  f("scenario.weight_bold_cross", s.weights.bold_cross);
  f("scenario.weight_wait_then_cross", s.weights.wait_then_cross);
  f("scenario.weight_stand", s.weights.stand);
  f("scenario.weight_absent", s.weights.absent);
  f("scenario.ped_speed_min", s.pedestrian_speed.min);
  f("scenario.ped_speed_max", s.pedestrian_speed.max);
  f("scenario.ped_offset_min", s.pedestrian_offset.min);
  f("scenario.ped_offset_max", s.pedestrian_offset.max);
  f("scenario.duration_min", s.episode_duration.min);
  f("scenario.duration_max", s.episode_duration.max);
  f("scenario.log_rate", s.log_rate);
  f("scenario.ego_gap", s.ego_gap);
  f("scenario.ego_speed_ratio_min", s.ego_speed_ratio.min);
  f("scenario.ego_speed_ratio_max", s.ego_speed_ratio.max);
  f("policy.reaction_distance", s.policy.reaction_distance);
  f("policy.a_max_brake", s.policy.a_max_brake);
  f("policy.a_max_accel", s.policy.a_max_accel);
  f("policy.stop_margin", s.policy.stop_margin);
  f("policy.accel_noise_sigma", s.policy.accel_noise_sigma);
  f("policy.wait_trigger_speed", s.policy.wait_trigger_speed);

  f("train.split", c.split);
  f("train.k", c.k);
  f("train.alpha", c.alpha);
  f("train.kmeans_max_iters", c.kmeans_max_iters);
  f("train.frame_stride", c.train_stride);

  f("lidar.beams", c.lidar_beams);
  f("lidar.max_range", c.lidar_max_range);
  f("lidar.p_occ", c.inverse.p_occ_update);
  f("lidar.p_free", c.inverse.p_free_update);

  f("eval.tau", c.tau);
  f("eval.psi_region", c.psi_region);
  f("eval.frame_stride", c.eval_stride);
  f("eval.dump_pgm", c.dump_pgm);

  f("logit.reg", c.logit.regularization);
  f("logit.max_iters", c.logit.max_iters);
  f("logit.tol", c.logit.tol);
  f("action.fast_speed", c.logit.thresholds.fast_speed);
  f("action.stopped_speed", c.logit.thresholds.stopped_speed);
  f("action.accel", c.logit.thresholds.accel);
  f("action.window", c.action_window);

  f("landmark.width", c.landmark_region.width_cells);
  f("landmark.height", c.landmark_region.height_cells);
  f("landmark.resolution", c.landmark_region.resolution);
  f("landmark.origin_x", c.landmark_region.origin.x);
  f("landmark.origin_y", c.landmark_region.origin.y);
  f("landmark.frame_stride", c.landmark_stride);

  f("camera.fx", c.camera.fx);
  f("camera.fy", c.camera.fy);
  f("camera.cx", c.camera.cx);
  f("camera.cy", c.camera.cy);
  f("camera.height_m", c.camera.height_m);
}

inline std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
std::string FieldToString(const T& v) {
  if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_same_v<T, GridFrame>) {
    return ToString(v);
  } else if constexpr (std::is_floating_point_v<T>) {
    return FormatDouble(v);
  } else {
    return std::to_string(v);
  }
}

template <typename T>
void FieldFromString(const std::string& key, const std::string& text, T& v) {
  auto bad = [&]() {
    ThrowInvalid("config key '" + key + "' has invalid value '" + text + "'");
  };
  if constexpr (std::is_same_v<T, std::string>) {
    v = text;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1") {
      v = true;
    } else if (text == "false" || text == "0") {
      v = false;
    } else {
      bad();
    }
  } else if constexpr (std::is_same_v<T, GridFrame>) {
    try {
      v = GridFrameFromString(text);
    } catch (const Error&) {
      bad();
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    try {
      v = ParseDouble(text);
    } catch (const Error&) {
      bad();
    }
  } else {
    T parsed{};
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), parsed);
    if (ec != std::errc() || p != text.data() + text.size()) bad();
    v = parsed;
  }
}

}  // namespace internal

// Sets one key. Unknown keys are usage errors.
inline void SetConfigValue(PipelineConfig& config, const std::string& key,
                           const std::string& value) {
  bool found = false;
  internal::VisitFields(config, [&](const char* name, auto& field) {
    if (key == name) {
      internal::FieldFromString(key, value, field);
      found = true;
    }
  });
  if (!found) ThrowInvalid("unknown config key '" + key + "'");
}

inline void ApplyConfigText(PipelineConfig& config, std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = internal::Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      ThrowInvalid("config line " + std::to_string(line_no) +
                   ": expected 'key = value'");
    }
    try {
      SetConfigValue(config, internal::Trim(line.substr(0, eq)),
                     internal::Trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      ThrowInvalid("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

inline PipelineConfig LoadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) ThrowIo("cannot open config file '" + path + "'");
  PipelineConfig config;
  ApplyConfigText(config, in);
  return config;
}

// Ordered key/value snapshot, also the canonical text form.
inline std::vector<std::pair<std::string, std::string>> ConfigSnapshot(
    const PipelineConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  internal::VisitFields(config, [&](const char* name, const auto& field) {
    out.emplace_back(name, internal::FieldToString(field));
  });
  return out;
}

inline std::string ConfigToText(const PipelineConfig& config) {
  std::ostringstream os;
  for (const auto& [k, v] : ConfigSnapshot(config)) os << k << " = " << v << '\n';
  return os.str();
}

}  // namespace driversense::pipeline

#endif  // DRIVERSENSE_PIPELINE_CONFIG_HPP_

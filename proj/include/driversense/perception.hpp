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

#ifndef DRIVERSENSE_PERCEPTION_HPP_
#define DRIVERSENSE_PERCEPTION_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "driversense/error.hpp"
#include "driversense/geometry.hpp"
#include "driversense/grid.hpp"
#include "driversense/grid_io.hpp"

namespace driversense {

enum class ObstacleKind { kVehicle, kPedestrian, kStructure };

inline std::string ToString(ObstacleKind k) {
  switch (k) {
    case ObstacleKind::kVehicle: return "vehicle";
    case ObstacleKind::kPedestrian: return "pedestrian";
    case ObstacleKind::kStructure: return "structure";
  }
  return "?";
}

struct Obstacle {
  OrientedRect shape;
  ObstacleKind kind = ObstacleKind::kStructure;
};

struct SceneGeometry {
  std::vector<Obstacle> obstacles;

  void Validate() const {
    for (const auto& o : obstacles) {
      if (!(o.shape.half_extents.x > 0.0 && o.shape.half_extents.y > 0.0)) {
        ThrowInvalid("obstacle half-extents must be positive");
      }
    }
  }
};

struct ScanBeam {
  double bearing = 0.0;  // relative to the scan heading, [0, 2pi)
  double range = 0.0;
  bool hit = false;
};

struct Scan {
  Pose2D origin;
  std::vector<ScanBeam> beams;  // strictly increasing bearings
  double max_range = 0.0;
};

// 360-degree scan with beams at bearings 2*pi*j/n. Each beam reports the
// nearest obstacle boundary; obstacles containing the sensor are ignored.
inline Scan RaycastScan(const SceneGeometry& scene, const Pose2D& ego,
                        int n_beams, double max_range) {
  if (n_beams < 4) ThrowInvalid("a scan needs at least 4 beams");
  if (!(max_range > 0.0)) ThrowInvalid("max range must be positive");
  scene.Validate();

  Scan scan{ego, {}, max_range};
  scan.beams.reserve(n_beams);
  const Vec2 origin = ego.position();
  for (int j = 0; j < n_beams; ++j) {
    const double bearing = 2.0 * std::numbers::pi * j / n_beams;
    const double angle = ego.heading + bearing;
    const Vec2 dir{std::cos(angle), std::sin(angle)};
    double best = max_range;
    bool hit = false;
    for (const auto& obstacle : scene.obstacles) {
      if (auto t = RayRectIntersection(origin, dir, obstacle.shape)) {
        if (*t <= best) {
          best = *t;
          hit = true;
        }
      }
    }
    scan.beams.push_back({bearing, best, hit});
  }
  return scan;
}

enum class CellVisibility { kVisible, kOccluded };

// What a scan says about one grid cell.
enum class CellObservation {
  kFree,        // the beam passes through the cell before its endpoint
  kOccupied,    // the beam ends inside the cell
  kOccluded,    // the cell lies behind the beam's endpoint
  kOutOfRange,  // visible, but farther than max range
};

namespace internal {

// Nearest-bearing lookup over a scan. A bearing farther than the smallest
// beam spacing from every beam is outside the scan's coverage.
class BeamLookup {
 public:
  explicit BeamLookup(const Scan& scan) : scan_(scan) {
    const auto& beams = scan.beams;
    if (beams.empty()) return;
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    double min_gap = kTwoPi;
    for (std::size_t j = 0; j < beams.size(); ++j) {
      const double next = j + 1 < beams.size() ? beams[j + 1].bearing
                                               : beams[0].bearing + kTwoPi;
      const double gap = next - beams[j].bearing;
      if (!(gap > 0.0)) ThrowInvalid("scan bearings must strictly increase");
      min_gap = std::min(min_gap, gap);
    }
    coverage_ = min_gap;
  }

  const ScanBeam* Nearest(double bearing) const {
    const auto& beams = scan_.beams;
    if (beams.empty()) return nullptr;
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    auto it = std::lower_bound(
        beams.begin(), beams.end(), bearing,
        [](const ScanBeam& b, double v) { return b.bearing < v; });
    const std::size_t hi = (it == beams.end()) ? 0 : it - beams.begin();
    const std::size_t lo = (hi == 0) ? beams.size() - 1 : hi - 1;
    auto dist = [&](std::size_t j) {
      const double d = std::abs(beams[j].bearing - bearing);
      return std::min(d, kTwoPi - d);
    };
    // Lower index wins ties.
    std::size_t best = hi;
    if (dist(lo) < dist(hi) || (dist(lo) == dist(hi) && lo < hi)) best = lo;
    if (dist(best) > coverage_) return nullptr;
    return &beams[best];
  }

 private:
  const Scan& scan_;
  double coverage_ = 0.0;
};

inline CellObservation ObserveCell(const Scan& scan, const BeamLookup& lookup,
                                   Vec2 cell_center, double resolution) {
  const Vec2 d = cell_center - scan.origin.position();
  const double r = Norm(d);
  if (r == 0.0) return CellObservation::kFree;
  const double bearing =
      WrapTwoPi(std::atan2(d.y, d.x) - scan.origin.heading);
  const ScanBeam* beam = lookup.Nearest(bearing);
  if (beam == nullptr) return CellObservation::kOccluded;
  const double half = 0.5 * resolution;
  if (beam->hit) {
    if (r - beam->range > half) return CellObservation::kOccluded;
    if (r - beam->range >= -half) return CellObservation::kOccupied;
    return CellObservation::kFree;
  }
  return r <= scan.max_range ? CellObservation::kFree
                             : CellObservation::kOutOfRange;
}

}  // namespace internal

// Per-cell visibility from the scan origin. A cell is occluded when the beam
// nearest its center bearing ends more than half a cell short of the center,
// or when no beam covers that bearing.
inline std::vector<CellVisibility> VisibilityMask(
    const Scan& scan, const GridSpec& spec, const Pose2D& reference = {}) {
  spec.Validate();
  const internal::BeamLookup lookup(scan);
  std::vector<CellVisibility> mask(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto obs = internal::ObserveCell(
        scan, lookup, spec.CellCenterWorld(i, reference), spec.resolution);
    mask[i] = obs == CellObservation::kOccluded ? CellVisibility::kOccluded
                                                : CellVisibility::kVisible;
  }
  return mask;
}

struct InverseSensorParams {
  double p_occ_update = 0.9;
  double p_free_update = 0.2;
};

// Classic inverse range-sensor update with a one-cell hit band: cells before
// the endpoint are free, the endpoint cell is occupied, and cells behind the
// endpoint (or beyond max range) are left untouched.
inline OccupancyGrid StandardInverseUpdate(const OccupancyGrid& grid,
                                           const Scan& scan,
                                           const Pose2D& reference = {},
                                           const InverseSensorParams& params = {}) {
  const GridSpec& spec = grid.spec();
  const internal::BeamLookup lookup(scan);
  OccupancyGrid out = grid;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto obs = internal::ObserveCell(
        scan, lookup, spec.CellCenterWorld(i, reference), spec.resolution);
    if (obs == CellObservation::kOccupied) {
      out.set(i, BayesCellUpdate(grid.at(i), params.p_occ_update,
                                 1.0 - params.p_occ_update));
    } else if (obs == CellObservation::kFree) {
      out.set(i, BayesCellUpdate(grid.at(i), params.p_free_update,
                                 1.0 - params.p_free_update));
    }
  }
  return out;
}

inline void WriteScanCsv(std::ostream& out, const Scan& scan) {
  out << "bearing,range,hit\n";
  for (const auto& b : scan.beams) {
    out << FormatDouble(b.bearing) << ',' << FormatDouble(b.range) << ','
        << (b.hit ? 1 : 0) << '\n';
  }
}

}  // namespace driversense

#endif  // DRIVERSENSE_PERCEPTION_HPP_

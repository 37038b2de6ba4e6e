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

#ifndef DRIVERSENSE_GRID_HPP_
#define DRIVERSENSE_GRID_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driversense/error.hpp"
#include "driversense/geometry.hpp"

namespace driversense {

// Guards the Bayes normalizer against division by (numerically) zero.
inline constexpr double kProbabilityEpsilon = 1e-12;

enum class GridFrame {
  kWorld,        // origin is a fixed world point
  kEgoRelative,  // origin is expressed in a reference vehicle's body frame
};

inline std::string ToString(GridFrame f) {
  return f == GridFrame::kWorld ? "world" : "ego";
}

inline GridFrame GridFrameFromString(const std::string& s) {
  if (s == "world") return GridFrame::kWorld;
  if (s == "ego" || s == "ego_relative") return GridFrame::kEgoRelative;
  ThrowInvalid("unknown grid frame '" + s + "'");
}

// A row-major grid laid out like an image seen from above: `origin` is the
// outer corner of cell (0, 0); columns grow along +x and rows grow along -y
// of the grid frame. With the frame's +y pointing in the direction of travel,
// row 0 is the farthest row and the last row is the one nearest the vehicle.
// In the ego-relative frame +x is the vehicle's right and +y its forward axis.
struct GridSpec {
  int width_cells = 6;
  int height_cells = 7;
  double resolution = 1.0;  // meters per cell
  Vec2 origin;
  GridFrame frame = GridFrame::kWorld;

  std::size_t size() const {
    return static_cast<std::size_t>(width_cells) *
           static_cast<std::size_t>(height_cells);
  }

  void Validate() const {
    if (width_cells <= 0 || height_cells <= 0) {
      ThrowInvalid("grid dimensions must be positive, got " +
                   std::to_string(width_cells) + "x" +
                   std::to_string(height_cells));
    }
    if (!(resolution > 0.0) || !std::isfinite(resolution)) {
      ThrowInvalid("grid resolution must be positive");
    }
    if (!std::isfinite(origin.x) || !std::isfinite(origin.y)) {
      ThrowInvalid("grid origin must be finite");
    }
  }

  std::size_t Index(int col, int row) const {
    return static_cast<std::size_t>(row) * width_cells + col;
  }
  int Col(std::size_t i) const { return static_cast<int>(i % width_cells); }
  int Row(std::size_t i) const { return static_cast<int>(i / width_cells); }

  Vec2 CellCenterLocal(std::size_t i) const {
    return {origin.x + (Col(i) + 0.5) * resolution,
            origin.y - (Row(i) + 0.5) * resolution};
  }

  // `reference` anchors ego-relative grids and is ignored for world grids.
  Vec2 CellCenterWorld(std::size_t i, const Pose2D& reference = {}) const {
    const Vec2 local = CellCenterLocal(i);
    return frame == GridFrame::kWorld ? local : reference.BodyToWorld(local);
  }

  OrientedRect CellRectWorld(std::size_t i,
                             const Pose2D& reference = {}) const {
    const double heading = frame == GridFrame::kWorld
                               ? 0.0
                               : reference.heading - std::numbers::pi / 2.0;
    return {CellCenterWorld(i, reference),
            {0.5 * resolution, 0.5 * resolution},
            heading};
  }

  std::optional<std::size_t> LocateLocal(Vec2 local) const {
    const double fc = (local.x - origin.x) / resolution;
    const double fr = (origin.y - local.y) / resolution;
    if (fc < 0.0 || fr < 0.0 || fc >= width_cells || fr >= height_cells) {
      return std::nullopt;
    }
    return Index(static_cast<int>(fc), static_cast<int>(fr));
  }

  std::optional<std::size_t> LocateWorld(Vec2 world,
                                         const Pose2D& reference = {}) const {
    return LocateLocal(frame == GridFrame::kWorld
                           ? world
                           : reference.WorldToBody(world));
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

class OccupancyGrid {
 public:
  OccupancyGrid(GridSpec spec, std::vector<double> probs)
      : spec_(spec), probs_(std::move(probs)) {
    spec_.Validate();
    if (probs_.size() != spec_.size()) {
      ThrowInvalid("occupancy grid has " + std::to_string(probs_.size()) +
                   " cells, spec requires " + std::to_string(spec_.size()));
    }
    for (double p : probs_) CheckProbability(p);
  }

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return probs_.size(); }
  std::span<const double> probs() const { return probs_; }

  double at(std::size_t i) const { return probs_.at(i); }
  double at(int col, int row) const { return probs_.at(spec_.Index(col, row)); }

  void set(std::size_t i, double p) {
    CheckProbability(p);
    probs_.at(i) = p;
  }

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  static void CheckProbability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
      ThrowInvalid("occupancy probability outside [0, 1]: " +
                   std::to_string(p));
    }
  }

  GridSpec spec_;
  std::vector<double> probs_;
};

class BinaryMap {
 public:
  explicit BinaryMap(GridSpec spec)
      : spec_(spec), cells_((spec.Validate(), spec.size()), 0) {}

  BinaryMap(GridSpec spec, std::vector<std::uint8_t> cells)
      : spec_(spec), cells_(std::move(cells)) {
    spec_.Validate();
    if (cells_.size() != spec_.size()) {
      ThrowInvalid("binary map size does not match its spec");
    }
    for (auto c : cells_) {
      if (c > 1) ThrowInvalid("binary map entries must be 0 or 1");
    }
  }

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return cells_.size(); }
  std::span<const std::uint8_t> cells() const { return cells_; }

  std::uint8_t at(std::size_t i) const { return cells_.at(i); }
  void set(std::size_t i, bool occupied) {
    cells_.at(i) = occupied ? 1 : 0;
  }

  std::size_t Count(std::uint8_t c) const {
    std::size_t n = 0;
    for (auto v : cells_) n += (v == c);
    return n;
  }

  friend bool operator==(const BinaryMap&, const BinaryMap&) = default;

 private:
  GridSpec spec_;
  std::vector<std::uint8_t> cells_;
};

// Maximum-entropy one-shot prior.
inline OccupancyGrid NewUniformGrid(const GridSpec& spec) {
  spec.Validate();
  return OccupancyGrid(spec, std::vector<double>(spec.size(), 0.5));
}

// Posterior occupancy of a single binary cell after observing evidence with
// likelihood `lik_occ` if the cell is occupied and `lik_free` if it is free.
// The denominator is the evidence normalizer.
inline double BayesCellUpdate(double prior, double lik_occ, double lik_free) {
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(prior) || !in_unit(lik_occ) || !in_unit(lik_free)) {
    ThrowInvalid("Bayes update arguments must lie in [0, 1]");
  }
  const double occ = lik_occ * prior;
  const double normalizer = occ + lik_free * (1.0 - prior);
  if (normalizer <= kProbabilityEpsilon) {
    ThrowInvalid("degenerate Bayes update: evidence has zero probability");
  }
  return std::clamp(occ / normalizer, 0.0, 1.0);
}

// Cell is occupied iff its probability reaches `tau` (inclusive).
inline BinaryMap Threshold(const OccupancyGrid& grid, double tau = 0.6) {
  if (!(tau > 0.0 && tau < 1.0)) ThrowInvalid("threshold must lie in (0, 1)");
  BinaryMap out(grid.spec());
  for (std::size_t i = 0; i < grid.size(); ++i) out.set(i, grid.at(i) >= tau);
  return out;
}

// Probability of one full realization under the independent-cell model.
inline double JointMapProbability(const OccupancyGrid& grid,
                                  const BinaryMap& realization) {
  if (!(grid.spec() == realization.spec())) {
    ThrowInvalid("grid and realization specs differ");
  }
  double p = 1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    p *= realization.at(i) ? grid.at(i) : 1.0 - grid.at(i);
  }
  return p;
}

}  // namespace driversense

#endif  // DRIVERSENSE_GRID_HPP_

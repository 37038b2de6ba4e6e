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

#include "driversense/perception.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace driversense {
namespace {

constexpr double kPi = std::numbers::pi;

Obstacle Box(double cx, double cy, double hx, double hy, double heading = 0.0) {
  return {{{cx, cy}, {hx, hy}, heading}, ObstacleKind::kStructure};
}

GridSpec FieldAhead() {
  // 6 x 8 cells of 1 m covering x in [8, 14], y in [-4, 4].
  GridSpec s;
  s.width_cells = 6;
  s.height_cells = 8;
  s.origin = {8.0, 4.0};
  return s;
}

TEST(GeometryTest, RayHitsNearFace) {
  const OrientedRect r{{5.0, 0.0}, {0.5, 0.5}, 0.0};
  EXPECT_NEAR(*RayRectIntersection({0, 0}, {1, 0}, r), 4.5, 1e-12);
  EXPECT_FALSE(RayRectIntersection({0, 0}, {-1, 0}, r).has_value());
  EXPECT_FALSE(RayRectIntersection({5, 0}, {1, 0}, r).has_value());
  const OrientedRect diamond{{5.0, 0.0}, {0.5, 0.5}, kPi / 4.0};
  EXPECT_NEAR(*RayRectIntersection({0, 0}, {1, 0}, diamond), 5.0 - std::sqrt(0.5),
              1e-12);
}

TEST(GeometryTest, RectsOverlapNeedsPositiveArea) {
  const OrientedRect a{{0, 0}, {0.5, 0.5}, 0.0};
  EXPECT_TRUE(RectsOverlap(a, {{0.9, 0.0}, {0.5, 0.5}, 0.0}));
  EXPECT_FALSE(RectsOverlap(a, {{1.0, 0.0}, {0.5, 0.5}, 0.0}));
  EXPECT_TRUE(RectsOverlap(a, {{1.2, 0.0}, {0.5, 0.5}, kPi / 4.0}));
}

TEST(RaycastScanTest, EmptySceneMissesEverywhere) {
  const Scan scan = RaycastScan({}, MakePose(0, 0, 0), 360, 60.0);
  ASSERT_EQ(scan.beams.size(), 360u);
  for (const auto& b : scan.beams) {
    EXPECT_FALSE(b.hit);
    EXPECT_EQ(b.range, 60.0);
  }
}

TEST(RaycastScanTest, UnitSquareAhead) {
  const Scan scan = RaycastScan({{Box(5.0, 0.0, 0.5, 0.5)}}, MakePose(0, 0, 0), 360,
                                60.0);
  EXPECT_TRUE(scan.beams[0].hit);
  EXPECT_NEAR(scan.beams[0].range, 4.5, 1e-12);
  EXPECT_FALSE(scan.beams[180].hit);
}

TEST(RaycastScanTest, ObstacleBehindDoesNotBlockForwardBeam) {
  const Scan scan = RaycastScan({{Box(-5.0, 0.0, 0.5, 0.5)}}, MakePose(0, 0, 0), 360,
                                60.0);
  EXPECT_FALSE(scan.beams[0].hit);
  EXPECT_TRUE(scan.beams[180].hit);
}

TEST(RaycastScanTest, BearingsAreRelativeToHeading) {
  const Scan scan = RaycastScan({{Box(0.0, 5.0, 0.5, 0.5)}},
                                MakePose(0, 0, kPi / 2.0), 360, 60.0);
  EXPECT_TRUE(scan.beams[0].hit);
  EXPECT_NEAR(scan.beams[0].range, 4.5, 1e-9);
}

TEST(RaycastScanTest, RejectsBadParameters) {
  EXPECT_THROW(RaycastScan({}, {}, 3, 10.0), Error);
  EXPECT_THROW(RaycastScan({}, {}, 360, 0.0), Error);
  EXPECT_THROW(RaycastScan({{Box(1, 1, 0.0, 1.0)}}, {}, 360, 10.0), Error);
}

TEST(VisibilityMaskTest, AllMissScanSeesEverything) {
  const Scan scan = RaycastScan({}, MakePose(0, 0, 0), 360, 60.0);
  for (auto v : VisibilityMask(scan, FieldAhead())) {
    EXPECT_EQ(v, CellVisibility::kVisible);
  }
}

TEST(VisibilityMaskTest, ShadowWedgeBehindOccluder) {
  const Obstacle wall = Box(5.0, 0.0, 0.25, 1.0);
  const Scan scan = RaycastScan({{wall}}, MakePose(0, 0, 0), 360, 60.0);
  const GridSpec s = FieldAhead();
  const auto mask = VisibilityMask(scan, s);
  // Angular extent of the wall seen from the origin, from its corners.
  double lo = kPi, hi = -kPi;
  for (const Vec2& c : wall.shape.Corners()) {
    lo = std::min(lo, std::atan2(c.y, c.x));
    hi = std::max(hi, std::atan2(c.y, c.x));
  }
  const double margin = 2.0 * kPi / 360.0;
  int checked = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vec2 c = s.CellCenterWorld(i);
    const double b = std::atan2(c.y, c.x);
    if (b > lo + margin && b < hi - margin) {
      EXPECT_EQ(mask[i], CellVisibility::kOccluded) << "cell " << i;
      ++checked;
    } else if (b < lo - margin || b > hi + margin) {
      EXPECT_EQ(mask[i], CellVisibility::kVisible) << "cell " << i;
      ++checked;
    }
  }
  EXPECT_GT(checked, 30);
}

TEST(VisibilityMaskTest, CellsNearerThanEveryHitAreVisible) {
  const Scan scan = RaycastScan({{Box(20.0, 0.0, 0.5, 10.0)}}, MakePose(0, 0, 0), 360,
                                60.0);
  for (auto v : VisibilityMask(scan, FieldAhead())) {
    EXPECT_EQ(v, CellVisibility::kVisible);
  }
}

TEST(VisibilityMaskTest, UncoveredBearingsCountAsOccluded) {
  Scan scan{MakePose(0, 0, 0), {{0.0, 60.0, false}, {0.1, 60.0, false}}, 60.0};
  GridSpec s;
  s.width_cells = 1;
  s.height_cells = 1;
  s.origin = {-0.5, 10.5};  // straight to the left, bearing pi/2
  EXPECT_EQ(VisibilityMask(scan, s)[0], CellVisibility::kOccluded);
}

TEST(VisibilityMaskTest, OcclusionIsMonotoneInObstacleSize) {
  Rng rng(21);
  std::uniform_real_distribution<double> grow(1.0, 2.0);
  GridSpec s;
  s.width_cells = 16;
  s.height_cells = 16;
  s.origin = {-8.0, 8.0};
  for (int trial = 0; trial < 100; ++trial) {
    SceneGeometry scene = oracle::RandomScene(rng, 3);
    if (scene.obstacles.empty()) continue;
    SceneGeometry bigger = scene;
    auto& r = bigger.obstacles[trial % bigger.obstacles.size()].shape;
    r.half_extents = {r.half_extents.x * grow(rng), r.half_extents.y * grow(rng)};
    if (r.Contains({0.0, 0.0})) continue;
    const auto a = VisibilityMask(RaycastScan(scene, {}, 360, 60.0), s);
    const auto b = VisibilityMask(RaycastScan(bigger, {}, 360, 60.0), s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (a[i] == CellVisibility::kOccluded) {
        EXPECT_EQ(b[i], CellVisibility::kOccluded) << "trial " << trial;
      }
    }
  }
}

TEST(VisibilityMaskTest, AgreesWithDenseRayOracle) {
  Rng rng(22);
  GridSpec s;
  s.width_cells = 20;
  s.height_cells = 20;
  s.origin = {-10.0, 10.0};
  std::size_t ambiguous = 0, total = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const SceneGeometry scene = oracle::RandomScene(rng, 3);
    const auto mask = VisibilityMask(RaycastScan(scene, {}, 360, 60.0), s);
    const auto dense = oracle::DenseVisibility(scene, {}, s, 360, 60.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      ++total;
      if (dense[i] == oracle::DenseVerdict::kAmbiguous) {
        ++ambiguous;
        continue;
      }
      const bool occluded = dense[i] == oracle::DenseVerdict::kOccluded;
      EXPECT_EQ(mask[i] == CellVisibility::kOccluded, occluded)
          << "trial " << trial << " cell " << i;
    }
  }
  EXPECT_LT(static_cast<double>(ambiguous) / total, 0.05);
}

TEST(StandardInverseUpdateTest, AllMissLowersTraversedCellsOnly) {
  const GridSpec s = FieldAhead();
  const Scan scan = RaycastScan({}, MakePose(0, 0, 0), 360, 60.0);
  const auto g = StandardInverseUpdate(NewUniformGrid(s), scan);
  for (double p : g.probs()) EXPECT_NEAR(p, 0.2, 1e-12);

  const Scan short_scan = RaycastScan({}, MakePose(0, 0, 0), 360, 10.0);
  const auto h = StandardInverseUpdate(NewUniformGrid(s), short_scan);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double r = Norm(s.CellCenterWorld(i));
    EXPECT_NEAR(h.at(i), r <= 10.0 ? 0.2 : 0.5, 1e-12);
  }
}

TEST(StandardInverseUpdateTest, HitCellRises) {
  GridSpec s;
  s.width_cells = 10;
  s.height_cells = 1;
  s.origin = {0.0, 0.5};
  // Near face at x = 5.5, inside cell 5 whose center is 5.5.
  const Scan scan = RaycastScan({{Box(6.0, 0.0, 0.5, 0.3)}}, MakePose(0, 0, 0), 360,
                                60.0);
  const InverseSensorParams params;
  const auto g = StandardInverseUpdate(NewUniformGrid(s), scan, {}, params);
  EXPECT_NEAR(g.at(5), params.p_occ_update, 1e-12);
  for (int c = 0; c < 5; ++c) EXPECT_NEAR(g.at(c), params.p_free_update, 1e-12);
  for (int c = 7; c < 10; ++c) EXPECT_EQ(g.at(c), 0.5);
}

TEST(StandardInverseUpdateTest, NeverTouchesOccludedCells) {
  Rng rng(23);
  GridSpec s;
  s.width_cells = 12;
  s.height_cells = 12;
  s.origin = {-6.0, 6.0};
  for (int trial = 0; trial < 50; ++trial) {
    const SceneGeometry scene = oracle::RandomScene(rng, 3);
    const Scan scan = RaycastScan(scene, {}, 360, 60.0);
    const auto prior = oracle::RandomGrid(s, rng);
    const auto post = StandardInverseUpdate(prior, scan);
    const auto mask = VisibilityMask(scan, s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (mask[i] == CellVisibility::kOccluded) {
        EXPECT_EQ(post.at(i), prior.at(i));
      }
    }
  }
}

TEST(ScanCsvTest, OneLinePerBeam) {
  const Scan scan = RaycastScan({}, {}, 8, 5.0);
  std::ostringstream os;
  WriteScanCsv(os, scan);
  int lines = 0;
  for (char c : os.str()) lines += c == '\n';
  EXPECT_EQ(lines, 9);
}

}  // namespace
}  // namespace driversense

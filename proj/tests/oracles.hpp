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

// Brute-force reference implementations shared by the unit tests and the
// acceptance binary. None of them reuse the library's fast paths.

#ifndef DRIVERSENSE_TESTS_ORACLES_HPP_
#define DRIVERSENSE_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "driversense/actionlets.hpp"
#include "driversense/grid.hpp"
#include "driversense/landmark.hpp"
#include "driversense/likelihood_table.hpp"
#include "driversense/perception.hpp"
#include "driversense/random.hpp"

namespace driversense::oracle {

inline GridSpec SmallSpec(int w, int h) {
  GridSpec s;
  s.width_cells = w;
  s.height_cells = h;
  s.resolution = 1.0;
  return s;
}

inline OccupancyGrid RandomGrid(const GridSpec& spec, Rng& rng) {
  std::uniform_real_distribution<double> u(0.02, 0.98);
  std::vector<double> p(spec.size());
  for (double& v : p) v = u(rng);
  return OccupancyGrid(spec, p);
}

inline BinaryMap RandomMap(const GridSpec& spec, Rng& rng, double p_one) {
  std::bernoulli_distribution b(p_one);
  BinaryMap m(spec);
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, b(rng));
  return m;
}

inline LikelihoodTable RandomTable(const GridSpec& spec, int k, Rng& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> e(spec.size() * 2 * k);
  for (std::size_t slot = 0; slot < spec.size() * 2; ++slot) {
    double sum = 0.0;
    for (int a = 0; a < k; ++a) sum += (e[slot * k + a] = u(rng));
    for (int a = 0; a < k; ++a) e[slot * k + a] /= sum;
  }
  return LikelihoodTable(spec, k, e,
                         std::vector<std::uint64_t>(spec.size() * 2, 1));
}

// Per-cell marginals of p(m | a) over all 2^n realizations, with
// p(a | m) = prod_i p(a | m_i).
inline std::vector<double> EnumeratedMarginals(const OccupancyGrid& prior,
                                               const LikelihoodTable& table,
                                               ActionId a) {
  const std::size_t n = prior.size();
  std::vector<double> occupied(n, 0.0);
  double evidence = 0.0;
  BinaryMap m(prior.spec());
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    double lik = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = (bits >> i) & 1;
      m.set(i, c == 1);
      lik *= table.Distribution(i, c)[a];
    }
    const double w = lik * JointMapProbability(prior, m);
    evidence += w;
    for (std::size_t i = 0; i < n; ++i) {
      if ((bits >> i) & 1) occupied[i] += w;
    }
  }
  for (double& v : occupied) v /= evidence;
  return occupied;
}

// d(A, B, c) by scanning every pair of cells.
inline double BruteDirectedDistance(const BinaryMap& a, const BinaryMap& b, int c) {
  const GridSpec& s = a.spec();
  const double diameter = s.width_cells + s.height_cells;
  double total = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.at(i) != c) continue;
    ++count;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (b.at(j) != c) continue;
      best = std::min<double>(best, std::abs(s.Col(i) - s.Col(j)) +
                                        std::abs(s.Row(i) - s.Row(j)));
    }
    total += std::isinf(best) ? diameter : best;
  }
  return count == 0 ? 0.0 : total / count;
}

inline double Psi(const BinaryMap& a, const BinaryMap& b) {
  return (BruteDirectedDistance(a, b, 0) + BruteDirectedDistance(b, a, 0)) +
         (BruteDirectedDistance(a, b, 1) + BruteDirectedDistance(b, a, 1));
}

// First crossing of a ray with the rectangle's four edges, found by
// segment-segment intersection.
inline std::optional<double> EdgeHit(Vec2 o, Vec2 d, const OrientedRect& r) {
  const auto c = r.Corners();
  std::optional<double> best;
  for (int e = 0; e < 4; ++e) {
    const Vec2 p = c[e];
    const Vec2 q = c[(e + 1) % 4];
    const Vec2 s = q - p;
    const double den = d.x * s.y - d.y * s.x;
    if (std::abs(den) < 1e-15) continue;
    const Vec2 w = p - o;
    const double t = (w.x * s.y - w.y * s.x) / den;
    const double u = (w.x * d.y - w.y * d.x) / den;
    if (t >= 0.0 && u >= -1e-12 && u <= 1.0 + 1e-12) {
      if (!best || t < *best) best = t;
    }
  }
  return best;
}

inline double DenseRange(const SceneGeometry& scene, Vec2 o, double angle,
                         double max_range) {
  const Vec2 d{std::cos(angle), std::sin(angle)};
  double best = max_range;
  for (const auto& ob : scene.obstacles) {
    if (ob.shape.Contains(o)) continue;
    if (auto t = EdgeHit(o, d, ob.shape)) best = std::min(best, *t);
  }
  return best;
}

enum class DenseVerdict { kVisible, kOccluded, kAmbiguous };

// Visibility of every cell from rays cast at `density` times the scan's
// beam count. A cell is judged from all dense rays inside the angular sector
// a single scan beam covers around the cell's bearing; the verdict is
// ambiguous when those rays disagree (a shadow edge crosses the sector).
inline std::vector<DenseVerdict> DenseVisibility(const SceneGeometry& scene,
                                                 const Pose2D& ego,
                                                 const GridSpec& spec,
                                                 int n_beams, double max_range,
                                                 int density = 10) {
  const int dense = n_beams * density;
  const double step = 2.0 * std::numbers::pi / dense;
  std::vector<double> ranges(dense);
  for (int j = 0; j < dense; ++j) {
    ranges[j] = DenseRange(scene, ego.position(), ego.heading + j * step,
                           max_range);
  }
  const double half = 0.5 * spec.resolution;
  std::vector<DenseVerdict> out(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Vec2 d = spec.CellCenterWorld(i) - ego.position();
    const double r = Norm(d);
    const double bearing = WrapTwoPi(std::atan2(d.y, d.x) - ego.heading);
    const int center = static_cast<int>(std::lround(bearing / step));
    bool any_occ = false;
    bool any_vis = false;
    for (int o = -density / 2; o <= density / 2; ++o) {
      const int j = ((center + o) % dense + dense) % dense;
      const bool hit = ranges[j] < max_range;
      (hit && r - ranges[j] > half ? any_occ : any_vis) = true;
    }
    out[i] = any_occ && any_vis ? DenseVerdict::kAmbiguous
             : any_occ          ? DenseVerdict::kOccluded
                                : DenseVerdict::kVisible;
  }
  return out;
}

inline SceneGeometry RandomScene(Rng& rng, int max_obstacles) {
  std::uniform_int_distribution<int> count(0, max_obstacles);
  std::uniform_real_distribution<double> pos(-12.0, 12.0);
  std::uniform_real_distribution<double> ext(0.2, 2.5);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  SceneGeometry scene;
  const int n = count(rng);
  while (static_cast<int>(scene.obstacles.size()) < n) {
    OrientedRect r{{pos(rng), pos(rng)}, {ext(rng), ext(rng)}, ang(rng)};
    if (r.Contains({0.0, 0.0}) || Norm(r.center) < Norm(r.half_extents) + 0.5) {
      continue;
    }
    scene.obstacles.push_back({r, ObstacleKind::kStructure});
  }
  return scene;
}

// Two Gaussian blobs in feature space, differing only in the speed samples.
struct TwoBlobs {
  std::vector<FeatureWindow> points;
  std::vector<int> label;
};

inline TwoBlobs MakeTwoBlobs(std::uint64_t seed, int per_blob, double sigma) {
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  TwoBlobs out;
  for (int b = 0; b < 2; ++b) {
    for (int i = 0; i < per_blob; ++i) {
      FeatureWindow f;
      f.dist_to_crosswalk = 20.0 + noise(rng);
      for (int j = 0; j < kHistorySamples; ++j) {
        f.vel[j] = (b == 0 ? 2.0 : 6.0) + noise(rng);
        f.acc[j] = (b == 0 ? -1.0 : 0.5) + noise(rng);
      }
      out.points.push_back(f);
      out.label.push_back(b);
    }
  }
  return out;
}

inline std::vector<LogitSample> RandomLogitSamples(Rng& rng, int n) {
  std::uniform_real_distribution<double> x(-8.0, 8.0);
  std::uniform_real_distribution<double> y(1.0, 30.0);
  std::uniform_int_distribution<int> a(0, kNumSemanticActions - 1);
  std::vector<LogitSample> s;
  for (int i = 0; i < n; ++i) {
    s.push_back({{{x(rng), y(rng)}}, static_cast<SemanticAction>(a(rng))});
  }
  return s;
}

inline LogitWeights RandomWeights(Rng& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  LogitWeights w{};
  for (auto& row : w) {
    for (double& v : row) v = g(rng);
  }
  return w;
}

// Largest relative error between the analytic gradient and central finite
// differences, with the error measured against max(1, |g|).
inline double GradientCheck(const LogitObjective& f, const LogitWeights& w,
                            double h = 1e-5) {
  const LogitWeights g = f.Gradient(w);
  double worst = 0.0;
  for (int a = 0; a < kNumSemanticActions; ++a) {
    for (int d = 0; d < kLogitFeatureDim; ++d) {
      LogitWeights wp = w;
      LogitWeights wm = w;
      wp[a][d] += h;
      wm[a][d] -= h;
      const double fd = (f.Value(wp) - f.Value(wm)) / (2.0 * h);
      const double err = std::abs(fd - g[a][d]) /
                         std::max(1.0, std::abs(g[a][d]));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace driversense::oracle

#endif  // DRIVERSENSE_TESTS_ORACLES_HPP_

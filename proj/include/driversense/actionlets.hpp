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

#ifndef DRIVERSENSE_ACTIONLETS_HPP_
#define DRIVERSENSE_ACTIONLETS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "driversense/error.hpp"
#include "driversense/likelihood_table.hpp"
#include "driversense/random.hpp"

namespace driversense {

inline constexpr int kHistorySamples = 10;
inline constexpr double kHistoryWindow = 0.5;  // seconds
inline constexpr int kFeatureDim = 1 + 2 * kHistorySamples;

using FeatureVector = std::array<double, kFeatureDim>;

// Behaviour of the observed driver at one instant: distance to the crosswalk
// plus evenly spaced speed and acceleration samples over the last half
// second, oldest first.
struct FeatureWindow {
  double dist_to_crosswalk = 0.0;
  std::array<double, kHistorySamples> vel{};
  std::array<double, kHistorySamples> acc{};

  FeatureVector ToVector() const {
    FeatureVector v{};
    v[0] = dist_to_crosswalk;
    std::copy(vel.begin(), vel.end(), v.begin() + 1);
    std::copy(acc.begin(), acc.end(), v.begin() + 1 + kHistorySamples);
    return v;
  }
};

// One logged state of the observed vehicle along its lane.
struct TrackSample {
  double t = 0.0;
  double position = 0.0;  // along-track position of the vehicle front
  double speed = 0.0;
  double accel = 0.0;
};

namespace internal {

inline TrackSample Interpolate(std::span<const TrackSample> track, double t) {
  auto it = std::lower_bound(
      track.begin(), track.end(), t,
      [](const TrackSample& s, double v) { return s.t < v; });
  if (it == track.begin()) return *it;
  if (it == track.end()) return track.back();
  const TrackSample& b = *it;
  const TrackSample& a = *(it - 1);
  const double w = (b.t == a.t) ? 0.0 : (t - a.t) / (b.t - a.t);
  auto lerp = [w](double x, double y) { return x + w * (y - x); };
  return {t, lerp(a.position, b.position), lerp(a.speed, b.speed),
          lerp(a.accel, b.accel)};
}

}  // namespace internal

// Builds the feature window at time `t` by linear interpolation of the track.
// The track must cover [t - 0.5 s, t] at 20 Hz or faster.
inline FeatureWindow ExtractFeatures(std::span<const TrackSample> track,
                                     double crosswalk_position, double t) {
  constexpr double kSlack = 1e-9;
  if (track.empty() || track.front().t > t - kHistoryWindow + kSlack ||
      track.back().t < t - kSlack) {
    ThrowInvalid("track does not cover the half-second feature window");
  }
  for (std::size_t i = 1; i < track.size(); ++i) {
    const double dt = track[i].t - track[i - 1].t;
    if (!(dt > 0.0)) ThrowInvalid("track timestamps must increase");
    if (dt > 1.0 / 20.0 + kSlack) ThrowInvalid("track rate below 20 Hz");
  }

  FeatureWindow f;
  f.dist_to_crosswalk =
      crosswalk_position - internal::Interpolate(track, t).position;
  for (int j = 0; j < kHistorySamples; ++j) {
    const double tj =
        t - kHistoryWindow + kHistoryWindow * j / (kHistorySamples - 1);
    const TrackSample s = internal::Interpolate(track, tj);
    f.vel[j] = s.speed;
    f.acc[j] = s.accel;
  }
  return f;
}

// Per-component standardization applied before clustering.
struct FeatureScaler {
  FeatureVector mean{};
  FeatureVector scale{};

  FeatureVector Apply(const FeatureVector& v) const {
    FeatureVector out{};
    for (int d = 0; d < kFeatureDim; ++d) out[d] = (v[d] - mean[d]) / scale[d];
    return out;
  }

  static FeatureScaler Fit(std::span<const FeatureVector> data) {
    FeatureScaler s;
    s.scale.fill(1.0);
    if (data.empty()) return s;
    const double n = static_cast<double>(data.size());
    for (const auto& v : data) {
      for (int d = 0; d < kFeatureDim; ++d) s.mean[d] += v[d] / n;
    }
    FeatureVector var{};
    for (const auto& v : data) {
      for (int d = 0; d < kFeatureDim; ++d) {
        var[d] += (v[d] - s.mean[d]) * (v[d] - s.mean[d]) / n;
      }
    }
    for (int d = 0; d < kFeatureDim; ++d) {
      const double sd = std::sqrt(var[d]);
      s.scale[d] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
  }

  friend bool operator==(const FeatureScaler&, const FeatureScaler&) = default;
};

// The actionlet vocabulary: k centroids in standardized feature space.
struct ActionletModel {
  FeatureScaler scaler;
  std::vector<FeatureVector> centroids;

  int k() const { return static_cast<int>(centroids.size()); }

  void Validate() const {
    if (centroids.empty()) ThrowInvalid("actionlet model has no centroids");
    for (const auto& c : centroids) {
      for (double v : c) {
        if (!std::isfinite(v)) ThrowInvalid("non-finite centroid");
      }
    }
    for (double s : scaler.scale) {
      if (!(s > 0.0)) ThrowInvalid("feature scales must be positive");
    }
  }

  friend bool operator==(const ActionletModel&, const ActionletModel&) = default;
};

inline double SquaredDistance(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  for (int d = 0; d < kFeatureDim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}

namespace internal {

inline int NearestCentroid(const std::vector<FeatureVector>& centroids,
                           const FeatureVector& x, double* dist2 = nullptr) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(centroids.size()); ++c) {
    const double d = SquaredDistance(centroids[c], x);
    if (d < best_d) {  // strict: lowest index wins ties
      best_d = d;
      best = c;
    }
  }
  if (dist2) *dist2 = best_d;
  return best;
}

}  // namespace internal

// Nearest centroid in standardized space; ties go to the lowest index.
inline ActionId AssignActionlet(const ActionletModel& model,
                                const FeatureWindow& f) {
  model.Validate();
  return internal::NearestCentroid(model.centroids,
                                   model.scaler.Apply(f.ToVector()));
}

struct KMeansResult {
  ActionletModel model;
  std::vector<double> sse_history;  // after the seeding assignment, then per
                                    // Lloyd iteration
  int iterations = 0;
  bool converged = false;
};

// Lloyd's algorithm on standardized features with k-means++ seeding drawn
// from `seed`. An emptied cluster is re-seeded at the point farthest from
// its assigned centroid.
inline KMeansResult KMeansFit(std::span<const FeatureWindow> features, int k,
                              int max_iters, std::uint64_t seed) {
  if (k < 1) ThrowInvalid("k must be at least 1");
  if (features.size() < static_cast<std::size_t>(k)) {
    ThrowInvalid("k-means needs at least k = " + std::to_string(k) +
                 " points, got " + std::to_string(features.size()));
  }
  if (max_iters < 0) ThrowInvalid("max_iters must be non-negative");

  std::vector<FeatureVector> raw;
  raw.reserve(features.size());
  for (const auto& f : features) raw.push_back(f.ToVector());
  KMeansResult result;
  ActionletModel& model = result.model;
  model.scaler = FeatureScaler::Fit(raw);
  std::vector<FeatureVector> x;
  x.reserve(raw.size());
  for (const auto& v : raw) x.push_back(model.scaler.Apply(v));
  const std::size_t n = x.size();

  // k-means++ seeding.
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  model.centroids.push_back(x[pick(rng)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = SquaredDistance(x[i], model.centroids[0]);
  while (model.k() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t chosen = 0;
    if (total <= 0.0) {
      chosen = pick(rng);
    } else {
      double target = unit(rng) * total;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        target -= d2[i];
        if (target < 0.0) {
          chosen = i;
          break;
        }
      }
    }
    model.centroids.push_back(x[chosen]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(x[i], model.centroids.back()));
    }
  }

  std::vector<int> assign(n);
  std::vector<double> dist(n);
  auto assign_all = [&]() {
    double sse = 0.0;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = internal::NearestCentroid(model.centroids, x[i], &dist[i]);
      changed |= (c != assign[i]);
      assign[i] = c;
      sse += dist[i];
    }
    return std::pair{sse, changed};
  };
  std::fill(assign.begin(), assign.end(), -1);
  result.sse_history.push_back(assign_all().first);

  for (int it = 0; it < max_iters; ++it) {
    std::vector<FeatureVector> sums(k, FeatureVector{});
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assign[i]];
      for (int d = 0; d < kFeatureDim; ++d) sums[assign[i]][d] += x[i][d];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (int d = 0; d < kFeatureDim; ++d) {
        model.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = SquaredDistance(x[i], model.centroids[assign[i]]);
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      const auto far = std::max_element(dist.begin(), dist.end()) - dist.begin();
      model.centroids[c] = x[far];
      dist[far] = 0.0;
    }
    const auto [sse, changed] = assign_all();
    result.sse_history.push_back(sse);
    result.iterations = it + 1;
    if (!changed) {
      result.converged = true;
      break;
    }
  }
  return result;
}

inline double KMeansSse(const ActionletModel& model,
                        std::span<const FeatureWindow> features) {
  double sse = 0.0;
  for (const auto& f : features) {
    double d = 0.0;
    internal::NearestCentroid(model.centroids, model.scaler.Apply(f.ToVector()),
                              &d);
    sse += d;
  }
  return sse;
}

}  // namespace driversense

#endif  // DRIVERSENSE_ACTIONLETS_HPP_

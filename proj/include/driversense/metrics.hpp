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

#ifndef DRIVERSENSE_METRICS_HPP_
#define DRIVERSENSE_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "driversense/error.hpp"
#include "driversense/grid.hpp"

namespace driversense {

namespace internal {

// Exact L1 distance transform on a 4-connected grid (two raster passes).
// Returns -1 everywhere when there are no sources.
inline std::vector<long> ManhattanDistanceTransform(
    int width, int height, const std::vector<bool>& source) {
  constexpr long kFar = std::numeric_limits<long>::max() / 4;
  std::vector<long> d(source.size(), kFar);
  bool any = false;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (source[i]) {
      d[i] = 0;
      any = true;
    }
  }
  if (!any) return std::vector<long>(source.size(), -1);
  auto at = [&](int c, int r) -> long& { return d[static_cast<std::size_t>(r) * width + c]; };
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (c > 0) at(c, r) = std::min(at(c, r), at(c - 1, r) + 1);
      if (r > 0) at(c, r) = std::min(at(c, r), at(c, r - 1) + 1);
    }
  }
  for (int r = height - 1; r >= 0; --r) {
    for (int c = width - 1; c >= 0; --c) {
      if (c + 1 < width) at(c, r) = std::min(at(c, r), at(c + 1, r) + 1);
      if (r + 1 < height) at(c, r) = std::min(at(c, r), at(c, r + 1) + 1);
    }
  }
  return d;
}

inline bool InMask(std::span<const std::uint8_t> mask, std::size_t i) {
  return mask.empty() || mask[i] != 0;
}

}  // namespace internal

// Average, over cells of class c in A, of the Manhattan distance (in cell
// units) to the nearest class-c cell of B. Returns 0 when A has no class-c
// cells and charges the grid diameter (width + height) per cell when B has
// none. A non-empty `mask` restricts both maps to the selected cells.
inline double DirectedDistance(const BinaryMap& a, const BinaryMap& b, int c,
                               std::span<const std::uint8_t> mask = {}) {
  if (!(a.spec() == b.spec())) ThrowInvalid("map specs differ");
  if (c != 0 && c != 1) ThrowInvalid("class must be 0 or 1");
  if (!mask.empty() && mask.size() != a.size()) {
    ThrowInvalid("mask size does not match the maps");
  }
  const GridSpec& spec = a.spec();
  std::vector<bool> source(a.size(), false);
  for (std::size_t j = 0; j < b.size(); ++j) {
    source[j] = internal::InMask(mask, j) && b.at(j) == c;
  }
  const auto dist = internal::ManhattanDistanceTransform(
      spec.width_cells, spec.height_cells, source);
  const double diameter = spec.width_cells + spec.height_cells;

  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!internal::InMask(mask, i) || a.at(i) != c) continue;
    ++count;
    total += dist[i] < 0 ? diameter : static_cast<double>(dist[i]);
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

struct SimilarityTerms {
  double ab0 = 0.0;  // d(A, B, 0)
  double ab1 = 0.0;
  double ba0 = 0.0;
  double ba1 = 0.0;

  // Grouped per class so that swapping the maps gives the same bits.
  double psi() const { return (ab0 + ba0) + (ab1 + ba1); }
};

inline SimilarityTerms SimilarityBreakdown(
    const BinaryMap& a, const BinaryMap& b,
    std::span<const std::uint8_t> mask = {}) {
  return {DirectedDistance(a, b, 0, mask), DirectedDistance(a, b, 1, mask),
          DirectedDistance(b, a, 0, mask), DirectedDistance(b, a, 1, mask)};
}

// Image Similarity: psi(A, B) = sum over c of d(A, B, c) + d(B, A, c).
// Lower is more similar; symmetric; psi(A, A) = 0.
inline double ImageSimilarity(const BinaryMap& a, const BinaryMap& b,
                              std::span<const std::uint8_t> mask = {}) {
  return SimilarityBreakdown(a, b, mask).psi();
}

inline double PosteriorMassAtTruth(std::span<const double> posterior,
                                   std::size_t truth) {
  if (truth >= posterior.size()) ThrowInvalid("truth index outside the region");
  return posterior[truth];
}

// Relative gain of posterior mass over the prior mass.
inline double ImprovementRatio(double p_ours, double p_prior) {
  if (!(p_prior > 0.0)) ThrowInvalid("prior mass must be positive");
  return (p_ours - p_prior) / p_prior;
}

struct SummaryStats {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n)
  std::size_t count = 0;
};

inline SummaryStats Summarize(std::span<const double> values) {
  SummaryStats s;
  s.count = values.size();
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    s.std_error = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return s;
}

}  // namespace driversense

#endif  // DRIVERSENSE_METRICS_HPP_

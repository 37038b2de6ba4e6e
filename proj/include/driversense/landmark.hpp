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

#ifndef DRIVERSENSE_LANDMARK_HPP_
#define DRIVERSENSE_LANDMARK_HPP_

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driversense/error.hpp"
#include "driversense/geometry.hpp"

namespace driversense {

// Semantic description of the observed driver's velocity profile. Exactly
// one applies to every observation.
enum class SemanticAction {
  kMovingFast = 0,
  kMovingSlow = 1,
  kAccelerating = 2,
  kDecelerating = 3,
  kStopped = 4,
};

inline constexpr int kNumSemanticActions = 5;

inline constexpr std::array<SemanticAction, kNumSemanticActions>
    kAllSemanticActions = {SemanticAction::kMovingFast,
                           SemanticAction::kMovingSlow,
                           SemanticAction::kAccelerating,
                           SemanticAction::kDecelerating,
                           SemanticAction::kStopped};

inline std::string ToString(SemanticAction a) {
  switch (a) {
    case SemanticAction::kMovingFast: return "MovingFast";
    case SemanticAction::kMovingSlow: return "MovingSlow";
    case SemanticAction::kAccelerating: return "Accelerating";
    case SemanticAction::kDecelerating: return "Decelerating";
    case SemanticAction::kStopped: return "Stopped";
  }
  return "?";
}

// Accepts "MovingFast", "moving_fast", "moving fast", "Moving-Fast", ...
inline std::optional<SemanticAction> ParseSemanticAction(const std::string& s) {
  std::string key;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  for (auto a : kAllSemanticActions) {
    std::string name;
    for (char c : ToString(a)) {
      name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (key == name) return a;
  }
  return std::nullopt;
}

struct LandmarkState {
  Vec2 xi;  // ground-plane position, +x right and +y forward of the camera
};

inline constexpr int kLogitFeatureDim = 4;
using LogitFeatures = std::array<double, kLogitFeatureDim>;
using LogitWeights =
    std::array<std::array<double, kLogitFeatureDim>, kNumSemanticActions>;

// phi(xi) = [1, x, y, |xi|]
inline LogitFeatures LogitFeatureMap(const LandmarkState& s) {
  return {1.0, s.xi.x, s.xi.y, Norm(s.xi)};
}

inline constexpr const char* kLogitFeatureMapId = "bias_x_y_range";

struct ActionThresholds {
  double fast_speed = 4.0;     // m/s, MovingFast at or above
  double stopped_speed = 0.2;  // m/s, Stopped below
  double accel = 0.5;          // m/s^2, Accelerating above / Decelerating below -accel
};

struct LogitModel {
  LogitWeights weights{};  // one row per action, over LogitFeatureMap
  double regularization = 0.0;
  ActionThresholds thresholds;

  void Validate() const {
    for (const auto& row : weights) {
      for (double w : row) {
        if (!std::isfinite(w)) ThrowInvalid("non-finite logit weight");
      }
    }
  }
};

inline std::array<double, kNumSemanticActions> Softmax(
    const std::array<double, kNumSemanticActions>& scores) {
  const double top = *std::max_element(scores.begin(), scores.end());
  std::array<double, kNumSemanticActions> p{};
  double sum = 0.0;
  for (int a = 0; a < kNumSemanticActions; ++a) {
    p[a] = std::exp(scores[a] - top);
    sum += p[a];
  }
  for (double& v : p) v /= sum;
  return p;
}

// Driver model p(a | xi): softmax of the per-action linear scores.
inline std::array<double, kNumSemanticActions> ActionProbability(
    const LogitModel& model, const LandmarkState& xi) {
  const LogitFeatures phi = LogitFeatureMap(xi);
  std::array<double, kNumSemanticActions> scores{};
  for (int a = 0; a < kNumSemanticActions; ++a) {
    for (int d = 0; d < kLogitFeatureDim; ++d) {
      scores[a] += model.weights[a][d] * phi[d];
    }
  }
  return Softmax(scores);
}

struct LogitSample {
  LandmarkState xi;
  SemanticAction action = SemanticAction::kMovingFast;
};

// Regularized mean log-likelihood of the multinomial logit over standardized
// features z = [1, (x - mx)/sx, (y - my)/sy, (r - mr)/sr]:
//   J(W) = (1/N) sum_n log softmax(W z_n)[a_n] - (reg / 2) |W|^2.
class LogitObjective {
 public:
  LogitObjective(std::span<const LogitSample> samples, double reg)
      : reg_(reg) {
    if (samples.empty()) ThrowInvalid("logit fit needs samples");
    if (!(reg >= 0.0)) ThrowInvalid("regularization must be non-negative");
    const double n = static_cast<double>(samples.size());
    mean_.fill(0.0);
    scale_.fill(1.0);
    for (const auto& s : samples) {
      const auto phi = LogitFeatureMap(s.xi);
      for (int d = 1; d < kLogitFeatureDim; ++d) mean_[d] += phi[d] / n;
    }
    LogitFeatures var{};
    for (const auto& s : samples) {
      const auto phi = LogitFeatureMap(s.xi);
      for (int d = 1; d < kLogitFeatureDim; ++d) {
        var[d] += (phi[d] - mean_[d]) * (phi[d] - mean_[d]) / n;
      }
    }
    for (int d = 1; d < kLogitFeatureDim; ++d) {
      scale_[d] = var[d] > 1e-24 ? std::sqrt(var[d]) : 1.0;
    }
    for (const auto& s : samples) {
      z_.push_back(Standardize(LogitFeatureMap(s.xi)));
      labels_.push_back(static_cast<int>(s.action));
    }
  }

  LogitFeatures Standardize(const LogitFeatures& phi) const {
    LogitFeatures z{};
    z[0] = 1.0;
    for (int d = 1; d < kLogitFeatureDim; ++d) {
      z[d] = (phi[d] - mean_[d]) / scale_[d];
    }
    return z;
  }

  double Value(const LogitWeights& w) const {
    double ll = 0.0;
    for (std::size_t n = 0; n < z_.size(); ++n) {
      const auto scores = Scores(w, z_[n]);
      const double top = *std::max_element(scores.begin(), scores.end());
      double lse = 0.0;
      for (double s : scores) lse += std::exp(s - top);
      ll += scores[labels_[n]] - top - std::log(lse);
    }
    return ll / static_cast<double>(z_.size()) - 0.5 * reg_ * SquaredNorm(w);
  }

  LogitWeights Gradient(const LogitWeights& w) const {
    LogitWeights g{};
    const double inv_n = 1.0 / static_cast<double>(z_.size());
    for (std::size_t n = 0; n < z_.size(); ++n) {
      const auto p = Softmax(Scores(w, z_[n]));
      for (int a = 0; a < kNumSemanticActions; ++a) {
        const double r = ((a == labels_[n]) ? 1.0 : 0.0) - p[a];
        for (int d = 0; d < kLogitFeatureDim; ++d) {
          g[a][d] += r * z_[n][d] * inv_n;
        }
      }
    }
    for (int a = 0; a < kNumSemanticActions; ++a) {
      for (int d = 0; d < kLogitFeatureDim; ++d) g[a][d] -= reg_ * w[a][d];
    }
    return g;
  }

  // Weights over the raw feature map that give the same scores as `w` over
  // the standardized features.
  LogitWeights ToRawWeights(const LogitWeights& w) const {
    LogitWeights raw{};
    for (int a = 0; a < kNumSemanticActions; ++a) {
      raw[a][0] = w[a][0];
      for (int d = 1; d < kLogitFeatureDim; ++d) {
        raw[a][d] = w[a][d] / scale_[d];
        raw[a][0] -= w[a][d] * mean_[d] / scale_[d];
      }
    }
    return raw;
  }

  const LogitFeatures& mean() const { return mean_; }
  const LogitFeatures& scale() const { return scale_; }
  std::size_t num_samples() const { return z_.size(); }

  static double SquaredNorm(const LogitWeights& w) {
    double s = 0.0;
    for (const auto& row : w) {
      for (double v : row) s += v * v;
    }
    return s;
  }

 private:
  static std::array<double, kNumSemanticActions> Scores(
      const LogitWeights& w, const LogitFeatures& z) {
    std::array<double, kNumSemanticActions> s{};
    for (int a = 0; a < kNumSemanticActions; ++a) {
      for (int d = 0; d < kLogitFeatureDim; ++d) s[a] += w[a][d] * z[d];
    }
    return s;
  }

  double reg_;
  LogitFeatures mean_{};
  LogitFeatures scale_{};
  std::vector<LogitFeatures> z_;
  std::vector<int> labels_;
};

struct LogitFitOptions {
  double regularization = 1e-3;
  int max_iters = 500;
  double tol = 1e-10;
  ActionThresholds thresholds;
};

struct LogitFitResult {
  LogitModel model;
  std::vector<double> objective_history;  // J at start and after each step
  int iterations = 0;
  bool converged = false;
};

// Maximum-likelihood fit by gradient ascent with Armijo backtracking,
// starting from zero weights. Stops when one step gains less than `tol`.
inline LogitFitResult FitLogit(std::span<const LogitSample> samples,
                               const LogitFitOptions& options = {}) {
  if (samples.empty()) ThrowInvalid("logit fit needs samples");
  if (!(options.regularization >= 0.0)) {
    ThrowInvalid("regularization must be non-negative");
  }
  if (options.regularization == 0.0) {
    const auto first = samples.front().action;
    const bool single = std::all_of(samples.begin(), samples.end(),
                                    [&](const LogitSample& s) { return s.action == first; });
    if (single) {
      ThrowInvalid("single-action data diverges without regularization; "
                   "use reg > 0");
    }
  }

  const LogitObjective objective(samples, options.regularization);
  LogitWeights w{};
  double value = objective.Value(w);
  LogitFitResult result;
  result.objective_history.push_back(value);

  double step = 1.0;
  for (int it = 0; it < options.max_iters; ++it) {
    const LogitWeights g = objective.Gradient(w);
    const double g2 = LogitObjective::SquaredNorm(g);
    if (g2 == 0.0) {
      result.converged = true;
      break;
    }
    step = std::min(step * 2.0, 1e6);
    LogitWeights candidate{};
    double candidate_value = value;
    bool accepted = false;
    while (step > 1e-14) {
      for (int a = 0; a < kNumSemanticActions; ++a) {
        for (int d = 0; d < kLogitFeatureDim; ++d) {
          candidate[a][d] = w[a][d] + step * g[a][d];
        }
      }
      candidate_value = objective.Value(candidate);
      if (candidate_value >= value + 1e-4 * step * g2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.converged = true;
      break;
    }
    const double gain = candidate_value - value;
    w = candidate;
    value = candidate_value;
    result.objective_history.push_back(value);
    result.iterations = it + 1;
    if (gain < options.tol) {
      result.converged = true;
      break;
    }
  }

  result.model.weights = objective.ToRawWeights(w);
  result.model.regularization = options.regularization;
  result.model.thresholds = options.thresholds;
  return result;
}

struct OccludedRegion {
  std::vector<Vec2> candidates;  // uniform prior mass 1/N each

  std::size_t size() const { return candidates.size(); }
};

// Posterior over candidate pedestrian positions given one observed action,
// starting from the uniform prior over the region.
inline std::vector<double> PosteriorOverRegion(const LogitModel& model,
                                               const OccludedRegion& region,
                                               SemanticAction observed) {
  if (region.candidates.empty()) ThrowInvalid("occluded region is empty");
  std::vector<double> post(region.size());
  double total = 0.0;
  for (std::size_t j = 0; j < region.size(); ++j) {
    post[j] = ActionProbability(model, {region.candidates[j]})
        [static_cast<int>(observed)];
    total += post[j];
  }
  if (!(total > 0.0)) ThrowInvariant("all candidate likelihoods are zero");
  for (double& p : post) p /= total;
  return post;
}

struct VelocityProfile {
  std::vector<double> times;   // seconds, increasing
  std::vector<double> speeds;  // m/s
};

// Maps the last `window` seconds of a speed profile to a semantic action.
// Priority: Stopped, then Accelerating/Decelerating, then Fast/Slow.
inline SemanticAction ClassifyAction(const VelocityProfile& profile,
                                     double window,
                                     const ActionThresholds& th = {}) {
  if (profile.times.empty() || profile.times.size() != profile.speeds.size()) {
    ThrowInvalid("velocity profile is empty or inconsistent");
  }
  if (window < 0.5) ThrowInvalid("classification window must be >= 0.5 s");
  const double t_end = profile.times.back();
  const double t_start = t_end - window;
  // A half-sample tolerance accepts profiles that end exactly on the window.
  const double dt = profile.times.size() > 1
                        ? (t_end - profile.times.front()) /
                              static_cast<double>(profile.times.size() - 1)
                        : 0.0;
  if (profile.times.front() > t_start + 0.5 * dt + 1e-9) {
    ThrowInvalid("velocity profile shorter than the classification window");
  }
  std::size_t first = 0;
  while (profile.times[first] < t_start - 1e-9) ++first;
  double mean_speed = 0.0;
  for (std::size_t i = first; i < profile.speeds.size(); ++i) {
    mean_speed += profile.speeds[i];
  }
  mean_speed /= static_cast<double>(profile.speeds.size() - first);
  const double span = t_end - profile.times[first];
  const double mean_accel =
      span > 0.0 ? (profile.speeds.back() - profile.speeds[first]) / span : 0.0;

  if (mean_speed < th.stopped_speed) return SemanticAction::kStopped;
  if (mean_accel > th.accel) return SemanticAction::kAccelerating;
  if (mean_accel < -th.accel) return SemanticAction::kDecelerating;
  return mean_speed >= th.fast_speed ? SemanticAction::kMovingFast
                                     : SemanticAction::kMovingSlow;
}

struct BoundingBox {
  double x = 0.0;  // left, pixels
  double y = 0.0;  // top, pixels
  double w = 0.0;
  double h = 0.0;
};

struct CameraModel {
  double fx = 1000.0;
  double fy = 1000.0;
  double cx = 960.0;
  double cy = 540.0;
  double height_m = 1.2;  // optical center above the ground plane
};

struct LandmarkEstimate {
  LandmarkState mean;
  std::array<double, 4> covariance{};  // row-major 2x2
};

// Flat-ground back-projection of the box's bottom-center pixel for a level
// pinhole camera. The standard deviation grows linearly with depth, so the
// covariance grows quadratically.
inline LandmarkEstimate BboxToLandmark(const BoundingBox& box,
                                       const CameraModel& cam,
                                       double relative_sigma = 0.05) {
  if (!(cam.fx > 0.0 && cam.fy > 0.0)) ThrowInvalid("focal length must be positive");
  if (!(cam.height_m > 0.0)) ThrowInvalid("camera height must be positive");
  const double u = box.x + 0.5 * box.w;
  const double v = box.y + box.h;
  const double below_horizon = v - cam.cy;
  if (!(below_horizon > 0.0)) {
    ThrowInvalid("bounding box bottom is not below the horizon");
  }
  const double depth = cam.fy * cam.height_m / below_horizon;
  const double lateral = (u - cam.cx) * depth / cam.fx;
  const double sigma = relative_sigma * depth;
  LandmarkEstimate est;
  est.mean.xi = {lateral, depth};
  est.covariance = {sigma * sigma, 0.0, 0.0, sigma * sigma};
  return est;
}

}  // namespace driversense

#endif  // DRIVERSENSE_LANDMARK_HPP_

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

#ifndef DRIVERSENSE_LIKELIHOOD_TABLE_HPP_
#define DRIVERSENSE_LIKELIHOOD_TABLE_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "driversense/error.hpp"
#include "driversense/grid.hpp"

namespace driversense {

using ActionId = int;

// Empirical driver model p(action | m_i = c) for every cell i and occupancy
// state c. Entries are laid out as [(cell * 2 + c) * num_actions + action].
class LikelihoodTable {
 public:
  LikelihoodTable(GridSpec spec, int num_actions, std::vector<double> entries,
                  std::vector<std::uint64_t> sample_counts)
      : spec_(spec),
        num_actions_(num_actions),
        entries_(std::move(entries)),
        sample_counts_(std::move(sample_counts)) {
    spec_.Validate();
    if (num_actions_ < 1) ThrowInvalid("likelihood table needs >= 1 action");
    if (entries_.size() != spec_.size() * 2 * num_actions_) {
      ThrowInvalid("likelihood table entry count does not match spec");
    }
    if (sample_counts_.size() != spec_.size() * 2) {
      ThrowInvalid("likelihood table count array does not match spec");
    }
    for (std::size_t cell = 0; cell < spec_.size(); ++cell) {
      for (int c = 0; c < 2; ++c) {
        double sum = 0.0;
        for (double p : Distribution(cell, c)) {
          if (!(p >= 0.0 && p <= 1.0)) {
            ThrowInvalid("likelihood entries must lie in [0, 1]");
          }
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
          ThrowInvalid("likelihoods for cell " + std::to_string(cell) +
                       " do not sum to one");
        }
      }
    }
  }

  const GridSpec& spec() const { return spec_; }
  int num_actions() const { return num_actions_; }
  std::span<const double> entries() const { return entries_; }
  std::span<const std::uint64_t> sample_counts() const {
    return sample_counts_;
  }

  std::uint64_t SampleCount(std::size_t cell, int occupied) const {
    CheckCell(cell, occupied);
    return sample_counts_[cell * 2 + occupied];
  }

  std::span<const double> Distribution(std::size_t cell, int occupied) const {
    CheckCell(cell, occupied);
    return std::span<const double>(entries_).subspan(
        (cell * 2 + occupied) * num_actions_, num_actions_);
  }

  friend bool operator==(const LikelihoodTable&,
                         const LikelihoodTable&) = default;

 private:
  void CheckCell(std::size_t cell, int occupied) const {
    if (cell >= spec_.size() || (occupied != 0 && occupied != 1)) {
      ThrowInvalid("likelihood lookup out of range");
    }
  }

  GridSpec spec_;
  int num_actions_;
  std::vector<double> entries_;
  std::vector<std::uint64_t> sample_counts_;
};

inline double ActionLikelihood(const LikelihoodTable& table, std::size_t cell,
                               int occupied, ActionId action) {
  if (action < 0 || action >= table.num_actions()) {
    ThrowInvalid("action id " + std::to_string(action) + " out of range");
  }
  return table.Distribution(cell, occupied)[action];
}

struct LabeledMap {
  ActionId action;
  BinaryMap truth;
};

// Laplace-smoothed empirical likelihoods:
//   p(a | m_i = c) = (count(a, i, c) + alpha) / (count(i, c) + alpha * k).
// With alpha = 0 every (cell, state) pair must have been observed.
inline LikelihoodTable EstimateLikelihoods(std::span<const LabeledMap> labeled,
                                           const GridSpec& spec,
                                           int num_actions,
                                           double alpha = 1.0) {
  spec.Validate();
  if (labeled.empty()) ThrowInvalid("cannot estimate likelihoods from no data");
  if (num_actions < 1) ThrowInvalid("need at least one action");
  if (!(alpha >= 0.0)) ThrowInvalid("smoothing must be non-negative");

  const std::size_t n = spec.size();
  std::vector<std::uint64_t> action_counts(n * 2 * num_actions, 0);
  std::vector<std::uint64_t> totals(n * 2, 0);
  for (const auto& sample : labeled) {
    if (!(sample.truth.spec() == spec)) {
      ThrowInvalid("labeled map spec differs from the table spec");
    }
    if (sample.action < 0 || sample.action >= num_actions) {
      ThrowInvalid("labeled action id out of range");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int c = sample.truth.at(i);
      ++action_counts[(i * 2 + c) * num_actions + sample.action];
      ++totals[i * 2 + c];
    }
  }

  std::vector<double> entries(action_counts.size());
  for (std::size_t slot = 0; slot < totals.size(); ++slot) {
    const double denom = static_cast<double>(totals[slot]) + alpha * num_actions;
    if (denom <= 0.0) {
      ThrowInvalid("unsmoothed likelihoods need an observation for every "
                   "(cell, state) pair");
    }
    for (int a = 0; a < num_actions; ++a) {
      const std::size_t k = slot * num_actions + a;
      entries[k] = (static_cast<double>(action_counts[k]) + alpha) / denom;
    }
  }
  return LikelihoodTable(spec, num_actions, std::move(entries),
                         std::move(totals));
}

}  // namespace driversense

#endif  // DRIVERSENSE_LIKELIHOOD_TABLE_HPP_

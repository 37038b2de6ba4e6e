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

#ifndef DRIVERSENSE_FUSION_HPP_
#define DRIVERSENSE_FUSION_HPP_

#include <vector>

#include "driversense/grid.hpp"
#include "driversense/likelihood_table.hpp"

namespace driversense {

// Fuses one observed driver action into every cell independently:
//   p(m_i | x, z, a) = p(a | m_i) p(m_i | x, z) / p(a).
// The same observation is applied to all cells, as the per-cell driver model
// prescribes; evidence is therefore not discounted for being shared.
inline OccupancyGrid FuseAction(const OccupancyGrid& grid,
                                const LikelihoodTable& table,
                                ActionId action) {
  if (!(grid.spec() == table.spec())) {
    ThrowInvalid("grid and likelihood table specs differ");
  }
  std::vector<double> posterior(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    posterior[i] = BayesCellUpdate(grid.at(i),
                                   ActionLikelihood(table, i, 1, action),
                                   ActionLikelihood(table, i, 0, action));
  }
  return OccupancyGrid(grid.spec(), std::move(posterior));
}

}  // namespace driversense

#endif  // DRIVERSENSE_FUSION_HPP_

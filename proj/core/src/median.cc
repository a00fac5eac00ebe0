//
// Copyright 2026 The uldp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "uldp/median.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uldp/errors.hpp"
#include "uldp/truncate.hpp"

namespace uldp {

UserSamples GroupByUser(std::span<const StreamEvent> history) {
  UserSamples out;
  for (const StreamEvent& e : history) out[e.user].push_back(e.value);
  return out;
}

double CappedContribution(const UserSamples& samples, std::uint64_t cap) {
  double sum = 0.0;
  for (const auto& [user, values] : samples) {
    sum += static_cast<double>(std::min<std::uint64_t>(values.size(), cap));
  }
  return sum;
}

BinGrid MakeBinGrid(int level) {
  if (level < 1) throw InvalidArgument("bin grid level must be >= 1");
  BinGrid grid;
  grid.width = 2.0 * std::pow(2.0, -level / 2.0);
  double lo = 0.0;
  while (1.0 - lo > 1e-12) {
    const double hi = std::min(lo + grid.width, 1.0);
    grid.lower.push_back(lo);
    grid.upper.push_back(hi);
    grid.midpoints.push_back((lo + hi) / 2.0);
    lo = hi;
  }
  return grid;
}

double Quantize(const BinGrid& grid, double y) {
  double best = grid.midpoints.front();
  double best_distance = std::fabs(y - best);
  for (double mid : grid.midpoints) {
    const double d = std::fabs(y - mid);
    // Midpoints ascend, so strict < keeps the smaller one on ties.
    if (d < best_distance) {
      best = mid;
      best_distance = d;
    }
  }
  return best;
}

std::vector<double> QuantileCosts(const BinGrid& grid,
                                  std::span<const double> quantized) {
  std::vector<double> costs;
  costs.reserve(grid.midpoints.size());
  for (double y : grid.midpoints) {
    std::uint64_t below = 0;
    std::uint64_t above = 0;
    for (double q : quantized) {
      if (q < y) ++below;
      if (q > y) ++above;
    }
    costs.push_back(static_cast<double>(std::max(below, above)));
  }
  return costs;
}

std::vector<std::vector<double>> PackArrays(const UserSamples& samples,
                                            int level, std::uint64_t k) {
  if (level < 1) throw InvalidArgument("packing level must be >= 1");
  if (k == 0) throw InvalidArgument("packing needs at least one array");
  const std::uint64_t array_size = std::uint64_t{1} << (level - 1);
  std::vector<std::vector<double>> arrays(1);
  arrays.back().reserve(array_size);
  for (const auto& [user, values] : samples) {
    const std::uint64_t r = std::min<std::uint64_t>(values.size(), array_size);
    for (std::uint64_t i = 0; i < r; ++i) {
      arrays.back().push_back(values[i]);
      if (arrays.back().size() == array_size) {
        if (arrays.size() == k) return arrays;
        arrays.emplace_back().reserve(array_size);
      }
    }
  }
  throw InsufficientDiversity(
      "not enough distinct-user samples to fill " + std::to_string(k) +
      " arrays of size " + std::to_string(array_size));
}

std::vector<std::vector<double>> PackArrays(const MedianRequest& request) {
  return PackArrays(GroupByUser(request.history), request.level,
                    ArrayCountInt(request.eps, request.level, request.beta));
}

double PrivateMedian(const UserSamples& samples, double eps, int level,
                     double beta, Rng& rng) {
  const std::uint64_t k = ArrayCountInt(eps, level, beta);
  const auto arrays = PackArrays(samples, level, k);
  const BinGrid grid = MakeBinGrid(level);
  std::vector<double> quantized;
  quantized.reserve(arrays.size());
  for (const auto& array : arrays) {
    double sum = 0.0;
    for (double x : array) sum += x;
    quantized.push_back(Quantize(grid, sum / static_cast<double>(array.size())));
  }
  const std::vector<double> costs = QuantileCosts(grid, quantized);
  return grid.midpoints[SampleExponentialMechanismIndex(costs, eps, rng)];
}

double PrivateMedian(const MedianRequest& request, Rng& rng) {
  return PrivateMedian(GroupByUser(request.history), request.eps,
                       request.level, request.beta, rng);
}

}  // namespace uldp

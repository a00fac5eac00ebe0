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

#ifndef ULDP_MEDIAN_HPP_
#define ULDP_MEDIAN_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "uldp/noise.hpp"
#include "uldp/streams.hpp"

namespace uldp {

// Per-user samples in arrival order, keyed by ascending user id.
using UserSamples = std::map<UserId, std::vector<double>>;

UserSamples GroupByUser(std::span<const StreamEvent> history);

// Sum over users of min(count, cap).
double CappedContribution(const UserSamples& samples, std::uint64_t cap);

struct MedianRequest {
  std::span<const StreamEvent> history;
  double eps = 1.0;
  int level = 1;
  double beta = 0.1;
};

// Partition of [0, 1] into bins of width 2 * 2^(-l/2); the last bin may be
// shorter and its midpoint is that of the short interval.
struct BinGrid {
  double width = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> midpoints;
};

BinGrid MakeBinGrid(int level);

// Nearest midpoint; a point equidistant from two midpoints goes to the
// smaller one.
double Quantize(const BinGrid& grid, double y);

// cost(y) = max(#{j : q_j < y}, #{j : q_j > y}) for every midpoint y.
std::vector<double> QuantileCosts(const BinGrid& grid,
                                  std::span<const double> quantized);

// Fills k arrays of 2^(l-1) samples each: users in ascending id order, each
// contributing its earliest min(count, 2^(l-1)) samples contiguously.
// Throws InsufficientDiversity if the samples run out before array k fills.
std::vector<std::vector<double>> PackArrays(const UserSamples& samples,
                                            int level, std::uint64_t k);
std::vector<std::vector<double>> PackArrays(const MedianRequest& request);

// User-level eps-DP coarse mean: pack, average, quantize the array means,
// then pick a bin midpoint with the exponential mechanism over the quantile
// cost. Throws InsufficientDiversity when
// sum_u min(m_u, 2^(l-1)) < 2^(l-1) * k.
double PrivateMedian(const MedianRequest& request, Rng& rng);
double PrivateMedian(const UserSamples& samples, double eps, int level,
                     double beta, Rng& rng);

}  // namespace uldp

#endif  // ULDP_MEDIAN_HPP_

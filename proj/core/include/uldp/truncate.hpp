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

#ifndef ULDP_TRUNCATE_HPP_
#define ULDP_TRUNCATE_HPP_

#include <cstdint>

namespace uldp {

// Projection target for a dyadic block sum at level l. [lo, hi] is
// [center - half_width, center + half_width], optionally intersected with the
// range a block sum can actually take.
struct TruncationInterval {
  int level = 0;
  double center = 0.0;
  double half_width = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

TruncationInterval MakeInterval(int level, double center, double half_width);

// Intersects with [range_lo, range_hi]. If the two do not overlap the result
// collapses onto the nearest endpoint of the range.
TruncationInterval BoundToRange(const TruncationInterval& interval,
                                double range_lo, double range_hi);

// Clamp into [lo, hi].
double Project(const TruncationInterval& interval, double s);

// Half-width for a sum of all m samples of one user with a prior accurate to
// 1/sqrt(m): sqrt((m/2) ln(2n/delta)) + sqrt(m).
double HalfWidthWishful(std::uint64_t m, std::uint64_t n, double delta);
TruncationInterval IntervalWishful(double prior, std::uint64_t m,
                                   std::uint64_t n, double delta);

// Level-l half-width with a shared prior:
// sqrt((2^(l-1)/2) ln(2n log2(m)/delta)) + 2^(l-1)/sqrt(m), for l >= 1, m >= 2.
double HalfWidthSingle(int level, std::uint64_t m, std::uint64_t n,
                       double delta);
TruncationInterval IntervalSingle(double prior, int level, std::uint64_t m,
                                  std::uint64_t n, double delta);

// Number of arrays the private median needs: (16/eps) ln(2^(l/2)/beta).
double ArrayCount(double eps, int level, double beta);
// Integer array count used when actually packing: the ceiling of
// ArrayCount, at least 1. A 1e-9 tolerance keeps exact integers exact.
std::uint64_t ArrayCountInt(double eps, int level, double beta);

// Level-l half-width when the prior for level l comes from the private
// median at budget eps/2L and failure probability delta/3L, L = ceil(log2 m):
// sqrt((2^(l-1)/2) ln(2n log2(m)/(delta/3)))
//   + sqrt(2^l ln(2 k(eps/2L, l, delta/3L) / (delta/3L))).
// Requires l >= 2, eps > 0.
double HalfWidthFull(int level, std::uint64_t n, std::uint64_t m, double eps,
                     double delta);
TruncationInterval IntervalFull(double prior, int level, std::uint64_t n,
                                std::uint64_t m, double eps, double delta);

// ceil(log2 m); 0 for m == 1.
int CeilLog2(std::uint64_t m);

}  // namespace uldp

#endif  // ULDP_TRUNCATE_HPP_

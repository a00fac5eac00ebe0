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

#include "uldp/truncate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "uldp/errors.hpp"

namespace uldp {
namespace {

void CheckDelta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw InvalidArgument("delta must lie in (0, 1], got " +
                          std::to_string(delta));
  }
}

void CheckUsers(std::uint64_t n) {
  if (n < 1) throw InvalidArgument("n must be at least 1");
}

double LevelBlockSize(int level) { return std::ldexp(1.0, level - 1); }

}  // namespace

int CeilLog2(std::uint64_t m) {
  if (m == 0) throw InvalidArgument("CeilLog2: m must be positive");
  return m == 1 ? 0 : 64 - std::countl_zero(m - 1);
}

TruncationInterval MakeInterval(int level, double center, double half_width) {
  if (!(half_width >= 0.0)) {
    throw InvalidArgument("truncation half-width must be nonnegative");
  }
  return {level, center, half_width, center - half_width, center + half_width};
}

TruncationInterval BoundToRange(const TruncationInterval& interval,
                                double range_lo, double range_hi) {
  TruncationInterval out = interval;
  out.lo = std::max(interval.lo, range_lo);
  out.hi = std::min(interval.hi, range_hi);
  if (out.lo > out.hi) {
    const double edge = interval.hi < range_lo ? range_lo : range_hi;
    out.lo = out.hi = edge;
  }
  return out;
}

double Project(const TruncationInterval& interval, double s) {
  return std::clamp(s, interval.lo, interval.hi);
}

double HalfWidthWishful(std::uint64_t m, std::uint64_t n, double delta) {
  CheckDelta(delta);
  CheckUsers(n);
  if (m < 1) throw InvalidArgument("m must be at least 1");
  const double md = static_cast<double>(m);
  return std::sqrt(md / 2.0 * std::log(2.0 * static_cast<double>(n) / delta)) +
         std::sqrt(md);
}

TruncationInterval IntervalWishful(double prior, std::uint64_t m,
                                   std::uint64_t n, double delta) {
  return MakeInterval(0, static_cast<double>(m) * prior,
                      HalfWidthWishful(m, n, delta));
}

double HalfWidthSingle(int level, std::uint64_t m, std::uint64_t n,
                       double delta) {
  CheckDelta(delta);
  CheckUsers(n);
  if (m < 2) throw InvalidArgument("single-prior intervals need m >= 2");
  if (level < 1) throw InvalidArgument("truncation level must be >= 1");
  const double block = LevelBlockSize(level);
  const double log_m = std::log2(static_cast<double>(m));
  return std::sqrt(block / 2.0 *
                   std::log(2.0 * static_cast<double>(n) * log_m / delta)) +
         block / std::sqrt(static_cast<double>(m));
}

TruncationInterval IntervalSingle(double prior, int level, std::uint64_t m,
                                  std::uint64_t n, double delta) {
  return MakeInterval(level, LevelBlockSize(level) * prior,
                      HalfWidthSingle(level, m, n, delta));
}

double ArrayCount(double eps, int level, double beta) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw InvalidArgument("beta must lie in (0, 1]");
  }
  return 16.0 / eps * std::log(std::pow(2.0, level / 2.0) / beta);
}

std::uint64_t ArrayCountInt(double eps, int level, double beta) {
  const double k = ArrayCount(eps, level, beta);
  const double rounded = std::ceil(k - 1e-9);
  return rounded < 1.0 ? 1 : static_cast<std::uint64_t>(rounded);
}

double HalfWidthFull(int level, std::uint64_t n, std::uint64_t m, double eps,
                     double delta) {
  CheckDelta(delta);
  CheckUsers(n);
  if (level < 2) throw InvalidArgument("full-estimator intervals need l >= 2");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (m < 2) throw InvalidArgument("full-estimator intervals need m >= 2");
  const int big_l = CeilLog2(m);
  const double block = LevelBlockSize(level);
  const double log_m = std::log2(static_cast<double>(m));
  const double beta = delta / (3.0 * big_l);
  const double k = ArrayCount(eps / (2.0 * big_l), level, beta);
  const double concentration = std::sqrt(
      block / 2.0 *
      std::log(2.0 * static_cast<double>(n) * log_m / (delta / 3.0)));
  const double prior_error =
      std::sqrt(std::ldexp(1.0, level) * std::log(2.0 * k / beta));
  return concentration + prior_error;
}

TruncationInterval IntervalFull(double prior, int level, std::uint64_t n,
                                std::uint64_t m, double eps, double delta) {
  return MakeInterval(level, LevelBlockSize(level) * prior,
                      HalfWidthFull(level, n, m, eps, delta));
}

}  // namespace uldp

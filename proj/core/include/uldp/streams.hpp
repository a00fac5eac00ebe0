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

#ifndef ULDP_STREAMS_HPP_
#define ULDP_STREAMS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "uldp/withhold.hpp"

namespace uldp {

// One arrival: at time t (1-based) user `user` contributes `value` in [0, 1].
struct StreamEvent {
  std::uint64_t t = 0;
  UserId user = 0;
  double value = 0.0;

  bool operator==(const StreamEvent&) const = default;
};

using Stream = std::vector<StreamEvent>;

enum class OrderingKind {
  kContiguous,
  kRoundRobin,
  kUniformRandom,
  kSingleUserPrefix,
  kFromFile,
};

struct OrderingSpec {
  OrderingKind kind = OrderingKind::kRoundRobin;
  // kSingleUserPrefix: user 1 contributes this many samples first (0 means m),
  // then the remaining arrivals go round-robin over users with capacity left.
  std::uint64_t prefix_length = 0;
  // kFromFile: a stream CSV whose user column supplies the ordering.
  std::filesystem::path path;
};

OrderingKind ParseOrderingKind(const std::string& name);
std::string OrderingKindName(OrderingKind kind);

// T events with i.i.d. Bernoulli(mu) values and users 1..n arranged by
// `ordering`, each user contributing at most m samples. Deterministic in seed.
// Throws InfeasibleOrdering when T > n*m (or the file ordering breaks the
// caps) and InvalidArgument for mu outside [0, 1].
Stream Generate(double mu, std::uint64_t n, std::uint64_t m, std::uint64_t T,
                const OrderingSpec& ordering, std::uint64_t seed);

// Header-bearing CSV "t,user,value", values printed as the shortest decimal
// that round-trips. Reading validates every row and reports the offending
// line number in a ParseError.
void WriteStream(const Stream& events, std::ostream& out);
void WriteStream(const Stream& events, const std::filesystem::path& path);
Stream ReadStream(std::istream& in);
Stream ReadStream(const std::filesystem::path& path);

// Shortest round-trip decimal form of a double.
std::string FormatDouble(double x);

}  // namespace uldp

#endif  // ULDP_STREAMS_HPP_

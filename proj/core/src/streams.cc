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

#include "uldp/streams.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string_view>
#include <unordered_map>

#include "uldp/errors.hpp"
#include "uldp/noise.hpp"

namespace uldp {
namespace {

constexpr std::string_view kHeader = "t,user,value";

std::vector<UserId> ContiguousUsers(std::uint64_t n, std::uint64_t m,
                                    std::uint64_t T) {
  std::vector<UserId> users;
  users.reserve(T);
  for (UserId u = 1; u <= n && users.size() < T; ++u) {
    for (std::uint64_t j = 0; j < m && users.size() < T; ++j) {
      users.push_back(u);
    }
  }
  return users;
}

// Cycles over users 1..n, skipping those already at the cap m.
void AppendRoundRobin(std::vector<UserId>& users,
                      std::vector<std::uint64_t>& counts, std::uint64_t m,
                      std::uint64_t T) {
  const std::uint64_t n = counts.size() - 1;
  UserId u = 0;
  while (users.size() < T) {
    u = u % n + 1;
    if (counts[u] < m) {
      ++counts[u];
      users.push_back(u);
    }
  }
}

std::vector<UserId> UniformRandomUsers(std::uint64_t n, std::uint64_t m,
                                       std::uint64_t T, Rng& rng) {
  // Users with remaining capacity live in `open`; removal is swap-and-pop.
  std::vector<UserId> open(n);
  for (UserId u = 1; u <= n; ++u) open[u - 1] = u;
  std::vector<std::uint64_t> counts(n + 1, 0);
  std::vector<UserId> users;
  users.reserve(T);
  while (users.size() < T) {
    const std::uint64_t i = rng.UniformIndex(open.size());
    const UserId u = open[i];
    users.push_back(u);
    if (++counts[u] == m) {
      open[i] = open.back();
      open.pop_back();
    }
  }
  return users;
}

std::vector<UserId> OrderFromFile(const OrderingSpec& ordering,
                                  std::uint64_t n, std::uint64_t m,
                                  std::uint64_t T) {
  const Stream source = ReadStream(ordering.path);
  if (source.size() < T) {
    throw InfeasibleOrdering("ordering file has " +
                             std::to_string(source.size()) +
                             " events, fewer than T=" + std::to_string(T));
  }
  std::unordered_map<UserId, std::uint64_t> counts;
  std::vector<UserId> users;
  users.reserve(T);
  for (std::uint64_t i = 0; i < T; ++i) {
    const UserId u = source[i].user;
    if (u > n) {
      throw InfeasibleOrdering("ordering file names user " +
                               std::to_string(u) + " > n");
    }
    if (++counts[u] > m) {
      throw InfeasibleOrdering("ordering file gives user " +
                               std::to_string(u) + " more than m samples");
    }
    users.push_back(u);
  }
  return users;
}

[[noreturn]] void Fail(std::size_t line, const std::string& what) {
  throw ParseError(line, what);
}

template <typename T>
T ParseField(std::string_view field, std::size_t line, const char* name) {
  T value{};
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    Fail(line, std::string("malformed ") + name + " field '" +
                   std::string(field) + "'");
  }
  return value;
}

}  // namespace

OrderingKind ParseOrderingKind(const std::string& name) {
  if (name == "contiguous") return OrderingKind::kContiguous;
  if (name == "round_robin") return OrderingKind::kRoundRobin;
  if (name == "uniform_random") return OrderingKind::kUniformRandom;
  if (name == "single_user_prefix") return OrderingKind::kSingleUserPrefix;
  if (name == "from_file") return OrderingKind::kFromFile;
  throw InvalidArgument("unknown ordering '" + name + "'");
}

std::string OrderingKindName(OrderingKind kind) {
  switch (kind) {
    case OrderingKind::kContiguous:
      return "contiguous";
    case OrderingKind::kRoundRobin:
      return "round_robin";
    case OrderingKind::kUniformRandom:
      return "uniform_random";
    case OrderingKind::kSingleUserPrefix:
      return "single_user_prefix";
    case OrderingKind::kFromFile:
      return "from_file";
  }
  return "unknown";
}

Stream Generate(double mu, std::uint64_t n, std::uint64_t m, std::uint64_t T,
                const OrderingSpec& ordering, std::uint64_t seed) {
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw InvalidArgument("mu must lie in [0, 1]");
  }
  if (n == 0 || m == 0) throw InvalidArgument("n and m must be positive");
  const bool product_fits = n <= std::numeric_limits<std::uint64_t>::max() / m;
  if (product_fits && T > n * m) {
    throw InfeasibleOrdering("T=" + std::to_string(T) + " exceeds n*m");
  }

  const Rng root(seed);
  Rng order_rng = root.Split(0);
  Rng value_rng = root.Split(1);

  std::vector<UserId> users;
  switch (ordering.kind) {
    case OrderingKind::kContiguous:
      users = ContiguousUsers(n, m, T);
      break;
    case OrderingKind::kRoundRobin: {
      std::vector<std::uint64_t> counts(n + 1, 0);
      users.reserve(T);
      AppendRoundRobin(users, counts, m, T);
      break;
    }
    case OrderingKind::kUniformRandom:
      users = UniformRandomUsers(n, m, T, order_rng);
      break;
    case OrderingKind::kSingleUserPrefix: {
      const std::uint64_t prefix =
          std::min({ordering.prefix_length == 0 ? m : ordering.prefix_length,
                    m, T});
      std::vector<std::uint64_t> counts(n + 1, 0);
      users.assign(prefix, 1);
      counts[1] = prefix;
      AppendRoundRobin(users, counts, m, T);
      break;
    }
    case OrderingKind::kFromFile:
      users = OrderFromFile(ordering, n, m, T);
      break;
  }

  Stream stream;
  stream.reserve(T);
  for (std::uint64_t i = 0; i < T; ++i) {
    const double value = value_rng.Uniform() < mu ? 1.0 : 0.0;
    stream.push_back({i + 1, users[i], value});
  }
  return stream;
}

std::string FormatDouble(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void WriteStream(const Stream& events, std::ostream& out) {
  out << kHeader << '\n';
  for (const StreamEvent& e : events) {
    out << e.t << ',' << e.user << ',' << FormatDouble(e.value) << '\n';
  }
}

void WriteStream(const Stream& events, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path.string());
  WriteStream(events, out);
}

Stream ReadStream(std::istream& in) {
  Stream events;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!saw_header) {
      if (line.empty()) continue;
      if (line != kHeader) Fail(line_no, "expected header 't,user,value'");
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    const std::string_view row(line);
    const auto c1 = row.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : row.find(',', c1 + 1);
    if (c2 == std::string_view::npos ||
        row.find(',', c2 + 1) != std::string_view::npos) {
      Fail(line_no, "expected 3 comma-separated fields");
    }
    StreamEvent e;
    e.t = ParseField<std::uint64_t>(row.substr(0, c1), line_no, "t");
    e.user = ParseField<std::uint64_t>(row.substr(c1 + 1, c2 - c1 - 1),
                                       line_no, "user");
    e.value = ParseField<double>(row.substr(c2 + 1), line_no, "value");
    if (e.t == 0) Fail(line_no, "t must be a positive integer");
    if (e.user == 0) Fail(line_no, "user ids are 1-based");
    if (!(e.value >= 0.0 && e.value <= 1.0)) {
      Fail(line_no, "value must lie in [0, 1]");
    }
    if (!events.empty() && e.t <= events.back().t) {
      Fail(line_no, "t must be strictly increasing");
    }
    events.push_back(e);
  }
  return events;
}

Stream ReadStream(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return ReadStream(in);
}

}  // namespace uldp

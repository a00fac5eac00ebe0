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

#ifndef ULDP_TESTS_SUPPORT_ORACLE_HPP_
#define ULDP_TESTS_SUPPORT_ORACLE_HPP_

// Straightforward recomputations used as test oracles. Nothing here shares
// code with the library beyond the event type.

#include <bit>
#include <cstdint>
#include <map>
#include <vector>

#include "uldp/streams.hpp"

namespace uldp::testing {

struct OracleStep {
  double sum = 0.0;         // samples represented in the estimate
  std::uint64_t total = 0;  // how many of them
  double estimate = 0.5;    // sum / total, 0.5 while total == 0
};

// Noiseless, unclipped released-sample mean. Every count that reaches a
// power of two c releases the samples c/2+1..c (sample 1 when c == 1) at
// level log2(c). Levels marked gated in `thresholds` hold their blocks back
// until sum_u min(count_u, 2^(l-1)) reaches the threshold, checked before
// the current event's own release.
inline std::vector<OracleStep> ReleasedMeanOracle(
    const Stream& stream, const std::map<int, double>& thresholds = {}) {
  std::map<UserId, std::vector<double>> values;
  std::map<int, std::vector<std::pair<double, std::uint64_t>>> held;
  std::map<int, bool> open;
  for (const auto& [level, thr] : thresholds) open[level] = false;

  std::vector<OracleStep> out;
  OracleStep state;
  for (const StreamEvent& e : stream) {
    values[e.user].push_back(e.value);
    for (auto& [level, is_open] : open) {
      if (is_open) continue;
      const std::uint64_t cap = std::uint64_t{1} << (level - 1);
      double capped = 0.0;
      for (const auto& [u, v] : values) {
        capped += static_cast<double>(v.size() < cap ? v.size() : cap);
      }
      if (capped >= thresholds.at(level)) {
        is_open = true;
        for (const auto& [s, size] : held[level]) {
          state.sum += s;
          state.total += size;
        }
        held[level].clear();
      }
    }
    const std::vector<double>& mine = values[e.user];
    const std::uint64_t c = mine.size();
    if (std::has_single_bit(c)) {
      const int level = std::countr_zero(c);
      const std::uint64_t first = c == 1 ? 0 : c / 2;
      double s = 0.0;
      for (std::uint64_t i = first; i < c; ++i) s += mine[i];
      const std::uint64_t size = c - first;
      if (open.count(level) && !open[level]) {
        held[level].push_back({s, size});
      } else {
        state.sum += s;
        state.total += size;
      }
    }
    state.estimate = state.total == 0 ? 0.5 : state.sum / state.total;
    out.push_back(state);
  }
  return out;
}

}  // namespace uldp::testing

#endif  // ULDP_TESTS_SUPPORT_ORACLE_HPP_

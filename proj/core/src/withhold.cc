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

#include "uldp/withhold.hpp"

#include <algorithm>
#include <bit>

namespace uldp {

ReleaseDecision UserLedger::OnSample(UserId user, double value) {
  UserState& state = users_[user];
  ++state.count;
  ++seen_;
  max_count_ = std::max(max_count_, state.count);

  ReleaseDecision decision;
  if (!std::has_single_bit(state.count)) {
    state.pending.push_back(value);
    ++pending_;
    return decision;
  }

  decision.kind = ReleaseDecision::Kind::kRelease;
  decision.level = std::countr_zero(state.count);
  double sum = 0.0;
  for (double x : state.pending) sum += x;
  decision.block_sum = sum + value;
  decision.block_size = state.pending.size() + 1;
  pending_ -= state.pending.size();
  state.pending.clear();
  return decision;
}

std::uint64_t UserLedger::count(UserId user) const {
  auto it = users_.find(user);
  return it == users_.end() ? 0 : it->second.count;
}

std::uint64_t UserLedger::pending_count(UserId user) const {
  auto it = users_.find(user);
  return it == users_.end() ? 0 : it->second.pending.size();
}

std::map<UserId, std::uint64_t> UserLedger::counts() const {
  std::map<UserId, std::uint64_t> out;
  for (const auto& [user, state] : users_) out.emplace(user, state.count);
  return out;
}

}  // namespace uldp

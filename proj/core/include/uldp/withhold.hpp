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

#ifndef ULDP_WITHHOLD_HPP_
#define ULDP_WITHHOLD_HPP_

#include <cstdint>
#include <map>
#include <vector>

namespace uldp {

using UserId = std::uint64_t;

// Outcome of feeding one sample to the exponential withhold-release schedule.
// A release at level l fires when the user's count reaches 2^l and carries
// the untruncated sum of samples 2^(l-1)+1 .. 2^l (sample 1 for l == 0).
struct ReleaseDecision {
  enum class Kind { kWithhold, kRelease };

  Kind kind = Kind::kWithhold;
  int level = 0;
  double block_sum = 0.0;
  std::uint64_t block_size = 0;

  bool released() const { return kind == Kind::kRelease; }
};

// Per-user sample counts M(u) and the samples withheld since each user's last
// release. Truncation is the caller's business, so every estimator that
// releases on powers of two shares this scheduler.
class UserLedger {
 public:
  ReleaseDecision OnSample(UserId user, double value);

  std::uint64_t count(UserId user) const;
  std::uint64_t pending_count(UserId user) const;
  // Samples whose information has been released: total seen minus pending.
  std::uint64_t released_info_count() const { return seen_ - pending_; }
  std::uint64_t samples_seen() const { return seen_; }
  std::uint64_t pending_total() const { return pending_; }
  // M_t: the largest per-user count so far.
  std::uint64_t max_count() const { return max_count_; }
  std::size_t user_count() const { return users_.size(); }

  // Per-user counts in ascending user id order.
  std::map<UserId, std::uint64_t> counts() const;

 private:
  struct UserState {
    std::uint64_t count = 0;
    std::vector<double> pending;
  };

  std::map<UserId, UserState> users_;
  std::uint64_t seen_ = 0;
  std::uint64_t pending_ = 0;
  std::uint64_t max_count_ = 0;
};

}  // namespace uldp

#endif  // ULDP_WITHHOLD_HPP_

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

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "estimator_impl.hpp"
#include "uldp/errors.hpp"
#include "uldp/median.hpp"
#include "uldp/truncate.hpp"

namespace uldp::internal {
namespace {

constexpr std::uint64_t kMedianStreamBase = 1000;

// Prior-free estimator. Levels 0 and 1 are active from the start with the
// identity projection; level l >= 2 parks its releases in a buffer until
// enough distinct-user data exists to estimate a level-specific prior.
class FullEstimator final : public Estimator {
 public:
  FullEstimator(const EstimatorConfig& config, const EstimatorOptions& options)
      : Estimator(config, options), big_l_(CeilLog2(config_.m)) {
    for (int level = 1; level <= big_l_; ++level) {
      budget_.Charge("prior[" + std::to_string(level) + "]",
                     config_.eps / (2.0 * big_l_));
    }
    const double log_n = std::log2(static_cast<double>(config_.n));
    for (int level = 0; level <= big_l_; ++level) {
      const double s = FullElementSensitivity(level, config_.m, config_.n,
                                              config_.eps, config_.delta);
      AddMechanism({.label = "bm[" + std::to_string(level) + "]",
                    .level = level,
                    .eps_share = config_.eps / (2.0 * (big_l_ + 1)),
                    .element_sensitivity = s,
                    .count_bound = 1.0 + log_n,
                    .l1_bound = s * (1.0 + log_n)});
    }
    buffers_.resize(big_l_ + 1);
    capped_.assign(big_l_ + 1, 0);
    thresholds_.assign(big_l_ + 1, 0.0);
    intervals_.resize(big_l_ + 1);
    for (int level = 2; level <= big_l_; ++level) {
      inactive_.insert(level);
      thresholds_[level] = FullActivationThreshold(level, config_.m,
                                                   config_.eps, config_.delta);
    }
  }

  StepRecord Step(const StreamEvent& event) override {
    const ReleaseDecision d = Admit(event);
    const std::uint64_t count = ledger_.count(event.user);
    samples_[event.user].push_back(event.value);
    for (int level = 2; level <= big_l_; ++level) {
      if (count <= std::uint64_t{1} << (level - 1)) ++capped_[level];
    }

    StepRecord r = BaseRecord(event);
    for (auto it = inactive_.begin(); it != inactive_.end();) {
      const int level = *it;
      if (static_cast<double>(capped_[level]) < thresholds_[level]) {
        ++it;
        continue;
      }
      Activate(level, r.truncated);
      it = inactive_.erase(it);
    }

    if (d.released()) {
      if (inactive_.contains(d.level)) {
        buffers_[d.level].push_back(d.block_sum);
      } else {
        mechs_[d.level].Append(Truncate(d.level, d.block_sum, r.truncated));
        total_ += d.block_size;
      }
    }
    r.active_levels = active_mask();
    Finish(r, 0.5);
    return r;
  }

  std::uint64_t buffered_samples() const override {
    std::uint64_t sum = 0;
    for (int level = 2; level <= big_l_; ++level) {
      sum += (std::uint64_t{1} << (level - 1)) * buffers_[level].size();
    }
    return sum;
  }

  std::vector<int> inactive_levels() const override {
    return {inactive_.begin(), inactive_.end()};
  }

  std::map<int, double> priors() const override { return priors_; }

  std::uint64_t active_mask() const override {
    std::uint64_t mask = 0;
    for (int level = 0; level <= big_l_; ++level) {
      if (!inactive_.contains(level)) mask |= std::uint64_t{1} << level;
    }
    return mask;
  }

 private:
  void Activate(int level, bool& truncated) {
    double prior;
    if (auto forced = options_.forced_priors.find(level);
        forced != options_.forced_priors.end()) {
      prior = forced->second;
    } else {
      Rng rng = root_rng_.Split(kMedianStreamBase + level);
      prior = PrivateMedian(samples_, config_.eps / (2.0 * big_l_), level,
                            config_.delta / (3.0 * big_l_), rng);
    }
    priors_[level] = prior;
    intervals_[level] = BoundToRange(
        IntervalFull(prior, level, config_.n, config_.m, config_.eps,
                     config_.delta),
        0.0, std::ldexp(1.0, level - 1));
    const std::uint64_t block_size = std::uint64_t{1} << (level - 1);
    for (double block : buffers_[level]) {
      mechs_[level].Append(ProjectOrKeep(intervals_[level], block, truncated));
      total_ += block_size;
    }
    buffers_[level].clear();
  }

  double Truncate(int level, double block, bool& truncated) const {
    if (level <= 1) return block;
    return ProjectOrKeep(intervals_[level], block, truncated);
  }

  int big_l_;
  std::set<int> inactive_;
  std::vector<std::vector<double>> buffers_;
  std::vector<std::uint64_t> capped_;  // sum_u min(count_u, 2^(l-1))
  std::vector<double> thresholds_;
  std::vector<TruncationInterval> intervals_;
  std::map<int, double> priors_;
  UserSamples samples_;
};

}  // namespace

std::unique_ptr<Estimator> MakeFullEstimator(const EstimatorConfig& config,
                                             const EstimatorOptions& options) {
  return std::make_unique<FullEstimator>(config, options);
}

}  // namespace uldp::internal

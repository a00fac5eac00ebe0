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

#include "uldp/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "uldp/errors.hpp"

namespace uldp {
namespace {

constexpr double kLedgerSlack = 1e-12;

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(SplitMix64(seed) ^ SplitMix64(index + 0x5851f42d4c957f2dULL));
}

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::UniformOpen() {
  double u = 0.0;
  do {
    u = Uniform();
  } while (u == 0.0);
  return u;
}

std::uint64_t Rng::UniformIndex(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("UniformIndex: bound must be positive");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

Rng Rng::Split(std::uint64_t index) const {
  return Rng(DeriveSeed(seed_, index));
}

double SampleLaplace(NoiseScale scale, Rng& rng) {
  if (!(scale.b >= 0.0) || !std::isfinite(scale.b)) {
    throw InvalidArgument("laplace scale must be finite and nonnegative");
  }
  if (scale.b == 0.0) return 0.0;
  // u in (-1/2, 1/2); the inverse CDF is -b sgn(u) ln(1 - 2|u|).
  const double u = rng.UniformOpen() - 0.5;
  const double magnitude = -scale.b * std::log1p(-2.0 * std::fabs(u));
  return u < 0.0 ? -magnitude : magnitude;
}

std::size_t SampleExponentialMechanismIndex(std::span<const double> costs,
                                            double eps, Rng& rng) {
  if (costs.empty()) {
    throw InvalidArgument("exponential mechanism needs at least one candidate");
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidArgument("exponential mechanism eps must be positive");
  }
  std::vector<double> logits(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (!std::isfinite(costs[i])) {
      throw InvalidArgument("exponential mechanism costs must be finite");
    }
    logits[i] = -(eps / 4.0) * costs[i];
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> weights(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    weights[i] = std::exp(logits[i] - top);
  }
  const double z = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double target = rng.Uniform() * z;
  double running = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    running += weights[i];
    if (target < running) return i;
  }
  // Rounding in the running sum can leave target == z; fall back to the last
  // candidate with nonzero weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return weights.size() - 1;
}

double SampleExponentialMechanism(std::span<const Candidate> candidates,
                                  double eps, Rng& rng) {
  std::vector<double> costs;
  costs.reserve(candidates.size());
  for (const Candidate& c : candidates) costs.push_back(c.cost);
  return candidates[SampleExponentialMechanismIndex(costs, eps, rng)].value;
}

BudgetLedger::BudgetLedger(double total_eps) : total_(total_eps) {
  if (!(total_eps > 0.0) || !std::isfinite(total_eps)) {
    throw InvalidArgument("privacy budget must be positive and finite");
  }
}

double BudgetLedger::spent() const {
  double sum = 0.0;
  for (const Entry& e : entries_) sum += e.eps;
  return sum;
}

void BudgetLedger::Charge(std::string label, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidArgument("budget charge for '" + label + "' must be positive");
  }
  const double next = spent() + eps;
  if (next > total_ * (1.0 + kLedgerSlack)) {
    throw BudgetExceeded(label, "charging " + std::to_string(eps) + " for '" +
                                    label + "' exceeds total budget " +
                                    std::to_string(total_));
  }
  entries_.push_back({std::move(label), eps});
}

}  // namespace uldp

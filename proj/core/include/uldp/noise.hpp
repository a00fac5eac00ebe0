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

#ifndef ULDP_NOISE_HPP_
#define ULDP_NOISE_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace uldp {

// Deterministic random source. Uniforms are built directly from the raw
// 64-bit engine output so the draw sequence is identical across standard
// library implementations (std::uniform_real_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform();
  // Uniform on (0, 1).
  double UniformOpen();
  std::uint64_t NextU64() { return engine_(); }
  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t UniformIndex(std::uint64_t bound);

  // Independent child stream. Deriving a child never advances this engine, so
  // adding a consumer at a new index leaves every other stream unchanged.
  Rng Split(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index);

// Laplace parameter b (density exp(-|x|/b)/2b). b == 0 is a deterministic
// passthrough used by noiseless test runs.
struct NoiseScale {
  double b = 0.0;
};

// One Lap(b) draw by inverse CDF. Throws InvalidArgument for b < 0 or NaN.
double SampleLaplace(NoiseScale scale, Rng& rng);

struct Candidate {
  double value;
  double cost;
};

// Exponential mechanism with P(i) proportional to exp(-(eps/4) * cost_i).
// The eps/4 factor assumes a cost of user-level sensitivity 2.
std::size_t SampleExponentialMechanismIndex(std::span<const double> costs,
                                            double eps, Rng& rng);
double SampleExponentialMechanism(std::span<const Candidate> candidates,
                                  double eps, Rng& rng);

// Sequential-composition accountant. Charges accumulate; a charge that would
// take the running sum past the total is rejected and leaves the ledger
// untouched. Comparisons allow a relative slack of 1e-12 so that splitting a
// budget into k equal floating-point shares is accepted.
class BudgetLedger {
 public:
  struct Entry {
    std::string label;
    double eps;
  };

  explicit BudgetLedger(double total_eps);

  void Charge(std::string label, double eps);

  double total() const { return total_; }
  double spent() const;
  double remaining() const { return total_ - spent(); }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  double total_;
  std::vector<Entry> entries_;
};

}  // namespace uldp

#endif  // ULDP_NOISE_HPP_

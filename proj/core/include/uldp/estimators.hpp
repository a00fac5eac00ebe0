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

#ifndef ULDP_ESTIMATORS_HPP_
#define ULDP_ESTIMATORS_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "uldp/binary_mechanism.hpp"
#include "uldp/noise.hpp"
#include "uldp/streams.hpp"
#include "uldp/truncate.hpp"
#include "uldp/withhold.hpp"

namespace uldp {

enum class Algorithm { kNaive, kWishful, kSingle, kMulti, kFull };

Algorithm ParseAlgorithm(const std::string& name);
std::string AlgorithmName(Algorithm algorithm);

struct EstimatorConfig {
  Algorithm algorithm = Algorithm::kFull;
  std::uint64_t n = 1;  // max number of users
  std::uint64_t m = 1;  // max samples per user
  std::uint64_t T = 0;  // stream length; naive only
  double eps = 1.0;
  double delta = 0.1;
  // Coarse mean estimate; required by wishful, single and multi, rejected
  // otherwise.
  std::optional<double> prior;
  std::uint64_t seed = 0;

  // Throws InvalidArgument on any violated invariant.
  void Validate() const;
};

// Test and audit hooks. None of these are privacy-preserving.
struct EstimatorOptions {
  // Apply zero noise in every binary mechanism. Nominal noise scales are still
  // computed and reported through MechanismInfo.
  bool noiseless = false;
  // Replace every projection by the identity.
  bool disable_clipping = false;
  // Full estimator only: use these priors instead of running the private
  // median when a level activates.
  std::map<int, double> forced_priors;
};

// What a mechanism's noise was calibrated against. nominal_eta is
// l1_bound / eps_share; count_bound bounds how many noisy partial sums a
// single user can move.
struct MechanismInfo {
  std::string label;
  int level = 0;
  double eps_share = 0.0;
  double element_sensitivity = 0.0;
  double count_bound = 0.0;
  double l1_bound = 0.0;
  double nominal_eta = 0.0;
};

struct StepRecord {
  std::uint64_t t = 0;
  UserId user = 0;
  double estimate = 0.0;
  std::uint64_t total = 0;
  std::uint64_t max_count = 0;  // M_t
  std::uint64_t active_levels = 0;  // bit l set when level l is active
  bool no_data = false;       // total == 0; the estimate is a placeholder
  bool from_prior = false;    // wishful warm-up: the estimate is the prior
  bool truncated = false;     // a projection moved a value this step
  bool diverse = false;       // the diversity condition held after this step
  bool out_of_range = false;  // estimate fell outside [0, 1]
};

// Comma-free flag token list, '|'-separated, e.g. "diverse|truncated".
std::string FormatFlags(const StepRecord& record);

// Trace CSV with header "t,user,estimate,total,M_t,flags".
void WriteTraceHeader(std::ostream& out);
void WriteTraceRow(const StepRecord& record, std::ostream& out);
void WriteTrace(const std::vector<StepRecord>& records, std::ostream& out);

struct DiversityReport {
  bool satisfied = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

// lhs = sum_u min(m_u, M/2), rhs = (M/2)(16/eps) 2L ln(3L sqrt(M)/delta)
// with L = ceil(log2 m). Throws InvalidArgument before any sample is seen.
DiversityReport CheckDiversity(const UserLedger& ledger, double eps,
                               double delta, std::uint64_t m);
DiversityReport CheckDiversity(const std::map<UserId, std::uint64_t>& counts,
                               double eps, double delta, std::uint64_t m);

// Noise scales. log is base 2, ln natural.
// m (1 + log T) / eps.
double NaiveNoiseScale(std::uint64_t m, std::uint64_t T, double eps);
// 2 Delta (1 + log n) / eps with the wishful half-width Delta.
double WishfulNoiseScale(std::uint64_t m, std::uint64_t n, double eps,
                         double delta);
// sqrt((m/2) ln(2n log m/delta)) + sqrt(m).
double SingleHalfWidth(std::uint64_t m, std::uint64_t n, double delta);
// 2 Delta (1 + log m) log(1 + n(1 + log m)) / eps.
double SingleNoiseScale(std::uint64_t m, std::uint64_t n, double eps,
                        double delta);
// sqrt((2^(l-1)/2) ln(2n log m/delta)) + sqrt(2^(l-1)).
double MultiLevelHalfWidth(int level, std::uint64_t m, std::uint64_t n,
                           double delta);
// 2 Delta_l (1 + log n) / (eps/(L+1)).
double MultiNoiseScale(int level, std::uint64_t m, std::uint64_t n, double eps,
                       double delta);
// Per-element sensitivity of level l in the full estimator: 1 for l <= 1
// (identity projection of a single Bernoulli sample), 2 Delta_l otherwise.
double FullElementSensitivity(int level, std::uint64_t m, std::uint64_t n,
                              double eps, double delta);
// sensitivity (1 + log n) / (eps/(2(L+1))).
double FullNoiseScale(int level, std::uint64_t m, std::uint64_t n, double eps,
                      double delta);
// Capped-contribution level a full-estimator level needs before its prior
// can be estimated: 2^(l-1) * ceil(k(eps/2L, l, delta/3L)).
double FullActivationThreshold(int level, std::uint64_t m, double eps,
                               double delta);

// Continual mean estimator: consumes one event per call and publishes an
// estimate after each one.
class Estimator {
 public:
  virtual ~Estimator() = default;

  virtual StepRecord Step(const StreamEvent& event) = 0;

  const EstimatorConfig& config() const { return config_; }
  const std::vector<BinaryMechanism>& mechanisms() const { return mechs_; }
  const std::vector<MechanismInfo>& mechanism_info() const { return info_; }
  const UserLedger& ledger() const { return ledger_; }
  const BudgetLedger& budget() const { return budget_; }
  std::uint64_t total() const { return total_; }
  std::uint64_t steps() const { return t_; }

  // Samples seen but not represented in total: withheld by the schedule,
  // waiting for a wishful block to complete, or parked in a buffer.
  virtual std::uint64_t withheld_samples() const;
  virtual std::uint64_t buffered_samples() const { return 0; }
  virtual std::vector<int> inactive_levels() const { return {}; }
  virtual std::map<int, double> priors() const { return {}; }
  // Bit l set when mechanism l currently accepts elements.
  virtual std::uint64_t active_mask() const;

  // Sum over mechanisms of their noisy running sums.
  double NoisySum() const;

 protected:
  Estimator(const EstimatorConfig& config, const EstimatorOptions& options);

  // Adds one mechanism with the given calibration. Mechanism i draws noise
  // from an independent child of the seed.
  void AddMechanism(MechanismInfo info);

  // Bookkeeping shared by all algorithms: validates the event against n and
  // m, advances t, and feeds the withhold-release ledger.
  ReleaseDecision Admit(const StreamEvent& event);

  // Fills estimate-independent fields of the step record.
  StepRecord BaseRecord(const StreamEvent& event) const;
  // estimate = NoisySum() / total, or `fallback` flagged no_data if total==0.
  void Finish(StepRecord& record, double fallback) const;

  double ProjectOrKeep(const TruncationInterval& interval, double s,
                       bool& truncated) const;

  EstimatorConfig config_;
  EstimatorOptions options_;
  Rng root_rng_;
  std::vector<BinaryMechanism> mechs_;
  std::vector<MechanismInfo> info_;
  UserLedger ledger_;
  BudgetLedger budget_;
  std::uint64_t total_ = 0;
  std::uint64_t t_ = 0;

 private:
  void UpdateDiversity(std::uint64_t old_count, std::uint64_t new_count,
                       std::uint64_t old_max);

  double diversity_lhs_ = 0.0;
};

std::unique_ptr<Estimator> MakeEstimator(const EstimatorConfig& config,
                                         const EstimatorOptions& options = {});

// Runs a fresh estimator over the whole stream and returns its trace.
std::vector<StepRecord> RunEstimator(const EstimatorConfig& config,
                                     const Stream& stream,
                                     const EstimatorOptions& options = {});

}  // namespace uldp

#endif  // ULDP_ESTIMATORS_HPP_

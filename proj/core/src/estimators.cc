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

#include "uldp/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "estimator_impl.hpp"
#include "uldp/errors.hpp"
#include "uldp/truncate.hpp"

namespace uldp {
namespace {

double Log2(double x) { return std::log2(x); }
double Log2(std::uint64_t x) { return std::log2(static_cast<double>(x)); }

double LevelBlockSize(int level) { return std::ldexp(1.0, level - 1); }

const EstimatorConfig& Validated(const EstimatorConfig& config) {
  config.Validate();
  return config;
}

}  // namespace

Algorithm ParseAlgorithm(const std::string& name) {
  if (name == "naive") return Algorithm::kNaive;
  if (name == "wishful") return Algorithm::kWishful;
  if (name == "single") return Algorithm::kSingle;
  if (name == "multi") return Algorithm::kMulti;
  if (name == "full") return Algorithm::kFull;
  throw InvalidArgument("unknown algorithm '" + name + "'");
}

std::string AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kNaive:
      return "naive";
    case Algorithm::kWishful:
      return "wishful";
    case Algorithm::kSingle:
      return "single";
    case Algorithm::kMulti:
      return "multi";
    case Algorithm::kFull:
      return "full";
  }
  return "unknown";
}

void EstimatorConfig::Validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidArgument("eps must be positive and finite");
  }
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw InvalidArgument("delta must lie in (0, 1]");
  }
  if (n < 1) throw InvalidArgument("n must be at least 1");
  if (m < 1) throw InvalidArgument("m must be at least 1");
  const bool needs_prior = algorithm == Algorithm::kWishful ||
                           algorithm == Algorithm::kSingle ||
                           algorithm == Algorithm::kMulti;
  if (needs_prior && !prior.has_value()) {
    throw InvalidArgument(AlgorithmName(algorithm) + " requires a prior");
  }
  if (!needs_prior && prior.has_value()) {
    throw InvalidArgument(AlgorithmName(algorithm) + " does not take a prior");
  }
  if (prior.has_value() && !(*prior >= 0.0 && *prior <= 1.0)) {
    throw InvalidArgument("prior must lie in [0, 1]");
  }
  if (algorithm == Algorithm::kNaive && T < 1) {
    throw InvalidArgument("naive estimator requires the stream length T");
  }
  if ((algorithm == Algorithm::kSingle || algorithm == Algorithm::kMulti) &&
      m < 2) {
    throw InvalidArgument(AlgorithmName(algorithm) + " requires m >= 2");
  }
}

std::string FormatFlags(const StepRecord& r) {
  std::string out;
  auto add = [&out](const char* token) {
    if (!out.empty()) out += '|';
    out += token;
  };
  if (r.no_data) add("no-data");
  if (r.from_prior) add("prior");
  if (r.truncated) add("truncated");
  if (r.diverse) add("diverse");
  if (r.out_of_range) add("out-of-range");
  std::string levels;
  for (int l = 0; l < 64; ++l) {
    if ((r.active_levels >> l) & 1) {
      if (!levels.empty()) levels += '.';
      levels += std::to_string(l);
    }
  }
  if (!out.empty()) out += '|';
  out += "active=" + (levels.empty() ? std::string("none") : levels);
  return out;
}

void WriteTraceHeader(std::ostream& out) {
  out << "t,user,estimate,total,M_t,flags\n";
}

void WriteTraceRow(const StepRecord& r, std::ostream& out) {
  out << r.t << ',' << r.user << ',' << FormatDouble(r.estimate) << ','
      << r.total << ',' << r.max_count << ',' << FormatFlags(r) << '\n';
}

void WriteTrace(const std::vector<StepRecord>& records, std::ostream& out) {
  WriteTraceHeader(out);
  for (const StepRecord& r : records) WriteTraceRow(r, out);
}

DiversityReport CheckDiversity(const std::map<UserId, std::uint64_t>& counts,
                               double eps, double delta, std::uint64_t m) {
  if (counts.empty()) {
    throw InvalidArgument("diversity check needs at least one sample");
  }
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw InvalidArgument("delta must lie in (0, 1]");
  }
  std::uint64_t max_count = 0;
  for (const auto& [user, c] : counts) max_count = std::max(max_count, c);
  const double half = static_cast<double>(max_count) / 2.0;
  DiversityReport report;
  for (const auto& [user, c] : counts) {
    report.lhs += std::min(static_cast<double>(c), half);
  }
  const int big_l = CeilLog2(m);
  if (big_l > 0) {
    report.rhs = half * (16.0 / eps) *
                 (2.0 * big_l *
                  std::log(3.0 * big_l *
                           std::sqrt(static_cast<double>(max_count)) / delta));
  }
  report.satisfied = report.lhs >= report.rhs;
  return report;
}

DiversityReport CheckDiversity(const UserLedger& ledger, double eps,
                               double delta, std::uint64_t m) {
  return CheckDiversity(ledger.counts(), eps, delta, m);
}

double NaiveNoiseScale(std::uint64_t m, std::uint64_t T, double eps) {
  return static_cast<double>(m) * (1.0 + Log2(T)) / eps;
}

double WishfulNoiseScale(std::uint64_t m, std::uint64_t n, double eps,
                         double delta) {
  return 2.0 * HalfWidthWishful(m, n, delta) * (1.0 + Log2(n)) / eps;
}

double SingleHalfWidth(std::uint64_t m, std::uint64_t n, double delta) {
  const double md = static_cast<double>(m);
  return std::sqrt(md / 2.0 *
                   std::log(2.0 * static_cast<double>(n) * Log2(m) / delta)) +
         std::sqrt(md);
}

double SingleNoiseScale(std::uint64_t m, std::uint64_t n, double eps,
                        double delta) {
  const double levels = 1.0 + Log2(m);
  return 2.0 * SingleHalfWidth(m, n, delta) * levels *
         Log2(1.0 + static_cast<double>(n) * levels) / eps;
}

double MultiLevelHalfWidth(int level, std::uint64_t m, std::uint64_t n,
                           double delta) {
  const double block = LevelBlockSize(level);
  return std::sqrt(block / 2.0 *
                   std::log(2.0 * static_cast<double>(n) * Log2(m) / delta)) +
         std::sqrt(block);
}

double MultiNoiseScale(int level, std::uint64_t m, std::uint64_t n, double eps,
                       double delta) {
  const int big_l = CeilLog2(m);
  return 2.0 * MultiLevelHalfWidth(level, m, n, delta) * (1.0 + Log2(n)) /
         (eps / (big_l + 1));
}

double FullElementSensitivity(int level, std::uint64_t m, std::uint64_t n,
                              double eps, double delta) {
  if (level <= 1) return 1.0;
  return 2.0 * HalfWidthFull(level, n, m, eps, delta);
}

double FullNoiseScale(int level, std::uint64_t m, std::uint64_t n, double eps,
                      double delta) {
  const int big_l = CeilLog2(m);
  return FullElementSensitivity(level, m, n, eps, delta) * (1.0 + Log2(n)) /
         (eps / (2.0 * (big_l + 1)));
}

double FullActivationThreshold(int level, std::uint64_t m, double eps,
                               double delta) {
  const int big_l = CeilLog2(m);
  const std::uint64_t k =
      ArrayCountInt(eps / (2.0 * big_l), level, delta / (3.0 * big_l));
  return LevelBlockSize(level) * static_cast<double>(k);
}

// ---------------------------------------------------------------------------
// Estimator base

Estimator::Estimator(const EstimatorConfig& config,
                     const EstimatorOptions& options)
    : config_(Validated(config)),
      options_(options),
      root_rng_(config.seed),
      budget_(config.eps) {}

void Estimator::AddMechanism(MechanismInfo info) {
  info.nominal_eta = info.l1_bound / info.eps_share;
  const NoiseScale applied{options_.noiseless ? 0.0 : info.nominal_eta};
  budget_.Charge(info.label, info.eps_share);
  mechs_.emplace_back(applied, root_rng_.Split(mechs_.size()), info.label);
  info_.push_back(std::move(info));
}

ReleaseDecision Estimator::Admit(const StreamEvent& event) {
  if (event.user < 1 || event.user > config_.n) {
    throw PreconditionViolation("user " + std::to_string(event.user) +
                                " outside 1..n");
  }
  if (ledger_.count(event.user) >= config_.m) {
    throw PreconditionViolation("user " + std::to_string(event.user) +
                                " contributed more than m samples");
  }
  if (!(event.value >= 0.0 && event.value <= 1.0)) {
    throw PreconditionViolation("sample values must lie in [0, 1]");
  }
  ++t_;
  const std::uint64_t old_count = ledger_.count(event.user);
  const std::uint64_t old_max = ledger_.max_count();
  ReleaseDecision decision = ledger_.OnSample(event.user, event.value);
  UpdateDiversity(old_count, old_count + 1, old_max);
  return decision;
}

void Estimator::UpdateDiversity(std::uint64_t old_count,
                                std::uint64_t new_count,
                                std::uint64_t old_max) {
  const std::uint64_t max_count = ledger_.max_count();
  const double half = static_cast<double>(max_count) / 2.0;
  if (max_count != old_max) {
    diversity_lhs_ = 0.0;
    for (const auto& [user, c] : ledger_.counts()) {
      diversity_lhs_ += std::min(static_cast<double>(c), half);
    }
    return;
  }
  diversity_lhs_ += std::min(static_cast<double>(new_count), half) -
                    std::min(static_cast<double>(old_count), half);
}

std::uint64_t Estimator::withheld_samples() const {
  return ledger_.pending_total();
}

std::uint64_t Estimator::active_mask() const {
  std::uint64_t mask = 0;
  for (const MechanismInfo& info : info_) mask |= std::uint64_t{1} << info.level;
  return mask;
}

double Estimator::NoisySum() const {
  double sum = 0.0;
  for (const BinaryMechanism& mech : mechs_) sum += mech.Sum();
  return sum;
}

StepRecord Estimator::BaseRecord(const StreamEvent& event) const {
  StepRecord r;
  r.t = t_;
  r.user = event.user;
  r.max_count = ledger_.max_count();
  r.active_levels = active_mask();
  const int big_l = CeilLog2(config_.m);
  double rhs = 0.0;
  if (big_l > 0) {
    const double half = static_cast<double>(r.max_count) / 2.0;
    rhs = half * (16.0 / config_.eps) *
          (2.0 * big_l *
           std::log(3.0 * big_l *
                    std::sqrt(static_cast<double>(r.max_count)) /
                    config_.delta));
  }
  r.diverse = diversity_lhs_ >= rhs;
  return r;
}

void Estimator::Finish(StepRecord& record, double fallback) const {
  record.total = total_;
  if (total_ == 0) {
    record.estimate = fallback;
    record.no_data = true;
  } else {
    record.estimate = NoisySum() / static_cast<double>(total_);
  }
  record.out_of_range = !(record.estimate >= 0.0 && record.estimate <= 1.0);
}

double Estimator::ProjectOrKeep(const TruncationInterval& interval, double s,
                                bool& truncated) const {
  if (options_.disable_clipping) return s;
  const double projected = Project(interval, s);
  if (projected != s) truncated = true;
  return projected;
}

namespace {

// ---------------------------------------------------------------------------
// Every sample goes straight into one mechanism; a user moves at most
// m (1 + log T) partial sums by at most 1 per sample.
class NaiveEstimator final : public Estimator {
 public:
  NaiveEstimator(const EstimatorConfig& config, const EstimatorOptions& options)
      : Estimator(config, options) {
    const double log_t = Log2(config_.T);
    const double m = static_cast<double>(config_.m);
    AddMechanism({.label = "bm",
                  .level = 0,
                  .eps_share = config_.eps,
                  .element_sensitivity = 1.0,
                  .count_bound = m * (1.0 + std::floor(log_t)),
                  .l1_bound = m * (1.0 + log_t)});
  }

  StepRecord Step(const StreamEvent& event) override {
    if (t_ >= config_.T) {
      throw PreconditionViolation("naive estimator received more than T=" +
                                  std::to_string(config_.T) + " events");
    }
    Admit(event);
    StepRecord r = BaseRecord(event);
    mechs_[0].Append(event.value);
    total_ = t_;
    Finish(r, 0.5);
    return r;
  }

  std::uint64_t withheld_samples() const override { return 0; }
};

// Users arrive in contiguous runs of exactly m samples. Each completed run is
// projected around m * prior and released as one element.
class WishfulEstimator final : public Estimator {
 public:
  WishfulEstimator(const EstimatorConfig& config,
                   const EstimatorOptions& options)
      : Estimator(config, options) {
    const double half_width =
        HalfWidthWishful(config_.m, config_.n, config_.delta);
    const double log_n = Log2(config_.n);
    interval_ = BoundToRange(
        IntervalWishful(*config_.prior, config_.m, config_.n, config_.delta),
        0.0, static_cast<double>(config_.m));
    AddMechanism({.label = "bm",
                  .level = 0,
                  .eps_share = config_.eps,
                  .element_sensitivity = 2.0 * half_width,
                  .count_bound = 1.0 + std::floor(log_n),
                  .l1_bound = 2.0 * half_width * (1.0 + log_n)});
  }

  StepRecord Step(const StreamEvent& event) override {
    const std::uint64_t m = config_.m;
    const bool block_start = t_ % m == 0;
    if (block_start) {
      if (ledger_.count(event.user) != 0) {
        throw PreconditionViolation(
            "wishful estimator needs user-contiguous arrival: user " +
            std::to_string(event.user) + " reappears at t=" +
            std::to_string(t_ + 1));
      }
    } else if (event.user != run_user_) {
      throw PreconditionViolation(
          "wishful estimator needs user-contiguous arrival: user " +
          std::to_string(run_user_) + " left after " +
          std::to_string(t_ % m) + " of m samples");
    }
    Admit(event);
    run_user_ = event.user;
    run_sum_ = (block_start ? 0.0 : run_sum_) + event.value;

    StepRecord r = BaseRecord(event);
    if (t_ % m == 0) {
      mechs_[0].Append(ProjectOrKeep(interval_, run_sum_, r.truncated));
      total_ += m;
    }
    if (t_ < m) {
      r.total = total_;
      r.estimate = *config_.prior;
      r.from_prior = true;
      r.out_of_range = false;
      return r;
    }
    Finish(r, *config_.prior);
    return r;
  }

  std::uint64_t withheld_samples() const override { return t_ - total_; }

 private:
  TruncationInterval interval_;
  UserId run_user_ = 0;
  double run_sum_ = 0.0;
};

// Shared by the single- and multi-mechanism estimators: exponential
// withhold-release with truncation around a fixed prior.
class PriorReleaseEstimator : public Estimator {
 protected:
  using Estimator::Estimator;

  double Truncate(const ReleaseDecision& d, bool& truncated) const {
    if (d.level == 0) return d.block_sum;
    const TruncationInterval interval = BoundToRange(
        IntervalSingle(*config_.prior, d.level, config_.m, config_.n,
                       config_.delta),
        0.0, LevelBlockSize(d.level));
    return ProjectOrKeep(interval, d.block_sum, truncated);
  }
};

class SingleCounterEstimator final : public PriorReleaseEstimator {
 public:
  SingleCounterEstimator(const EstimatorConfig& config,
                         const EstimatorOptions& options)
      : PriorReleaseEstimator(config, options) {
    const double levels = 1.0 + Log2(config_.m);
    const double influence =
        levels * Log2(1.0 + static_cast<double>(config_.n) * levels);
    const double sensitivity =
        2.0 * SingleHalfWidth(config_.m, config_.n, config_.delta);
    AddMechanism({.label = "bm",
                  .level = 0,
                  .eps_share = config_.eps,
                  .element_sensitivity = sensitivity,
                  .count_bound = influence,
                  .l1_bound = sensitivity * influence});
  }

  StepRecord Step(const StreamEvent& event) override {
    const ReleaseDecision d = Admit(event);
    StepRecord r = BaseRecord(event);
    if (d.released()) {
      mechs_[0].Append(Truncate(d, r.truncated));
      total_ += d.block_size;
    }
    Finish(r, *config_.prior);
    return r;
  }
};

class MultiCounterEstimator final : public PriorReleaseEstimator {
 public:
  MultiCounterEstimator(const EstimatorConfig& config,
                        const EstimatorOptions& options)
      : PriorReleaseEstimator(config, options) {
    const int big_l = CeilLog2(config_.m);
    const double log_n = Log2(config_.n);
    for (int level = 0; level <= big_l; ++level) {
      const double sensitivity =
          2.0 * MultiLevelHalfWidth(level, config_.m, config_.n, config_.delta);
      AddMechanism({.label = "bm[" + std::to_string(level) + "]",
                    .level = level,
                    .eps_share = config_.eps / (big_l + 1),
                    .element_sensitivity = sensitivity,
                    .count_bound = 1.0 + log_n,
                    .l1_bound = sensitivity * (1.0 + log_n)});
    }
  }

  StepRecord Step(const StreamEvent& event) override {
    const ReleaseDecision d = Admit(event);
    StepRecord r = BaseRecord(event);
    if (d.released()) {
      mechs_[d.level].Append(Truncate(d, r.truncated));
      total_ += d.block_size;
    }
    Finish(r, *config_.prior);
    return r;
  }
};

}  // namespace

std::unique_ptr<Estimator> MakeEstimator(const EstimatorConfig& config,
                                         const EstimatorOptions& options) {
  config.Validate();
  switch (config.algorithm) {
    case Algorithm::kNaive:
      return std::make_unique<NaiveEstimator>(config, options);
    case Algorithm::kWishful:
      return std::make_unique<WishfulEstimator>(config, options);
    case Algorithm::kSingle:
      return std::make_unique<SingleCounterEstimator>(config, options);
    case Algorithm::kMulti:
      return std::make_unique<MultiCounterEstimator>(config, options);
    case Algorithm::kFull:
      return internal::MakeFullEstimator(config, options);
  }
  throw InvalidArgument("unknown algorithm");
}

std::vector<StepRecord> RunEstimator(const EstimatorConfig& config,
                                     const Stream& stream,
                                     const EstimatorOptions& options) {
  auto estimator = MakeEstimator(config, options);
  std::vector<StepRecord> trace;
  trace.reserve(stream.size());
  for (const StreamEvent& e : stream) trace.push_back(estimator->Step(e));
  return trace;
}

}  // namespace uldp

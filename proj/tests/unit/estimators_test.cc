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

#include <cmath>
#include <sstream>
#include <vector>

#include "gtest/gtest.h"
#include "support/oracle.hpp"
#include "uldp/errors.hpp"

namespace uldp {
namespace {

using ::uldp::testing::ReleasedMeanOracle;

EstimatorConfig Config(Algorithm algorithm, std::uint64_t n, std::uint64_t m,
                       std::uint64_t T = 0) {
  EstimatorConfig c;
  c.algorithm = algorithm;
  c.n = n;
  c.m = m;
  c.T = T;
  if (algorithm == Algorithm::kWishful || algorithm == Algorithm::kSingle ||
      algorithm == Algorithm::kMulti) {
    c.prior = 0.5;
  }
  return c;
}

EstimatorOptions Noiseless(bool clip = true) {
  EstimatorOptions o;
  o.noiseless = true;
  o.disable_clipping = !clip;
  return o;
}

Stream FromValues(const std::vector<UserId>& users,
                  const std::vector<double>& values) {
  Stream s;
  for (std::size_t i = 0; i < users.size(); ++i) {
    s.push_back({i + 1, users[i], values[i]});
  }
  return s;
}

// The activation threshold written out independently of the library.
double Threshold(int level, std::uint64_t m, double eps, double delta) {
  const int big_l = static_cast<int>(std::ceil(std::log2(double(m))));
  const double k = 16.0 * 2 * big_l / eps *
                   std::log(3.0 * big_l * std::pow(2.0, level / 2.0) / delta);
  return std::ldexp(1.0, level - 1) * std::max(1.0, std::ceil(k - 1e-9));
}

std::map<int, double> Thresholds(std::uint64_t m, double eps, double delta) {
  std::map<int, double> out;
  const int big_l = static_cast<int>(std::ceil(std::log2(double(m))));
  for (int level = 2; level <= big_l; ++level) {
    out[level] = Threshold(level, m, eps, delta);
  }
  return out;
}

// --- Configuration ---------------------------------------------------------

TEST(EstimatorConfigTest, AlgorithmNamesRoundTrip) {
  for (Algorithm a : {Algorithm::kNaive, Algorithm::kWishful,
                      Algorithm::kSingle, Algorithm::kMulti, Algorithm::kFull}) {
    EXPECT_EQ(ParseAlgorithm(AlgorithmName(a)), a);
  }
  EXPECT_THROW(ParseAlgorithm("median"), InvalidArgument);
}

TEST(EstimatorConfigTest, ValidatesPriorUsage) {
  EstimatorConfig c = Config(Algorithm::kSingle, 4, 4);
  c.prior.reset();
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = Config(Algorithm::kFull, 4, 4);
  c.prior = 0.5;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = Config(Algorithm::kMulti, 4, 4);
  c.prior = 1.5;
  EXPECT_THROW(c.Validate(), InvalidArgument);
}

TEST(EstimatorConfigTest, ValidatesScalars) {
  EstimatorConfig c = Config(Algorithm::kNaive, 4, 4, 16);
  EXPECT_NO_THROW(c.Validate());
  c.T = 0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = Config(Algorithm::kFull, 4, 4);
  c.eps = 0.0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c.eps = 1.0;
  c.delta = 0.0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c.delta = 0.1;
  c.n = 0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  EXPECT_THROW(MakeEstimator(Config(Algorithm::kSingle, 4, 1)),
               InvalidArgument);
}

TEST(EstimatorTest, RejectsEventsOutsideTheContract) {
  auto est = MakeEstimator(Config(Algorithm::kFull, 2, 2));
  EXPECT_THROW(est->Step({1, 3, 1.0}), PreconditionViolation);
  EXPECT_THROW(est->Step({1, 1, 1.5}), PreconditionViolation);
  est->Step({1, 1, 1.0});
  est->Step({2, 1, 1.0});
  EXPECT_THROW(est->Step({3, 1, 1.0}), PreconditionViolation);
}

// --- Noise scales ----------------------------------------------------------

TEST(NoiseScaleTest, NaiveFormula) {
  EXPECT_DOUBLE_EQ(NaiveNoiseScale(4, 16, 1.0), 20.0);
  auto est = MakeEstimator(Config(Algorithm::kNaive, 4, 4, 16));
  EXPECT_DOUBLE_EQ(est->mechanism_info()[0].nominal_eta, 20.0);
}

TEST(NoiseScaleTest, FrozenValues) {
  // Evaluated independently at 30 significant digits.
  EXPECT_NEAR(WishfulNoiseScale(16, 8, 1.0, 0.1), 82.97537634387528, 1e-9);
  EXPECT_NEAR(SingleNoiseScale(16, 8, 1.0, 0.1), 599.4938450961413, 1e-8);
  EXPECT_NEAR(MultiNoiseScale(3, 16, 8, 1.0, 0.1), 223.79394342020074, 1e-9);
  EXPECT_NEAR(FullNoiseScale(4, 64, 100, 1.0, 0.1), 4476.504189520065, 1e-7);
  EXPECT_NEAR(FullNoiseScale(1, 64, 100, 1.0, 0.1), 107.01398665684615, 1e-9);
  EXPECT_NEAR(FullNoiseScale(0, 64, 100, 1.0, 0.1), 107.01398665684615, 1e-9);
}

TEST(NoiseScaleTest, MultiLevelOneIsFarBelowSingleAtLargeM) {
  const double ratio = MultiNoiseScale(1, 1024, 100, 1.0, 0.1) /
                       SingleNoiseScale(1024, 100, 1.0, 0.1);
  EXPECT_LT(ratio, 1.0 / 8);
  EXPECT_NEAR(ratio, 0.023639781425877919, 1e-12);
}

TEST(NoiseScaleTest, EstimatorsReportClosedForms) {
  auto single = MakeEstimator(Config(Algorithm::kSingle, 8, 16));
  ASSERT_EQ(single->mechanisms().size(), 1u);
  EXPECT_DOUBLE_EQ(single->mechanism_info()[0].nominal_eta,
                   SingleNoiseScale(16, 8, 1.0, 0.1));
  auto multi = MakeEstimator(Config(Algorithm::kMulti, 8, 16));
  ASSERT_EQ(multi->mechanisms().size(), 5u);
  for (int l = 0; l <= 4; ++l) {
    EXPECT_DOUBLE_EQ(multi->mechanism_info()[l].nominal_eta,
                     MultiNoiseScale(l, 16, 8, 1.0, 0.1));
  }
  auto full = MakeEstimator(Config(Algorithm::kFull, 100, 64));
  ASSERT_EQ(full->mechanisms().size(), 7u);
  for (int l = 0; l <= 6; ++l) {
    EXPECT_DOUBLE_EQ(full->mechanism_info()[l].nominal_eta,
                     FullNoiseScale(l, 64, 100, 1.0, 0.1));
  }
}

// --- Naive and wishful -----------------------------------------------------

TEST(NaiveEstimatorTest, NoiselessRunningMean) {
  const auto trace =
      RunEstimator(Config(Algorithm::kNaive, 1, 4, 4),
                   FromValues({1, 1, 1, 1}, {1, 0, 1, 1}), Noiseless());
  ASSERT_EQ(trace.size(), 4u);
  EXPECT_DOUBLE_EQ(trace[0].estimate, 1.0);
  EXPECT_DOUBLE_EQ(trace[1].estimate, 0.5);
  EXPECT_DOUBLE_EQ(trace[2].estimate, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(trace[3].estimate, 0.75);
}

TEST(NaiveEstimatorTest, RejectsEventsBeyondT) {
  auto est = MakeEstimator(Config(Algorithm::kNaive, 2, 2, 2), Noiseless());
  est->Step({1, 1, 1.0});
  est->Step({2, 2, 1.0});
  EXPECT_THROW(est->Step({3, 2, 1.0}), PreconditionViolation);
}

TEST(WishfulEstimatorTest, OutputsPriorUntilFirstBlock) {
  EstimatorConfig c = Config(Algorithm::kWishful, 3, 4, 12);
  c.prior = 0.3;
  const Stream s = Generate(0.9, 3, 4, 12, {OrderingKind::kContiguous}, 1);
  const auto trace = RunEstimator(c, s);
  for (int t = 0; t < 3; ++t) {
    EXPECT_EQ(trace[t].estimate, 0.3);
    EXPECT_TRUE(trace[t].from_prior);
  }
  EXPECT_FALSE(trace[3].from_prior);
}

TEST(WishfulEstimatorTest, NoiselessMeanAtBlockBoundaries) {
  EstimatorConfig c = Config(Algorithm::kWishful, 5, 4, 20);
  const Stream s = Generate(0.5, 5, 4, 20, {OrderingKind::kContiguous}, 3);
  const auto trace = RunEstimator(c, s, Noiseless(false));
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sum += s[i].value;
    if ((i + 1) % 4 == 0) {
      EXPECT_DOUBLE_EQ(trace[i].estimate, sum / (i + 1)) << "t=" << i + 1;
      EXPECT_EQ(trace[i].total, i + 1);
    }
  }
}

TEST(WishfulEstimatorTest, RejectsInterleavedUsers) {
  EstimatorConfig c = Config(Algorithm::kWishful, 3, 4, 12);
  const Stream s = Generate(0.5, 3, 4, 12, {OrderingKind::kRoundRobin}, 3);
  EXPECT_THROW(RunEstimator(c, s), PreconditionViolation);
}

TEST(WishfulEstimatorTest, RejectsReturningUser) {
  EstimatorConfig c = Config(Algorithm::kWishful, 3, 2, 6);
  const Stream s = FromValues({1, 1, 1}, {1, 1, 1});
  c.m = 2;
  auto est = MakeEstimator(c);
  est->Step(s[0]);
  est->Step(s[1]);
  EXPECT_THROW(est->Step(s[2]), PreconditionViolation);
}

// --- Single and multi ------------------------------------------------------

TEST(SingleCounterTest, SingleUserTwoSamples) {
  const auto trace = RunEstimator(Config(Algorithm::kSingle, 1, 2),
                                  FromValues({1, 1}, {1, 1}), Noiseless());
  EXPECT_EQ(trace[0].total, 1u);
  EXPECT_EQ(trace[1].total, 2u);
  EXPECT_DOUBLE_EQ(trace[1].estimate, 1.0);
}

TEST(MultiCounterTest, OnlyLevelsUpToLogMaxCountHoldElements) {
  const Stream s = Generate(0.5, 6, 32, 150, {OrderingKind::kUniformRandom}, 4);
  auto est = MakeEstimator(Config(Algorithm::kMulti, 6, 32), Noiseless());
  for (const StreamEvent& e : s) {
    const StepRecord r = est->Step(e);
    const int top = std::bit_width(r.max_count) - 1;
    for (int l = top + 1; l <= 5; ++l) {
      ASSERT_EQ(est->mechanisms()[l].size(), 0u) << "t=" << r.t;
    }
  }
}

TEST(PriorEstimatorsTest, NoiselessUnclippedMatchesOracle) {
  Rng pick(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t n = 1 + pick.UniformIndex(12);
    const std::uint64_t m = 2 + pick.UniformIndex(40);
    const std::uint64_t T = 1 + pick.UniformIndex(n * m);
    const Stream s =
        Generate(0.4, n, m, T, {OrderingKind::kUniformRandom}, trial);
    const auto oracle = ReleasedMeanOracle(s);
    for (Algorithm a : {Algorithm::kSingle, Algorithm::kMulti}) {
      const auto trace = RunEstimator(Config(a, n, m), s, Noiseless(false));
      for (std::size_t i = 0; i < s.size(); ++i) {
        ASSERT_EQ(trace[i].total, oracle[i].total);
        ASSERT_EQ(trace[i].estimate, oracle[i].estimate);
      }
    }
  }
}

TEST(PriorEstimatorsTest, TotalAtLeastHalfOfT) {
  Rng pick(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t n = 1 + pick.UniformIndex(10);
    const std::uint64_t m = 2 + pick.UniformIndex(30);
    const Stream s =
        Generate(0.5, n, m, n * m, {OrderingKind::kUniformRandom}, trial);
    for (Algorithm a : {Algorithm::kSingle, Algorithm::kMulti}) {
      for (const StepRecord& r : RunEstimator(Config(a, n, m), s)) {
        ASSERT_GE(2 * r.total, r.t);
      }
    }
  }
}

TEST(PriorEstimatorsTest, WrongPriorTruncates) {
  EstimatorConfig c = Config(Algorithm::kSingle, 1, 64);
  c.prior = 0.0;
  const Stream s = Generate(1.0, 1, 64, 64, {OrderingKind::kContiguous}, 1);
  bool truncated = false;
  for (const StepRecord& r : RunEstimator(c, s, Noiseless())) {
    truncated = truncated || r.truncated;
  }
  EXPECT_TRUE(truncated);
}

// --- Denominator accounting ------------------------------------------------

TEST(AccountingTest, TotalPlusWithheldPlusBufferedIsT) {
  Rng pick(71);
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t n = 1 + pick.UniformIndex(8);
    const std::uint64_t m = 2 + pick.UniformIndex(20);
    const std::uint64_t T = n * m;
    const Stream s =
        Generate(0.5, n, m, T, {OrderingKind::kUniformRandom}, trial);
    for (Algorithm a : {Algorithm::kNaive, Algorithm::kSingle,
                        Algorithm::kMulti, Algorithm::kFull}) {
      EstimatorConfig c = Config(a, n, m, T);
      if (a == Algorithm::kFull) c.eps = 1e4;
      auto est = MakeEstimator(c);
      for (const StreamEvent& e : s) {
        const StepRecord r = est->Step(e);
        ASSERT_EQ(r.total + est->withheld_samples() + est->buffered_samples(),
                  r.t)
            << AlgorithmName(a);
      }
    }
  }
}

// --- Full estimator --------------------------------------------------------

TEST(FullEstimatorTest, LowLevelsActiveFromTheStart) {
  auto est = MakeEstimator(Config(Algorithm::kFull, 10, 16));
  EXPECT_EQ(est->inactive_levels(), (std::vector<int>{2, 3, 4}));
  EXPECT_EQ(est->active_mask(), 0b11u);
}

TEST(FullEstimatorTest, ActivationThresholdFrozenValues) {
  // m = 64, eps = 1, delta = 0.1 (L = 6), evaluated independently.
  EXPECT_EQ(FullActivationThreshold(2, 64, 1.0, 0.1), 2262.0);
  EXPECT_EQ(FullActivationThreshold(3, 64, 1.0, 0.1), 4788.0);
  EXPECT_EQ(FullActivationThreshold(4, 64, 1.0, 0.1), 10112.0);
  EXPECT_EQ(FullActivationThreshold(5, 64, 1.0, 0.1), 21280.0);
  EXPECT_EQ(FullActivationThreshold(6, 64, 1.0, 0.1), 44704.0);
}

TEST(FullEstimatorTest, TwoSingleSampleUsersActivateLevelTwo) {
  // eps = 32 L ln(3L * 2 / delta) makes k = 1, so the level-2 threshold is 2.
  EstimatorConfig c = Config(Algorithm::kFull, 4, 16);
  c.eps = 32.0 * 4 * std::log(3.0 * 4 * 2 / 0.1);
  EXPECT_NEAR(c.eps, 701.5217821877749, 1e-9);
  EXPECT_EQ(FullActivationThreshold(2, 16, c.eps, c.delta), 2.0);
  auto est = MakeEstimator(c);
  est->Step({1, 1, 1.0});
  EXPECT_EQ(est->inactive_levels().front(), 2);
  est->Step({2, 2, 0.0});
  EXPECT_NE(est->inactive_levels().front(), 2);
  EXPECT_EQ(est->priors().count(2), 1u);
}

TEST(FullEstimatorTest, NoDataFlagBeforeFirstRelease) {
  // Every first sample is released at level 0, so the estimator always has
  // data; the fallback only shows up in a fresh record.
  auto est = MakeEstimator(Config(Algorithm::kFull, 2, 4), Noiseless());
  const StepRecord r = est->Step({1, 1, 1.0});
  EXPECT_FALSE(r.no_data);
  EXPECT_EQ(r.estimate, 1.0);
}

TEST(FullEstimatorTest, WorksWithOneSamplePerUser) {
  const Stream s = Generate(0.5, 10, 1, 10, {OrderingKind::kRoundRobin}, 1);
  const auto trace = RunEstimator(Config(Algorithm::kFull, 10, 1), s,
                                  Noiseless());
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sum += s[i].value;
    EXPECT_DOUBLE_EQ(trace[i].estimate, sum / (i + 1));
  }
}

TEST(FullEstimatorTest, NoiselessForcedPriorsMatchOracle) {
  Rng pick(13);
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t n = 2 + pick.UniformIndex(30);
    const std::uint64_t m = 2 + pick.UniformIndex(30);
    EstimatorConfig c = Config(Algorithm::kFull, n, m);
    c.eps = trial % 2 == 0 ? 1.0 : 2e4;
    const Stream s =
        Generate(0.6, n, m, n * m, {OrderingKind::kUniformRandom}, trial);
    EstimatorOptions o = Noiseless(false);
    for (int l = 2; l <= 6; ++l) o.forced_priors[l] = 0.6;
    const auto oracle = ReleasedMeanOracle(s, Thresholds(m, c.eps, c.delta));
    const auto trace = RunEstimator(c, s, o);
    for (std::size_t i = 0; i < s.size(); ++i) {
      ASSERT_EQ(trace[i].total, oracle[i].total) << "t=" << i + 1;
      ASSERT_EQ(trace[i].estimate, oracle[i].estimate) << "t=" << i + 1;
    }
  }
}

TEST(FullEstimatorTest, BudgetSumsToEps) {
  for (std::uint64_t m : {2, 3, 16, 100, 1024}) {
    EstimatorConfig c = Config(Algorithm::kFull, 10, m);
    c.eps = 0.7;
    auto est = MakeEstimator(c);
    EXPECT_NEAR(est->budget().spent(), 0.7, 1e-12) << "m=" << m;
    const int big_l = CeilLog2(m);
    EXPECT_EQ(est->budget().entries().size(),
              static_cast<std::size_t>(2 * big_l + 1));
  }
}

// --- Diversity -------------------------------------------------------------

TEST(DiversityTest, SingleUserIsNeverDiverse) {
  UserLedger ledger;
  for (int i = 0; i < 64; ++i) {
    ledger.OnSample(1, 1.0);
    EXPECT_FALSE(CheckDiversity(ledger, 1.0, 0.1, 64).satisfied);
  }
}

TEST(DiversityTest, BoundaryCase) {
  // Counts 4, 4, 2 with m = 4: lhs = 6, rhs = 2 * (16/eps) * 4 ln(60).
  const std::map<UserId, std::uint64_t> counts = {{1, 4}, {2, 4}, {3, 2}};
  const DiversityReport low = CheckDiversity(counts, 100.0, 0.1, 4);
  EXPECT_DOUBLE_EQ(low.lhs, 6.0);
  EXPECT_NEAR(low.rhs, 6.127989430761019, 1e-12);
  EXPECT_FALSE(low.satisfied);
  EXPECT_FALSE(CheckDiversity(counts, 102.133, 0.1, 4).satisfied);
  EXPECT_TRUE(CheckDiversity(counts, 102.134, 0.1, 4).satisfied);
  EXPECT_TRUE(CheckDiversity(counts, 1000.0, 0.1, 4).satisfied);
}

TEST(DiversityTest, SufficientConditionHolds) {
  // ceil((16/eps) 2L ln(3L sqrt(M)/delta)) users each with M/2 samples.
  const double eps = 50.0, delta = 0.1;
  const std::uint64_t m = 16, big_m = 16;
  const double need = 16.0 / eps * 2 * 4 * std::log(3.0 * 4 * 4 / delta);
  std::map<UserId, std::uint64_t> counts = {{1, big_m}};
  for (UserId u = 2; u <= 1 + static_cast<UserId>(std::ceil(need)); ++u) {
    counts[u] = big_m / 2;
  }
  EXPECT_TRUE(CheckDiversity(counts, eps, delta, m).satisfied);
}

TEST(DiversityTest, EmptyLedgerThrows) {
  EXPECT_THROW(CheckDiversity(UserLedger(), 1.0, 0.1, 4), InvalidArgument);
}

TEST(DiversityTest, StepRecordAgreesWithChecker) {
  const Stream s = Generate(0.5, 20, 8, 160, {OrderingKind::kUniformRandom}, 2);
  EstimatorConfig c = Config(Algorithm::kFull, 20, 8);
  c.eps = 300.0;
  auto est = MakeEstimator(c);
  for (const StreamEvent& e : s) {
    const StepRecord r = est->Step(e);
    ASSERT_EQ(r.diverse,
              CheckDiversity(est->ledger(), c.eps, c.delta, c.m).satisfied);
  }
}

// --- Trace output ----------------------------------------------------------

TEST(TraceTest, HeaderAndRow) {
  StepRecord r;
  r.t = 3;
  r.user = 2;
  r.estimate = 0.25;
  r.total = 2;
  r.max_count = 2;
  r.active_levels = 0b11;
  r.truncated = true;
  std::ostringstream out;
  WriteTrace({r}, out);
  EXPECT_EQ(out.str(),
            "t,user,estimate,total,M_t,flags\n"
            "3,2,0.25,2,2,truncated|active=0.1\n");
}

TEST(TraceTest, FlagsAreCommaFree) {
  StepRecord r;
  r.no_data = r.from_prior = r.truncated = r.diverse = r.out_of_range = true;
  EXPECT_EQ(FormatFlags(r),
            "no-data|prior|truncated|diverse|out-of-range|active=none");
}

}  // namespace
}  // namespace uldp

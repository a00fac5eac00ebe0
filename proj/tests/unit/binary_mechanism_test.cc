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

#include "uldp/binary_mechanism.hpp"

#include <bit>
#include <cmath>
#include <sstream>
#include <vector>

#include "gtest/gtest.h"
#include "uldp/errors.hpp"

namespace uldp {
namespace {

BinaryMechanism Noiseless() { return BinaryMechanism({0.0}, Rng(0), "bm"); }

TEST(DecomposeTest, BlocksFollowSetBitsFromTheTop) {
  EXPECT_EQ(Decompose(1), (std::vector<Block>{{1, 1}}));
  EXPECT_EQ(Decompose(4), (std::vector<Block>{{1, 4}}));
  EXPECT_EQ(Decompose(7), (std::vector<Block>{{1, 4}, {5, 6}, {7, 7}}));
  EXPECT_EQ(Decompose(12), (std::vector<Block>{{1, 8}, {9, 12}}));
  EXPECT_THROW(Decompose(0), InvalidArgument);
}

TEST(DecomposeTest, BlocksTileThePrefix) {
  for (std::uint64_t k = 1; k <= 2048; ++k) {
    const auto blocks = Decompose(k);
    ASSERT_EQ(blocks.size(), static_cast<std::size_t>(std::popcount(k)));
    std::uint64_t next = 1;
    for (const Block& b : blocks) {
      ASSERT_EQ(b.start, next);
      next = b.end + 1;
    }
    ASSERT_EQ(next, k + 1);
  }
}

TEST(PartialSumBlockTest, CoversLowestSetBit) {
  EXPECT_EQ(PartialSumBlock(1), (Block{1, 1}));
  EXPECT_EQ(PartialSumBlock(6), (Block{5, 6}));
  EXPECT_EQ(PartialSumBlock(8), (Block{1, 8}));
  EXPECT_EQ(PartialSumBlock(12).size(), 4u);
}

TEST(AuditInfluenceTest, SmallTreeByHand) {
  // Length 4: element 1 lies in blocks of partial sums 1, 2 and 4.
  EXPECT_EQ(AuditInfluence(4, 1), 3u);
  EXPECT_EQ(AuditInfluence(4, 2), 2u);
  EXPECT_EQ(AuditInfluence(4, 3), 2u);
  EXPECT_EQ(AuditInfluence(4, 4), 1u);
  EXPECT_THROW(AuditInfluence(4, 0), InvalidArgument);
  EXPECT_THROW(AuditInfluence(4, 5), InvalidArgument);
}

TEST(AuditInfluenceTest, MatchesDirectBlockMembership) {
  const std::uint64_t length = 100;
  for (std::uint64_t e = 1; e <= length; ++e) {
    std::uint64_t direct = 0;
    for (std::uint64_t k = 1; k <= length; ++k) {
      const Block b = PartialSumBlock(k);
      direct += b.start <= e && e <= b.end;
    }
    ASSERT_EQ(AuditInfluence(length, e), direct) << "element " << e;
  }
}

TEST(BinaryMechanismTest, EmptySumIsZero) {
  EXPECT_EQ(Noiseless().Sum(), 0.0);
}

TEST(BinaryMechanismTest, NoiselessSumIsPrefixSum) {
  BinaryMechanism mech = Noiseless();
  const std::vector<double> xs = {1, 0, 3.5, 2, 0.25, 7, 1, 1, 0};
  double expected = 0.0;
  for (double x : xs) {
    mech.Append(x);
    expected += x;
    EXPECT_DOUBLE_EQ(mech.Sum(), expected);
  }
  EXPECT_EQ(mech.size(), xs.size());
}

TEST(BinaryMechanismTest, PartialSumsHoldBlockSums) {
  BinaryMechanism mech = Noiseless();
  for (double x : {1.0, 2.0, 4.0, 8.0}) mech.Append(x);
  EXPECT_EQ(mech.noisy_partial_sums(), (std::vector<double>{1, 3, 4, 15}));
}

TEST(BinaryMechanismTest, NoiseIsDeterministicUnderSeed) {
  BinaryMechanism a({1.0}, Rng(5)), b({1.0}, Rng(5));
  for (int i = 0; i < 50; ++i) {
    a.Append(1.0);
    b.Append(1.0);
  }
  EXPECT_EQ(a.noisy_partial_sums(), b.noisy_partial_sums());
  EXPECT_NE(a.Sum(), 50.0);
}

TEST(BinaryMechanismTest, SumErrorScalesWithLogLength) {
  // Sum at k = 2^j - 1 adds j independent Lap(1) draws: variance 2j.
  const int j = 10;
  const std::uint64_t k = (1u << j) - 1;
  double sq = 0.0;
  const int trials = 400;
  for (int s = 0; s < trials; ++s) {
    BinaryMechanism mech({1.0}, Rng(1000 + s));
    for (std::uint64_t i = 0; i < k; ++i) mech.Append(0.0);
    sq += mech.Sum() * mech.Sum();
  }
  EXPECT_NEAR(sq / trials, 2.0 * j, 0.35 * 2.0 * j);
}

TEST(BinaryMechanismTest, RejectsNegativeScale) {
  EXPECT_THROW(BinaryMechanism({-1.0}, Rng(0)), InvalidArgument);
}

TEST(BinaryMechanismTest, DumpCsvListsBlocks) {
  BinaryMechanism mech = Noiseless();
  for (double x : {1.0, 0.5, 2.0}) mech.Append(x);
  std::ostringstream out;
  mech.DumpCsv(out);
  EXPECT_EQ(out.str(),
            "index,block_start,block_end,noisy_value\n"
            "1,1,1,1\n"
            "2,1,2,1.5\n"
            "3,3,3,2\n");
}

}  // namespace
}  // namespace uldp

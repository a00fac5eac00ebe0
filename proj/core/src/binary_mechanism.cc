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
#include <charconv>
#include <cmath>

#include "uldp/errors.hpp"

namespace uldp {

std::vector<Block> Decompose(std::uint64_t k) {
  if (k == 0) throw InvalidArgument("Decompose: k must be positive");
  std::vector<Block> blocks;
  blocks.reserve(std::popcount(k));
  std::uint64_t covered = 0;
  for (int j = 63; j >= 0; --j) {
    const std::uint64_t bit = std::uint64_t{1} << j;
    if ((k & bit) == 0) continue;
    blocks.push_back({covered + 1, covered + bit});
    covered += bit;
  }
  return blocks;
}

Block PartialSumBlock(std::uint64_t k) {
  if (k == 0) throw InvalidArgument("PartialSumBlock: k must be positive");
  const std::uint64_t low = k & (~k + 1);
  return {k - low + 1, k};
}

std::uint64_t AuditInfluence(std::uint64_t length, std::uint64_t element) {
  if (element == 0 || element > length) {
    throw InvalidArgument("AuditInfluence: element index out of range");
  }
  // Blocks covering `element` end at element, then at each ancestor obtained
  // by adding the lowest set bit.
  std::uint64_t count = 0;
  for (std::uint64_t k = element; k <= length; k += k & (~k + 1)) {
    ++count;
    if (k > (std::uint64_t{1} << 62)) break;
  }
  return count;
}

BinaryMechanism::BinaryMechanism(NoiseScale eta, Rng rng, std::string label)
    : eta_(eta), rng_(rng), label_(std::move(label)) {
  if (!(eta.b >= 0.0) || !std::isfinite(eta.b)) {
    throw InvalidArgument("binary mechanism noise scale must be nonnegative");
  }
}

void BinaryMechanism::Append(double x) {
  stream_.push_back(x);
  const Block block = PartialSumBlock(stream_.size());
  double sum = 0.0;
  for (std::uint64_t i = block.start; i <= block.end; ++i) {
    sum += stream_[i - 1];
  }
  partial_.push_back(sum + SampleLaplace(eta_, rng_));
}

double BinaryMechanism::Sum() const {
  const std::uint64_t k = stream_.size();
  double sum = 0.0;
  std::uint64_t index = 0;
  for (int j = 63; j >= 0; --j) {
    const std::uint64_t bit = std::uint64_t{1} << j;
    if ((k & bit) == 0) continue;
    index += bit;
    sum += partial_[index - 1];
  }
  return sum;
}

void BinaryMechanism::DumpCsv(std::ostream& out) const {
  out << "index,block_start,block_end,noisy_value\n";
  char buf[64];
  for (std::uint64_t k = 1; k <= partial_.size(); ++k) {
    const Block block = PartialSumBlock(k);
    auto res = std::to_chars(buf, buf + sizeof(buf), partial_[k - 1]);
    out << k << ',' << block.start << ',' << block.end << ','
        << std::string_view(buf, res.ptr - buf) << '\n';
  }
}

}  // namespace uldp

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

#ifndef ULDP_BINARY_MECHANISM_HPP_
#define ULDP_BINARY_MECHANISM_HPP_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "uldp/noise.hpp"

namespace uldp {

// A run of stream positions [start, end], 1-based and inclusive.
struct Block {
  std::uint64_t start;
  std::uint64_t end;

  std::uint64_t size() const { return end - start + 1; }
  bool operator==(const Block&) const = default;
};

// Dyadic blocks given by the set bits of k, most significant first. They are
// disjoint, contiguous and cover [1, k]. Throws InvalidArgument for k == 0.
std::vector<Block> Decompose(std::uint64_t k);

// The block whose noisy sum is written when element k arrives: the latest
// 2^j elements, where j is the lowest set bit of k.
Block PartialSumBlock(std::uint64_t k);

// Number of noisy partial sums of a length-`length` mechanism whose block
// covers `element`. Throws InvalidArgument unless 1 <= element <= length.
std::uint64_t AuditInfluence(std::uint64_t length, std::uint64_t element);

// Tree-aggregation counter. Each append writes one noisy partial sum over a
// dyadic block; Sum() recombines at most popcount(k) of them. The mechanism
// has no horizon: its owner sets the noise scale from its own bound on the
// number of elements.
class BinaryMechanism {
 public:
  BinaryMechanism(NoiseScale eta, Rng rng, std::string label = "");

  void Append(double x);

  // Noisy running sum of all appended elements; 0 for an empty stream.
  double Sum() const;

  std::uint64_t size() const { return stream_.size(); }
  NoiseScale eta() const { return eta_; }
  const std::string& label() const { return label_; }
  const std::vector<double>& stream() const { return stream_; }
  const std::vector<double>& noisy_partial_sums() const { return partial_; }

  // CSV rows "index,block_start,block_end,noisy_value" with a header line.
  void DumpCsv(std::ostream& out) const;

 private:
  NoiseScale eta_;
  Rng rng_;
  std::string label_;
  std::vector<double> stream_;
  std::vector<double> partial_;
};

}  // namespace uldp

#endif  // ULDP_BINARY_MECHANISM_HPP_

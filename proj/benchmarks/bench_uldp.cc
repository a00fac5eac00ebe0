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

#include <benchmark/benchmark.h>

#include "uldp/binary_mechanism.hpp"
#include "uldp/estimators.hpp"
#include "uldp/median.hpp"
#include "uldp/streams.hpp"

namespace {

void BM_BinaryMechanismAppend(benchmark::State& state) {
  const auto length = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    uldp::BinaryMechanism mech(uldp::NoiseScale{1.0}, uldp::Rng(7), "bench");
    for (std::uint64_t i = 0; i < length; ++i) mech.Append(1.0);
    benchmark::DoNotOptimize(mech.Sum());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BinaryMechanismAppend)->Range(1 << 10, 1 << 16);

void BM_EstimatorStep(benchmark::State& state) {
  const auto algorithm = static_cast<uldp::Algorithm>(state.range(0));
  uldp::EstimatorConfig config;
  config.algorithm = algorithm;
  config.n = 200;
  config.m = 64;
  config.T = config.n * config.m;
  if (algorithm == uldp::Algorithm::kSingle ||
      algorithm == uldp::Algorithm::kMulti) {
    config.prior = 0.5;
  }
  const uldp::Stream stream =
      uldp::Generate(0.5, config.n, config.m, config.T,
                     {uldp::OrderingKind::kRoundRobin}, 3);
  for (auto _ : state) {
    auto estimator = uldp::MakeEstimator(config);
    double last = 0.0;
    for (const auto& e : stream) last = estimator->Step(e).estimate;
    benchmark::DoNotOptimize(last);
  }
  state.SetItemsProcessed(state.iterations() * stream.size());
  state.SetLabel(uldp::AlgorithmName(algorithm));
}
BENCHMARK(BM_EstimatorStep)
    ->Arg(static_cast<int>(uldp::Algorithm::kNaive))
    ->Arg(static_cast<int>(uldp::Algorithm::kSingle))
    ->Arg(static_cast<int>(uldp::Algorithm::kMulti))
    ->Arg(static_cast<int>(uldp::Algorithm::kFull));

void BM_PrivateMedian(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  const std::uint64_t k = uldp::ArrayCountInt(8.0, level, 0.1);
  const std::uint64_t per_user = std::uint64_t{1} << (level - 1);
  const uldp::Stream stream = uldp::Generate(
      0.3, k, per_user, k * per_user, {uldp::OrderingKind::kContiguous}, 5);
  const uldp::UserSamples samples = uldp::GroupByUser(stream);
  uldp::Rng rng(11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        uldp::PrivateMedian(samples, 8.0, level, 0.1, rng));
  }
}
BENCHMARK(BM_PrivateMedian)->DenseRange(2, 10, 4);

}  // namespace

BENCHMARK_MAIN();

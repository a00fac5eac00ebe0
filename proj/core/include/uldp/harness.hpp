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

#ifndef ULDP_HARNESS_HPP_
#define ULDP_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "uldp/estimators.hpp"
#include "uldp/streams.hpp"

namespace uldp {

struct ExperimentSpec {
  EstimatorConfig config;  // config.T is the generated stream length
  double mu = 0.5;
  OrderingSpec ordering;
  std::uint64_t trials = 1;
  // Empty means every power of two up to T, plus T itself.
  std::vector<std::uint64_t> checkpoints;
  bool noiseless = false;
  bool keep_traces = true;

  void Validate() const;
  std::vector<std::uint64_t> EffectiveCheckpoints() const;
};

// Sets one field from its textual form. Keys: algorithm, n, m, T, eps,
// delta, prior ("none" clears it), seed, mu, ordering, ordering_file,
// prefix_len, trials, checkpoints (comma list), noiseless.
void SetSpecField(ExperimentSpec& spec, const std::string& key,
                  const std::string& value);

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

// Flat key = value file. '#' starts a comment. "output_dir" is carried
// separately; "sweep.<key> = a, b, c" declares a sweep axis over <key>.
struct ParsedConfig {
  ExperimentSpec spec;
  std::string output_dir;
  std::vector<SweepAxis> axes;
};

ParsedConfig ParseConfig(std::istream& in);
ParsedConfig ParseConfig(const std::filesystem::path& path);

struct CheckpointSummary {
  std::uint64_t t = 0;
  double median_abs_error = 0.0;
  double q10_abs_error = 0.0;
  double q90_abs_error = 0.0;
};

struct ExperimentResult {
  std::vector<std::vector<StepRecord>> traces;  // empty unless keep_traces
  std::vector<CheckpointSummary> summary;
  // abs_errors[c][trial]: |estimate - mu| at checkpoint c.
  std::vector<std::vector<double>> abs_errors;
};

// Seeds of trial i: stream DeriveSeed(DeriveSeed(seed, i), 0), estimator
// DeriveSeed(DeriveSeed(seed, i), 1).
ExperimentResult RunExperiment(const ExperimentSpec& spec);

// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
double Quantile(std::vector<double> values, double q);

void WriteSummary(const std::vector<CheckpointSummary>& summary,
                  std::ostream& out);
// summary.csv plus trace_<trial>.csv per kept trace.
void WriteExperiment(const ExperimentResult& result,
                     const std::filesystem::path& dir);

struct SweepPoint {
  std::vector<std::string> values;  // one per axis
  std::vector<CheckpointSummary> summary;
};

struct SweepResult {
  std::vector<std::string> keys;
  std::vector<SweepPoint> points;
};

// Cartesian product over the axes, first axis slowest. Throws
// InvalidArgument if there are no axes or any axis is empty.
SweepResult Sweep(const ExperimentSpec& base,
                  const std::vector<SweepAxis>& axes);
void WriteSweep(const SweepResult& result, std::ostream& out);

// One mechanism's diff between a stream and one of its neighbors.
struct AuditEntry {
  std::string mechanism;
  int level = 0;
  std::uint64_t prefix = 0;  // stream length the entry refers to
  std::uint64_t changed_count = 0;
  double l1_shift = 0.0;
  double max_entry_shift = 0.0;
  double count_bound = 0.0;
  double l1_bound = 0.0;
  bool pass = false;

  // max(changed/count_bound, l1/l1_bound); at most 1 when within bounds.
  double tightness() const;
};

struct AuditReport {
  // Per mechanism, the entry closest to (or furthest past) its bound.
  std::vector<AuditEntry> worst;
  // The first failing entries, capped at kMaxListedFailures.
  std::vector<AuditEntry> failures;
  std::uint64_t failure_count = 0;
  std::uint64_t pairs = 0;
  // Every mechanism's nominal noise equals its l1 bound over its budget
  // share and matches the closed-form noise scale.
  bool noise_calibrated = false;
  bool pass = false;

  static constexpr std::size_t kMaxListedFailures = 20;

  void Add(const AuditEntry& entry);
  void Merge(const AuditReport& other);
};

struct AuditOptions {
  // Diff every pair of assignments of the changed user's values instead of
  // the base stream against each assignment.
  bool all_pairs = false;
  // Also audit every prefix of the stream. For naive, a prefix of length t
  // is held to the bounds of a horizon T = t.
  bool per_prefix = false;
};

// Diffs every mechanism's partial sums between `base` and `neighbor`, both
// run without noise. Throws InvalidArgument unless the two streams share
// their user sequence and differ in the values of at most one user. For the
// full estimator the neighbor reuses the base run's priors.
std::vector<AuditEntry> AuditPair(const EstimatorConfig& config,
                                  const Stream& base, const Stream& neighbor);

// Audits every {0,1} assignment of changed_user's values. Other users keep
// their base values and every run reuses the base run's priors. The user may
// own at most 20 samples, or 12 with all_pairs.
AuditReport AuditSensitivity(const EstimatorConfig& config,
                             const Stream& base, UserId changed_user,
                             const AuditOptions& options = {});

// AuditSensitivity for every user of `base`, merged.
AuditReport AuditAllUsers(const EstimatorConfig& config, const Stream& base,
                          const AuditOptions& options = {});

void WriteAuditReport(const AuditReport& report, std::ostream& out);

}  // namespace uldp

#endif  // ULDP_HARNESS_HPP_

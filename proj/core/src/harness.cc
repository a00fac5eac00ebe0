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

#include "uldp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "uldp/errors.hpp"
#include "uldp/noise.hpp"

namespace uldp {
namespace {

constexpr std::size_t kMaxAuditSamples = 20;
constexpr std::size_t kMaxAllPairsSamples = 12;

bool WithinBound(double value, double bound) {
  return value <= bound * (1.0 + 1e-9) + 1e-9;
}

bool Close(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

double ClosedFormNoise(const EstimatorConfig& c, int level) {
  switch (c.algorithm) {
    case Algorithm::kNaive:
      return NaiveNoiseScale(c.m, c.T, c.eps);
    case Algorithm::kWishful:
      return WishfulNoiseScale(c.m, c.n, c.eps, c.delta);
    case Algorithm::kSingle:
      return SingleNoiseScale(c.m, c.n, c.eps, c.delta);
    case Algorithm::kMulti:
      return MultiNoiseScale(level, c.m, c.n, c.eps, c.delta);
    case Algorithm::kFull:
      return FullNoiseScale(level, c.m, c.n, c.eps, c.delta);
  }
  return 0.0;
}

// Runs the stream to completion and returns the finished estimator.
std::unique_ptr<Estimator> Replay(const EstimatorConfig& config,
                                  const Stream& stream,
                                  const EstimatorOptions& options) {
  auto estimator = MakeEstimator(config, options);
  for (const StreamEvent& e : stream) estimator->Step(e);
  return estimator;
}

void CheckAuditable(const EstimatorConfig& config) {
  if (config.algorithm == Algorithm::kWishful) {
    throw InvalidArgument("the sensitivity audit does not cover wishful");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Experiments

void ExperimentSpec::Validate() const {
  config.Validate();
  if (config.T < 1) throw InvalidArgument("experiment needs T >= 1");
  if (trials < 1) throw InvalidArgument("trials must be at least 1");
  if (!(mu >= 0.0 && mu <= 1.0)) throw InvalidArgument("mu must lie in [0, 1]");
  for (std::uint64_t t : checkpoints) {
    if (t < 1 || t > config.T) {
      throw InvalidArgument("checkpoint " + std::to_string(t) +
                            " outside [1, T]");
    }
  }
}

std::vector<std::uint64_t> ExperimentSpec::EffectiveCheckpoints() const {
  std::vector<std::uint64_t> out = checkpoints;
  if (out.empty()) {
    for (std::uint64_t t = 1; t <= config.T; t *= 2) {
      out.push_back(t);
      if (t > config.T / 2) break;
    }
    if (out.back() != config.T) out.push_back(config.T);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double Quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

ExperimentResult RunExperiment(const ExperimentSpec& spec) {
  spec.Validate();
  const std::vector<std::uint64_t> checkpoints = spec.EffectiveCheckpoints();
  EstimatorOptions options;
  options.noiseless = spec.noiseless;

  ExperimentResult result;
  result.abs_errors.assign(checkpoints.size(), {});
  for (std::uint64_t trial = 0; trial < spec.trials; ++trial) {
    const std::uint64_t trial_seed = DeriveSeed(spec.config.seed, trial);
    const Stream stream =
        Generate(spec.mu, spec.config.n, spec.config.m, spec.config.T,
                 spec.ordering, DeriveSeed(trial_seed, 0));
    EstimatorConfig config = spec.config;
    config.seed = DeriveSeed(trial_seed, 1);
    auto estimator = MakeEstimator(config, options);

    std::vector<StepRecord> trace;
    if (spec.keep_traces) trace.reserve(stream.size());
    std::size_t next = 0;
    for (const StreamEvent& e : stream) {
      const StepRecord r = estimator->Step(e);
      while (next < checkpoints.size() && checkpoints[next] == r.t) {
        result.abs_errors[next].push_back(std::fabs(r.estimate - spec.mu));
        ++next;
      }
      if (spec.keep_traces) trace.push_back(r);
    }
    if (spec.keep_traces) result.traces.push_back(std::move(trace));
  }

  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const auto& errors = result.abs_errors[c];
    result.summary.push_back({checkpoints[c], Quantile(errors, 0.5),
                              Quantile(errors, 0.1), Quantile(errors, 0.9)});
  }
  return result;
}

namespace {

void WriteSummaryRow(const CheckpointSummary& s, std::ostream& out) {
  out << s.t << ',' << FormatDouble(s.median_abs_error) << ','
      << FormatDouble(s.q10_abs_error) << ',' << FormatDouble(s.q90_abs_error)
      << '\n';
}

constexpr const char* kSummaryColumns =
    "t,median_abs_error,q10_abs_error,q90_abs_error";

}  // namespace

void WriteSummary(const std::vector<CheckpointSummary>& summary,
                  std::ostream& out) {
  out << kSummaryColumns << '\n';
  for (const CheckpointSummary& s : summary) WriteSummaryRow(s, out);
}

void WriteExperiment(const ExperimentResult& result,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "summary.csv");
    if (!out) throw InvalidArgument("cannot write " + (dir / "summary.csv").string());
    WriteSummary(result.summary, out);
  }
  const int width =
      std::max<int>(3, std::to_string(result.traces.size()).size());
  for (std::size_t i = 0; i < result.traces.size(); ++i) {
    std::ostringstream name;
    name << "trace_" << std::setw(width) << std::setfill('0') << i << ".csv";
    std::ofstream out(dir / name.str());
    if (!out) throw InvalidArgument("cannot write " + (dir / name.str()).string());
    WriteTrace(result.traces[i], out);
  }
}

// ---------------------------------------------------------------------------
// Sweeps

SweepResult Sweep(const ExperimentSpec& base,
                  const std::vector<SweepAxis>& axes) {
  if (axes.empty()) throw InvalidArgument("sweep grid has no axes");
  for (const SweepAxis& axis : axes) {
    if (axis.values.empty()) {
      throw InvalidArgument("sweep axis '" + axis.key + "' has no values");
    }
  }
  SweepResult result;
  for (const SweepAxis& axis : axes) result.keys.push_back(axis.key);

  std::vector<std::size_t> index(axes.size(), 0);
  while (true) {
    ExperimentSpec spec = base;
    spec.keep_traces = false;
    SweepPoint point;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const std::string& value = axes[a].values[index[a]];
      SetSpecField(spec, axes[a].key, value);
      point.values.push_back(value);
    }
    point.summary = RunExperiment(spec).summary;
    result.points.push_back(std::move(point));

    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++index[a] < axes[a].values.size()) break;
      index[a] = 0;
      if (a == 0) return result;
    }
  }
}

void WriteSweep(const SweepResult& result, std::ostream& out) {
  for (const std::string& key : result.keys) out << key << ',';
  out << kSummaryColumns << '\n';
  for (const SweepPoint& point : result.points) {
    for (const CheckpointSummary& s : point.summary) {
      for (const std::string& v : point.values) out << v << ',';
      WriteSummaryRow(s, out);
    }
  }
}

// ---------------------------------------------------------------------------
// Sensitivity audit

double AuditEntry::tightness() const {
  auto ratio = [](double value, double bound) {
    if (bound > 0.0) return value / bound;
    return value > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  };
  return std::max(ratio(static_cast<double>(changed_count), count_bound),
                  ratio(l1_shift, l1_bound));
}

void AuditReport::Add(const AuditEntry& entry) {
  auto it = std::find_if(worst.begin(), worst.end(), [&](const AuditEntry& w) {
    return w.mechanism == entry.mechanism;
  });
  if (it == worst.end()) {
    worst.push_back(entry);
  } else if (entry.tightness() > it->tightness()) {
    *it = entry;
  }
  if (!entry.pass) {
    ++failure_count;
    if (failures.size() < kMaxListedFailures) failures.push_back(entry);
  }
}

void AuditReport::Merge(const AuditReport& other) {
  for (const AuditEntry& w : other.worst) {
    auto it = std::find_if(worst.begin(), worst.end(), [&](const AuditEntry& x) {
      return x.mechanism == w.mechanism;
    });
    if (it == worst.end()) {
      worst.push_back(w);
    } else if (w.tightness() > it->tightness()) {
      *it = w;
    }
  }
  for (const AuditEntry& f : other.failures) {
    if (failures.size() < kMaxListedFailures) failures.push_back(f);
  }
  failure_count += other.failure_count;
  pairs += other.pairs;
  noise_calibrated = noise_calibrated && other.noise_calibrated;
  pass = noise_calibrated && failure_count == 0;
}

namespace {

// Partial sums of every mechanism after a noiseless run.
using Capture = std::vector<std::vector<double>>;

Capture CaptureRun(const EstimatorConfig& config, const Stream& stream,
                   const EstimatorOptions& options,
                   std::vector<std::vector<std::size_t>>* sizes = nullptr) {
  auto estimator = MakeEstimator(config, options);
  for (const StreamEvent& e : stream) {
    estimator->Step(e);
    if (sizes != nullptr) {
      std::vector<std::size_t> row;
      for (const BinaryMechanism& mech : estimator->mechanisms()) {
        row.push_back(mech.size());
      }
      sizes->push_back(std::move(row));
    }
  }
  Capture out;
  for (const BinaryMechanism& mech : estimator->mechanisms()) {
    out.push_back(mech.noisy_partial_sums());
  }
  return out;
}

void CheckNeighbors(const Stream& base, const Stream& neighbor) {
  if (base.size() != neighbor.size()) {
    throw InvalidArgument("neighbor streams must have equal length");
  }
  bool have_changed = false;
  UserId changed = 0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i].t != neighbor[i].t || base[i].user != neighbor[i].user) {
      throw InvalidArgument("neighbor streams must share their user sequence");
    }
    if (base[i].value == neighbor[i].value) continue;
    if (have_changed && base[i].user != changed) {
      throw InvalidArgument("streams differ in more than one user");
    }
    have_changed = true;
    changed = base[i].user;
  }
}

// Bounds per prefix length. Only naive depends on the horizon.
class BoundTable {
 public:
  BoundTable(const EstimatorConfig& config, std::uint64_t length,
             bool per_prefix) {
    const std::uint64_t first = per_prefix ? 1 : length;
    EstimatorOptions options;
    options.noiseless = true;
    for (std::uint64_t t = first; t <= length; ++t) {
      EstimatorConfig c = config;
      if (config.algorithm == Algorithm::kNaive && per_prefix) c.T = t;
      info_.push_back(MakeEstimator(c, options)->mechanism_info());
      if (config.algorithm != Algorithm::kNaive || !per_prefix) break;
    }
  }

  const std::vector<MechanismInfo>& At(std::uint64_t t) const {
    if (info_.size() == 1) return info_.front();
    return info_[t - 1];
  }

 private:
  std::vector<std::vector<MechanismInfo>> info_;
};

// Diffs two captures at the requested prefixes and records every entry.
void DiffCaptures(const Capture& a, const Capture& b,
                  const std::vector<std::vector<std::size_t>>& sizes,
                  const BoundTable& bounds, bool per_prefix,
                  AuditReport& report) {
  const std::size_t mechs = a.size();
  std::vector<std::vector<std::uint64_t>> cum_count(mechs);
  std::vector<std::vector<double>> cum_l1(mechs), cum_max(mechs);
  for (std::size_t k = 0; k < mechs; ++k) {
    const std::size_t len = a[k].size();
    cum_count[k].assign(len + 1, 0);
    cum_l1[k].assign(len + 1, 0.0);
    cum_max[k].assign(len + 1, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
      const double shift = std::fabs(a[k][i] - b[k][i]);
      cum_count[k][i + 1] = cum_count[k][i] + (shift != 0.0);
      cum_l1[k][i + 1] = cum_l1[k][i] + shift;
      cum_max[k][i + 1] = std::max(cum_max[k][i], shift);
    }
  }
  const std::uint64_t length = sizes.size();
  const std::uint64_t first = per_prefix ? 1 : length;
  auto make_entry = [&](std::size_t k, std::uint64_t t) {
    const MechanismInfo& info = bounds.At(t)[k];
    const std::size_t upto = sizes[t - 1][k];
    AuditEntry e;
    e.mechanism = info.label;
    e.level = info.level;
    e.prefix = t;
    e.changed_count = cum_count[k][upto];
    e.l1_shift = cum_l1[k][upto];
    e.max_entry_shift = cum_max[k][upto];
    e.count_bound = info.count_bound;
    e.l1_bound = info.l1_bound;
    e.pass = WithinBound(static_cast<double>(e.changed_count), e.count_bound) &&
             WithinBound(e.l1_shift, e.l1_bound);
    return e;
  };
  // Failing entries are recorded as found; of the passing ones only the
  // tightest prefix per mechanism can matter to the report.
  for (std::size_t k = 0; k < mechs; ++k) {
    std::uint64_t best_t = 0;
    double best = -1.0;
    for (std::uint64_t t = first; t <= length; ++t) {
      const MechanismInfo& info = bounds.At(t)[k];
      const std::size_t upto = sizes[t - 1][k];
      const double count = static_cast<double>(cum_count[k][upto]);
      const double l1 = cum_l1[k][upto];
      if (!WithinBound(count, info.count_bound) ||
          !WithinBound(l1, info.l1_bound)) {
        report.Add(make_entry(k, t));
        continue;
      }
      const double tight =
          std::max(info.count_bound > 0.0 ? count / info.count_bound : 0.0,
                   info.l1_bound > 0.0 ? l1 / info.l1_bound : 0.0);
      if (tight > best) {
        best = tight;
        best_t = t;
      }
    }
    if (best_t != 0) report.Add(make_entry(k, best_t));
  }
  ++report.pairs;
}

bool NoiseCalibrated(const EstimatorConfig& config) {
  EstimatorOptions options;
  options.noiseless = true;
  auto estimator = MakeEstimator(config, options);
  for (const MechanismInfo& info : estimator->mechanism_info()) {
    if (!Close(info.nominal_eta, info.l1_bound / info.eps_share)) return false;
    if (!Close(info.nominal_eta, ClosedFormNoise(config, info.level))) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::vector<AuditEntry> AuditPair(const EstimatorConfig& config,
                                  const Stream& base, const Stream& neighbor) {
  CheckAuditable(config);
  CheckNeighbors(base, neighbor);
  EstimatorOptions options;
  options.noiseless = true;
  options.forced_priors = Replay(config, base, options)->priors();
  std::vector<std::vector<std::size_t>> sizes;
  const Capture a = CaptureRun(config, base, options, &sizes);
  const Capture b = CaptureRun(config, neighbor, options);
  AuditReport report;
  if (!base.empty()) {
    DiffCaptures(a, b, sizes, BoundTable(config, base.size(), false), false,
                 report);
  }
  // A single pair yields one entry per mechanism; `worst` holds exactly them.
  return report.worst;
}

AuditReport AuditSensitivity(const EstimatorConfig& config, const Stream& base,
                             UserId changed_user, const AuditOptions& options) {
  CheckAuditable(config);
  AuditReport report;
  report.noise_calibrated = NoiseCalibrated(config);
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i].user == changed_user) positions.push_back(i);
  }
  const std::size_t limit =
      options.all_pairs ? kMaxAllPairsSamples : kMaxAuditSamples;
  if (positions.size() > limit) {
    throw InvalidArgument("user " + std::to_string(changed_user) + " owns " +
                          std::to_string(positions.size()) +
                          " samples; the audit enumerates at most " +
                          std::to_string(limit));
  }
  if (base.empty()) {
    report.pass = report.noise_calibrated;
    return report;
  }

  EstimatorOptions run_options;
  run_options.noiseless = true;
  run_options.forced_priors = Replay(config, base, run_options)->priors();
  std::vector<std::vector<std::size_t>> sizes;
  const Capture base_capture = CaptureRun(config, base, run_options, &sizes);
  const BoundTable bounds(config, base.size(), options.per_prefix);

  const std::uint64_t combos = std::uint64_t{1} << positions.size();
  std::vector<Capture> captures;
  Stream neighbor = base;
  for (std::uint64_t bits = 0; bits < combos; ++bits) {
    for (std::size_t j = 0; j < positions.size(); ++j) {
      neighbor[positions[j]].value = static_cast<double>((bits >> j) & 1);
    }
    Capture c = CaptureRun(config, neighbor, run_options);
    if (options.all_pairs) {
      captures.push_back(std::move(c));
    } else {
      DiffCaptures(base_capture, c, sizes, bounds, options.per_prefix, report);
    }
  }
  for (std::size_t i = 0; i < captures.size(); ++i) {
    for (std::size_t j = i + 1; j < captures.size(); ++j) {
      DiffCaptures(captures[i], captures[j], sizes, bounds, options.per_prefix,
                   report);
    }
  }
  report.pass = report.noise_calibrated && report.failure_count == 0;
  return report;
}

AuditReport AuditAllUsers(const EstimatorConfig& config, const Stream& base,
                          const AuditOptions& options) {
  CheckAuditable(config);
  AuditReport report;
  report.noise_calibrated = NoiseCalibrated(config);
  std::vector<UserId> users;
  for (const StreamEvent& e : base) users.push_back(e.user);
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  for (UserId u : users) {
    report.Merge(AuditSensitivity(config, base, u, options));
  }
  report.pass = report.noise_calibrated && report.failure_count == 0;
  return report;
}

namespace {

void WriteAuditRow(const AuditEntry& e, std::ostream& out) {
  out << e.mechanism << ',' << e.level << ',' << e.prefix << ','
      << e.changed_count << ',' << FormatDouble(e.count_bound) << ','
      << FormatDouble(e.l1_shift) << ',' << FormatDouble(e.l1_bound) << ','
      << FormatDouble(e.max_entry_shift) << ',' << (e.pass ? "yes" : "no")
      << '\n';
}

}  // namespace

void WriteAuditReport(const AuditReport& report, std::ostream& out) {
  out << "kind,mechanism,level,prefix,changed_count,count_bound,l1_shift,"
         "l1_bound,max_entry_shift,pass\n";
  for (const AuditEntry& w : report.worst) {
    out << "worst,";
    WriteAuditRow(w, out);
  }
  for (const AuditEntry& f : report.failures) {
    out << "failure,";
    WriteAuditRow(f, out);
  }
  out << "# pairs=" << report.pairs << " failures=" << report.failure_count
      << " noise_calibrated=" << (report.noise_calibrated ? "yes" : "no")
      << " result=" << (report.pass ? "pass" : "fail") << '\n';
}

}  // namespace uldp

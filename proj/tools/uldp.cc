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

// Command-line driver: generate streams, run experiments, audit the noise
// calibration and sweep parameter grids.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uldp/errors.hpp"
#include "uldp/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPrecondition = 2;
constexpr int kExitAuditFailure = 3;

constexpr const char* kOutputDirEnv = "ULDP_OUTPUT_DIR";

struct SpecArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

void AddSpecArgs(CLI::App* cmd, SpecArgs& args) {
  cmd->add_option("config", args.config_path, "key = value experiment file")
      ->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", args.overrides,
                  "override one key, e.g. --set eps=2 (repeatable)");
}

uldp::ParsedConfig LoadSpec(const SpecArgs& args) {
  uldp::ParsedConfig parsed;
  if (!args.config_path.empty()) parsed = uldp::ParseConfig(args.config_path);
  for (const std::string& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw uldp::InvalidArgument("--set expects key=value, got '" + kv + "'");
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (key == "output_dir") {
      parsed.output_dir = value;
    } else {
      uldp::SetSpecField(parsed.spec, key, value);
    }
  }
  return parsed;
}

std::filesystem::path OutputDir(const std::string& flag,
                                const uldp::ParsedConfig& parsed) {
  if (!flag.empty()) return flag;
  if (!parsed.output_dir.empty()) return parsed.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "uldp_out";
}

int Generate(const SpecArgs& args, const std::string& out_path) {
  const uldp::ParsedConfig parsed = LoadSpec(args);
  const uldp::ExperimentSpec& spec = parsed.spec;
  const uldp::Stream stream =
      uldp::Generate(spec.mu, spec.config.n, spec.config.m, spec.config.T,
                     spec.ordering, spec.config.seed);
  if (out_path.empty() || out_path == "-") {
    uldp::WriteStream(stream, std::cout);
  } else {
    uldp::WriteStream(stream, std::filesystem::path(out_path));
  }
  return kExitOk;
}

int Run(const SpecArgs& args, const std::string& out_flag,
        const std::string& stream_path) {
  const uldp::ParsedConfig parsed = LoadSpec(args);
  const std::filesystem::path dir = OutputDir(out_flag, parsed);
  if (!stream_path.empty()) {
    // One estimator over a recorded stream; the trace goes to the output dir.
    const uldp::Stream stream = uldp::ReadStream(stream_path);
    uldp::EstimatorOptions options;
    options.noiseless = parsed.spec.noiseless;
    const auto trace = uldp::RunEstimator(parsed.spec.config, stream, options);
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "trace.csv");
    uldp::WriteTrace(trace, out);
    std::cout << "wrote " << (dir / "trace.csv").string() << '\n';
    return kExitOk;
  }
  const uldp::ExperimentResult result = uldp::RunExperiment(parsed.spec);
  uldp::WriteExperiment(result, dir);
  uldp::WriteSummary(result.summary, std::cout);
  return kExitOk;
}

int Audit(const SpecArgs& args, const std::string& stream_path,
          std::uint64_t user, const uldp::AuditOptions& options) {
  const uldp::ParsedConfig parsed = LoadSpec(args);
  const uldp::ExperimentSpec& spec = parsed.spec;
  const uldp::Stream stream =
      stream_path.empty()
          ? uldp::Generate(spec.mu, spec.config.n, spec.config.m,
                           spec.config.T, spec.ordering, spec.config.seed)
          : uldp::ReadStream(stream_path);
  const uldp::AuditReport report =
      user == 0 ? uldp::AuditAllUsers(spec.config, stream, options)
                : uldp::AuditSensitivity(spec.config, stream, user, options);
  uldp::WriteAuditReport(report, std::cout);
  return report.pass ? kExitOk : kExitAuditFailure;
}

int Sweep(const SpecArgs& args, const std::string& out_flag) {
  const uldp::ParsedConfig parsed = LoadSpec(args);
  const uldp::SweepResult result = uldp::Sweep(parsed.spec, parsed.axes);
  const std::filesystem::path dir = OutputDir(out_flag, parsed);
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "sweep.csv");
  uldp::WriteSweep(result, out);
  uldp::WriteSweep(result, std::cout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continual mean estimation under user-level differential "
               "privacy"};
  app.require_subcommand(1);

  SpecArgs gen_args, run_args, audit_args, sweep_args;
  std::string gen_out, run_out, run_stream, audit_stream, sweep_out;
  std::uint64_t audit_user = 0;
  uldp::AuditOptions audit_options;

  CLI::App* gen = app.add_subcommand("generate", "write a synthetic stream");
  AddSpecArgs(gen, gen_args);
  gen->add_option("-o,--output", gen_out, "stream CSV path ('-' for stdout)");

  CLI::App* run = app.add_subcommand("run", "run an experiment");
  AddSpecArgs(run, run_args);
  run->add_option("-o,--output-dir", run_out,
                  std::string("output directory (default: $") + kOutputDirEnv +
                      " or ./uldp_out)");
  run->add_option("--stream", run_stream,
                  "run one estimator over this stream CSV instead")
      ->check(CLI::ExistingFile);

  CLI::App* audit =
      app.add_subcommand("audit", "brute-force sensitivity audit");
  AddSpecArgs(audit, audit_args);
  audit->add_option("--stream", audit_stream, "base stream CSV")
      ->check(CLI::ExistingFile);
  audit->add_option("--user", audit_user,
                    "user to perturb (default: every user)");
  audit->add_flag("--all-pairs", audit_options.all_pairs,
                  "diff every pair of value assignments, not just base vs "
                  "neighbor");
  audit->add_flag("--per-prefix", audit_options.per_prefix,
                  "also audit every prefix of the stream");

  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter grid");
  AddSpecArgs(sweep, sweep_args);
  sweep->add_option("-o,--output-dir", sweep_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return Generate(gen_args, gen_out);
    if (run->parsed()) return Run(run_args, run_out, run_stream);
    if (audit->parsed()) return Audit(audit_args, audit_stream, audit_user,
                                       audit_options);
    if (sweep->parsed()) return Sweep(sweep_args, sweep_out);
  } catch (const uldp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPrecondition;
  }
  return kExitUsage;
}

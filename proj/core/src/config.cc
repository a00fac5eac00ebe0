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

#include <charconv>
#include <fstream>
#include <string_view>

#include "uldp/errors.hpp"
#include "uldp/harness.hpp"

namespace uldp {
namespace {

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> SplitList(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = value.find(',', start);
    const std::size_t end = comma == std::string::npos ? value.size() : comma;
    std::string item = Trim(std::string_view(value).substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw InvalidArgument("bad value '" + value + "' for " + key);
  }
  return out;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InvalidArgument("bad boolean '" + value + "' for " + key);
}

}  // namespace

void SetSpecField(ExperimentSpec& spec, const std::string& key,
                  const std::string& value) {
  EstimatorConfig& c = spec.config;
  if (key == "algorithm") {
    c.algorithm = ParseAlgorithm(value);
  } else if (key == "n") {
    c.n = ParseNumber<std::uint64_t>(key, value);
  } else if (key == "m") {
    c.m = ParseNumber<std::uint64_t>(key, value);
  } else if (key == "T") {
    c.T = ParseNumber<std::uint64_t>(key, value);
  } else if (key == "eps") {
    c.eps = ParseNumber<double>(key, value);
  } else if (key == "delta") {
    c.delta = ParseNumber<double>(key, value);
  } else if (key == "prior") {
    if (value == "none") {
      c.prior.reset();
    } else {
      c.prior = ParseNumber<double>(key, value);
    }
  } else if (key == "seed") {
    c.seed = ParseNumber<std::uint64_t>(key, value);
  } else if (key == "mu") {
    spec.mu = ParseNumber<double>(key, value);
  } else if (key == "ordering") {
    spec.ordering.kind = ParseOrderingKind(value);
  } else if (key == "ordering_file") {
    spec.ordering.path = value;
  } else if (key == "prefix_len") {
    spec.ordering.prefix_length = ParseNumber<std::uint64_t>(key, value);
  } else if (key == "trials") {
    spec.trials = ParseNumber<std::uint64_t>(key, value);
  } else if (key == "checkpoints") {
    spec.checkpoints.clear();
    for (const std::string& item : SplitList(value)) {
      spec.checkpoints.push_back(ParseNumber<std::uint64_t>(key, item));
    }
  } else if (key == "noiseless") {
    spec.noiseless = ParseBool(key, value);
  } else {
    throw InvalidArgument("unknown key '" + key + "'");
  }
}

ParsedConfig ParseConfig(std::istream& in) {
  ParsedConfig parsed;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string body = Trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    const std::string key = Trim(std::string_view(body).substr(0, eq));
    const std::string value = Trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "missing key");
    try {
      if (key == "output_dir") {
        parsed.output_dir = value;
      } else if (key.starts_with("sweep.")) {
        parsed.axes.push_back({key.substr(6), SplitList(value)});
      } else {
        SetSpecField(parsed.spec, key, value);
      }
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return parsed;
}

ParsedConfig ParseConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return ParseConfig(in);
}

}  // namespace uldp

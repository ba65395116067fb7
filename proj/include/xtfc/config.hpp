// Copyright 2026 The xtfc-hjb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "xtfc/problem.hpp"
#include "xtfc/sim.hpp"
#include "xtfc/train.hpp"

namespace xtfc {

/// Config problems, reported with the offending line when one is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// A parsed value: number, boolean, string, or array of numbers.
using ConfigScalar = std::variant<double, bool, std::string, std::vector<double>>;

struct ConfigEntry {
  ConfigScalar value;
  std::string raw;  // value text as written
  int line = 0;
};

/// Sectioned `key = value` document (a TOML subset):
///
///   # comment
///   [train]
///   adam_epochs = 5000
///   sampling = "uniform_random"
///   domain_lower = [-1.0, -1.0]
struct ConfigDocument {
  std::string source;
  std::map<std::string, std::map<std::string, ConfigEntry>> sections;
  std::map<std::string, int> section_lines;
};

ConfigDocument parse_config_document(const std::string& text,
                                     const std::string& source = "<config>");

struct RunConfig {
  ProblemConfig problem;
  TrainConfig train;
  SimOptions sim;
  std::optional<Vec> x0;
  int mc_count = 50;
  std::uint64_t mc_seed = 0;
  std::optional<Vec> ic_lower;
  std::optional<Vec> ic_upper;
  std::string output_dir = "runs/latest";
};

/// Builds a RunConfig from a document. Unknown sections or keys, wrong value
/// types and out-of-range values raise ConfigError naming the line.
RunConfig run_config_from_document(const ConfigDocument& doc);
RunConfig parse_run_config(const std::string& text,
                           const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Effective configuration with every default spelled out; parsing the
/// result yields an identical RunConfig.
std::string render_run_config(const RunConfig& config);

}  // namespace xtfc

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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "xtfc/checkpoint.hpp"
#include "xtfc/config.hpp"

namespace xtfc::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Flags shared by the subcommands; unset values fall back to the config or
/// the checkpoint.
struct CommonFlags {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy_mode;
  std::optional<int> threads;
};

struct TrainArgs {
  CommonFlags common;
};

struct AxisSpec {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
};
/// "lo:hi:count" per axis, comma separated, e.g. "-1:1:101,-1:1:101".
std::vector<AxisSpec> parse_grid_spec(const std::string& spec);

struct EvaluateArgs {
  CommonFlags common;
  std::filesystem::path checkpoint;
  std::optional<std::string> grid;
};

struct SimulateArgs {
  CommonFlags common;
  std::filesystem::path checkpoint;
  std::optional<std::string> x0;
  std::optional<double> dt;
  std::optional<double> t_max;
  std::optional<double> stop_tol;
  bool compare_exact = false;
};

struct MonteCarloArgs {
  CommonFlags common;
  std::filesystem::path checkpoint;
  std::optional<int> count;
  std::optional<double> dt;
  std::optional<double> t_max;
  std::optional<double> stop_tol;
};

struct SweepArgs {
  CommonFlags common;
  std::vector<int> widths;
  bool parallel = false;
};

struct EvaluationSummary {
  std::size_t points = 0;
  bool has_exact = false;
  double max_abs_error = 0.0;
  double rms_error = 0.0;
  bool outside_domain = false;
};

/// V on a tensor grid, with the analytic value and error when one exists.
EvaluationSummary evaluate_on_grid(const Checkpoint& ckpt,
                                   const std::vector<AxisSpec>& grid,
                                   std::ostream* csv);

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);
int cmd_montecarlo(const MonteCarloArgs& args, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace xtfc::cli

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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "xtfc/problem.hpp"
#include "xtfc/sim.hpp"
#include "xtfc/train.hpp"

namespace xtfc {

/// Shortest decimal text that reads back to exactly `v` (17 significant
/// digits at most).
std::string format_double(double v);

nlohmann::json to_json(const Mat& m);
Mat matrix_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Vec& v);
Vec vector_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ProblemConfig& p);
ProblemConfig problem_config_from_json(const nlohmann::json& j);

/// Training configuration. `include_threads` is off for checkpoints, whose
/// bytes must not depend on the worker count.
nlohmann::json to_json(const TrainConfig& c, bool include_threads = true);
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainReport& r);
nlohmann::json to_json(const MonteCarloReport& r);

/// epoch,loss,stage,lr
void write_loss_history_csv(std::ostream& out, const TrainReport& report);
/// t,x1..xn,u1..um,cost_so_far
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// Plain numeric CSV reader: header plus rows of numbers (non-numeric cells
/// become NaN). Used for round-trip checks.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv(std::istream& in);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace xtfc

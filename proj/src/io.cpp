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

#include "xtfc/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace xtfc {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

nlohmann::json to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const nlohmann::json& j) {
  require(j.is_array(), "expected a matrix (array of rows)");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    require(j[i].is_array() && static_cast<Eigen::Index>(j[i].size()) == cols,
            "ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

nlohmann::json to_json(const Vec& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vec vector_from_json(const nlohmann::json& j) {
  require(j.is_array(), "expected a vector");
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json to_json(const ProblemConfig& p) {
  nlohmann::json j;
  j["name"] = p.name;
  if (p.name == "pendulum") {
    j["pendulum"] = {
        {"mass", p.pendulum.mass},
        {"length", p.pendulum.length},
        {"inertia_com", p.pendulum.inertia_com},
        {"gravity", p.pendulum.gravity},
        {"q", to_json(p.pendulum.q)},
        {"r_weight", p.pendulum.r_weight},
        {"torque_limit", p.pendulum.torque_limit},
        {"domain_lower", to_json(p.pendulum.domain_lower)},
        {"domain_upper", to_json(p.pendulum.domain_upper)},
    };
  }
  if (p.name == "detumbling") {
    j["detumbling"] = {
        {"inertia", to_json(p.detumbling.inertia)},
        {"q", to_json(p.detumbling.q)},
        {"r", to_json(p.detumbling.r)},
        {"domain_lower", to_json(p.detumbling.domain_lower)},
        {"domain_upper", to_json(p.detumbling.domain_upper)},
    };
  }
  if (p.domain_lower) j["domain_lower"] = to_json(*p.domain_lower);
  if (p.domain_upper) j["domain_upper"] = to_json(*p.domain_upper);
  if (p.u_min) j["u_min"] = to_json(*p.u_min);
  if (p.u_max) j["u_max"] = to_json(*p.u_max);
  return j;
}

ProblemConfig problem_config_from_json(const nlohmann::json& j) {
  ProblemConfig p;
  p.name = j.at("name").get<std::string>();
  if (j.contains("pendulum")) {
    const auto& q = j["pendulum"];
    p.pendulum.mass = q.at("mass").get<double>();
    p.pendulum.length = q.at("length").get<double>();
    p.pendulum.inertia_com = q.at("inertia_com").get<double>();
    p.pendulum.gravity = q.at("gravity").get<double>();
    p.pendulum.q = matrix_from_json(q.at("q"));
    p.pendulum.r_weight = q.at("r_weight").get<double>();
    p.pendulum.torque_limit = q.at("torque_limit").get<double>();
    p.pendulum.domain_lower = vector_from_json(q.at("domain_lower"));
    p.pendulum.domain_upper = vector_from_json(q.at("domain_upper"));
  }
  if (j.contains("detumbling")) {
    const auto& d = j["detumbling"];
    p.detumbling.inertia = matrix_from_json(d.at("inertia"));
    p.detumbling.q = matrix_from_json(d.at("q"));
    p.detumbling.r = matrix_from_json(d.at("r"));
    p.detumbling.domain_lower = vector_from_json(d.at("domain_lower"));
    p.detumbling.domain_upper = vector_from_json(d.at("domain_upper"));
  }
  if (j.contains("domain_lower")) p.domain_lower = vector_from_json(j["domain_lower"]);
  if (j.contains("domain_upper")) p.domain_upper = vector_from_json(j["domain_upper"]);
  if (j.contains("u_min")) p.u_min = vector_from_json(j["u_min"]);
  if (j.contains("u_max")) p.u_max = vector_from_json(j["u_max"]);
  return p;
}

nlohmann::json to_json(const TrainConfig& c, bool include_threads) {
  nlohmann::json j = {
      {"hidden", c.hidden},
      {"weight_scale", c.weight_scale},
      {"num_points", c.num_points},
      {"sampling", to_string(c.sampling)},
      {"seed", c.seed},
      {"init_mode", to_string(c.init_mode)},
      {"ridge", c.ridge},
      {"lambda", c.lambda},
      {"adam_lr", c.adam_lr},
      {"adam_epochs", c.adam_epochs},
      {"scheduler", c.scheduler.enabled ? "plateau_halving" : "none"},
      {"patience", c.scheduler.patience},
      {"factor", c.scheduler.factor},
      {"threshold", c.scheduler.threshold},
      // JSON has no infinity; a null clip bound means clipping is off.
      {"clip_norm", std::isinf(c.clip_norm) ? nlohmann::json(nullptr)
                                            : nlohmann::json(c.clip_norm)},
      {"lbfgs_iters", c.lbfgs_iters},
      {"lbfgs_memory", c.lbfgs_memory},
      {"policy_mode", to_string(c.policy_mode)},
  };
  if (include_threads) j["threads"] = c.threads;
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.hidden = j.at("hidden").get<int>();
  c.weight_scale = j.at("weight_scale").get<double>();
  c.num_points = j.at("num_points").get<int>();
  c.sampling = parse_sampling(j.at("sampling").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.init_mode = parse_init_mode(j.at("init_mode").get<std::string>());
  c.ridge = j.at("ridge").get<double>();
  c.lambda = j.at("lambda").get<double>();
  c.adam_lr = j.at("adam_lr").get<double>();
  c.adam_epochs = j.at("adam_epochs").get<int>();
  c.scheduler.enabled = j.at("scheduler").get<std::string>() == "plateau_halving";
  c.scheduler.patience = j.at("patience").get<int>();
  c.scheduler.factor = j.at("factor").get<double>();
  c.scheduler.threshold = j.at("threshold").get<double>();
  c.clip_norm = j.at("clip_norm").is_null()
                    ? std::numeric_limits<double>::infinity()
                    : j.at("clip_norm").get<double>();
  c.lbfgs_iters = j.at("lbfgs_iters").get<int>();
  c.lbfgs_memory = j.at("lbfgs_memory").get<int>();
  c.policy_mode = parse_policy_mode(j.at("policy_mode").get<std::string>());
  if (j.contains("threads")) c.threads = j["threads"].get<int>();
  return c;
}

nlohmann::json to_json(const TrainReport& r) {
  nlohmann::json j = {
      {"config", to_json(r.config)},
      {"stage1_loss", r.stage1_loss},
      {"adam_loss", r.adam_loss},
      {"final_loss", r.final_loss},
      {"stage_boundaries",
       {{"elm", 0}, {"adam", r.adam_begin}, {"lbfgs", r.lbfgs_begin}}},
      {"epochs_recorded", r.loss_history.size()},
      {"lbfgs_iterations", r.lbfgs_iterations},
      {"wall_time_seconds",
       {{"elm", r.elm_seconds}, {"adam", r.adam_seconds}, {"lbfgs", r.lbfgs_seconds}}},
  };
  nlohmann::json losses = nlohmann::json::array();
  for (const auto& rec : r.loss_history) losses.push_back(rec.loss);
  j["loss_history"] = std::move(losses);
  if (!r.warning.empty()) j["warning"] = r.warning;
  return j;
}

nlohmann::json to_json(const MonteCarloReport& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < r.converged.size(); ++i) {
    nlohmann::json run = {
        {"initial_condition", to_json(Vec(r.initial_conditions.row(
                                  static_cast<Eigen::Index>(i)).transpose()))},
        {"converged", static_cast<bool>(r.converged[i])},
        {"final_norm", r.final_norms[i]},
    };
    run["convergence_time"] = r.convergence_times[i]
                                  ? nlohmann::json(*r.convergence_times[i])
                                  : nlohmann::json(nullptr);
    runs.push_back(std::move(run));
  }
  return {{"count", r.converged.size()},
          {"fraction_converged", r.fraction_converged},
          {"trajectories", std::move(runs)}};
}

void write_loss_history_csv(std::ostream& out, const TrainReport& report) {
  out << "epoch,loss,stage,lr\n";
  for (const auto& rec : report.loss_history) {
    out << rec.epoch << ',' << format_double(rec.loss) << ',' << rec.stage << ','
        << format_double(rec.lr) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << 't';
  for (Eigen::Index k = 0; k < traj.states.cols(); ++k) out << ",x" << k + 1;
  for (Eigen::Index k = 0; k < traj.controls.cols(); ++k) out << ",u" << k + 1;
  out << ",cost_so_far\n";
  for (Eigen::Index i = 0; i < traj.size(); ++i) {
    out << format_double(traj.times[i]);
    for (Eigen::Index k = 0; k < traj.states.cols(); ++k) {
      out << ',' << format_double(traj.states(i, k));
    }
    for (Eigen::Index k = 0; k < traj.controls.cols(); ++k) {
      out << ',' << format_double(traj.controls(i, k));
    }
    out << ',' << format_double(traj.cost_so_far[i]) << '\n';
  }
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::istringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (!std::getline(in, line)) return table;
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) {
      double v = std::nan("");
      std::from_chars(cell.data(), cell.data() + cell.size(), v);
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace xtfc

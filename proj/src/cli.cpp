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

#include "xtfc/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "xtfc/io.hpp"
#include "xtfc/parallel.hpp"
#include "xtfc/policy.hpp"
#include "xtfc/problem.hpp"
#include "xtfc/sim.hpp"
#include "xtfc/train.hpp"

namespace xtfc::cli {
namespace {

namespace fs = std::filesystem;

double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw InvalidArgument("invalid number '" + std::string(text) + "' in " +
                          std::string(what));
  }
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

Vec parse_vector(const std::string& text, std::string_view what) {
  const auto parts = split(text, ',');
  require(!parts.empty() && !text.empty(), std::string(what) + " is empty");
  Vec v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = parse_number(parts[i], what);
  }
  return v;
}

/// Runs `body`, mapping failures onto exit codes and a one-line message.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

void apply_common(RunConfig& rc, const CommonFlags& flags) {
  if (flags.seed) rc.train.seed = *flags.seed;
  if (flags.policy_mode) {
    rc.train.policy_mode = parse_policy_mode(*flags.policy_mode);
  }
  if (flags.threads) {
    require(*flags.threads >= 1, "--threads must be >= 1");
    rc.train.threads = *flags.threads;
  }
}

/// Settings for the commands that start from a trained checkpoint: problem and
/// network come from the checkpoint, run settings from --config when given.
RunConfig checkpoint_run_config(const Checkpoint& ckpt,
                                const CommonFlags& flags) {
  RunConfig rc;
  if (flags.config) rc = load_run_config(*flags.config);
  rc.problem = ckpt.problem;
  const int threads = rc.train.threads;
  rc.train = ckpt.train;
  rc.train.threads = threads;
  rc.train.policy_mode = ckpt.policy_mode;
  if (flags.policy_mode) {
    rc.train.policy_mode = parse_policy_mode(*flags.policy_mode);
  }
  if (flags.threads) {
    require(*flags.threads >= 1, "--threads must be >= 1");
    rc.train.threads = *flags.threads;
  }
  return rc;
}

fs::path output_dir(const CommonFlags& flags, const fs::path& fallback) {
  return flags.out.empty() ? fallback : flags.out;
}

void write_effective_config(const fs::path& dir, RunConfig rc) {
  rc.output_dir = dir.string();
  write_text_file(dir / "config.toml", render_run_config(rc));
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

template <typename Writer>
void write_stream_file(const fs::path& path, Writer&& writer) {
  std::ostringstream buffer;
  writer(buffer);
  write_text_file(path, buffer.str());
}

struct TrainOutcome {
  double final_loss = 0.0;
  Checkpoint checkpoint;
};

TrainOutcome train_into(const RunConfig& rc, const fs::path& dir,
                        std::ostream* log) {
  const OcpInstance problem = make_problem(rc.problem);
  auto [net, report] = train(problem, rc.train, log);

  Checkpoint ckpt;
  ckpt.problem = rc.problem;
  ckpt.elm = net.elm();
  ckpt.beta = net.beta();
  ckpt.policy_mode = rc.train.policy_mode;
  ckpt.train = rc.train;
  ckpt.final_loss = report.final_loss;

  fs::create_directories(dir);
  save_checkpoint(ckpt, dir / "checkpoint.xtfc");
  write_json(dir / "train_report.json", to_json(report));
  write_stream_file(dir / "loss_history.csv", [&](std::ostream& os) {
    write_loss_history_csv(os, report);
  });
  write_effective_config(dir, rc);
  return {report.final_loss, std::move(ckpt)};
}

std::vector<AxisSpec> default_grid(const Domain& domain) {
  const Eigen::Index n = domain.lower().size();
  const int count = n <= 2 ? 101 : 21;
  std::vector<AxisSpec> grid;
  for (Eigen::Index k = 0; k < n; ++k) {
    grid.push_back({domain.lower()[k], domain.upper()[k], count});
  }
  return grid;
}

double axis_value(const AxisSpec& a, int i) {
  if (a.count == 1) return a.lo;
  if (i == a.count - 1) return a.hi;
  return a.lo + (a.hi - a.lo) * static_cast<double>(i) / (a.count - 1);
}

SimOptions sim_options(SimOptions base, std::optional<double> dt,
                       std::optional<double> t_max,
                       std::optional<double> stop_tol) {
  if (dt) base.dt = *dt;
  if (t_max) base.t_max = *t_max;
  if (stop_tol) base.stop_tol = *stop_tol;
  require(base.dt > 0.0, "--dt must be positive");
  require(base.t_max > 0.0, "--t-max must be positive");
  require(base.stop_tol >= 0.0, "--stop-tol must be non-negative");
  return base;
}

std::string trajectory_name(std::size_t index, std::size_t total) {
  const std::size_t width =
      std::max<std::size_t>(3, std::to_string(total > 0 ? total - 1 : 0).size());
  std::ostringstream name;
  name << "traj_" << std::setw(static_cast<int>(width)) << std::setfill('0')
       << index << ".csv";
  return name.str();
}

}  // namespace

std::vector<AxisSpec> parse_grid_spec(const std::string& spec) {
  std::vector<AxisSpec> axes;
  for (const auto& part : split(spec, ',')) {
    const auto fields = split(part, ':');
    require(fields.size() == 3,
            "grid axis '" + part + "' must have the form lo:hi:count");
    AxisSpec a;
    a.lo = parse_number(fields[0], "--grid");
    a.hi = parse_number(fields[1], "--grid");
    const double count = parse_number(fields[2], "--grid");
    require(count >= 1.0 && count == std::floor(count) && count < 1e7,
            "grid axis '" + part + "': count must be a positive integer");
    a.count = static_cast<int>(count);
    require(a.lo <= a.hi, "grid axis '" + part + "': lo must not exceed hi");
    axes.push_back(a);
  }
  require(!axes.empty(), "--grid is empty");
  return axes;
}

EvaluationSummary evaluate_on_grid(const Checkpoint& ckpt,
                                   const std::vector<AxisSpec>& grid,
                                   std::ostream* csv) {
  const OcpInstance problem = make_problem(ckpt.problem);
  const auto n = static_cast<std::size_t>(problem.state_dim());
  require(grid.size() == n, "grid has " + std::to_string(grid.size()) +
                                " axes but the state has dimension " +
                                std::to_string(n));
  const ValueNetwork net = ckpt.network();
  const bool exact = has_exact_solution(ckpt.problem.name);

  EvaluationSummary summary;
  summary.has_exact = exact;
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    if (grid[k].lo < problem.domain().lower()[kk] ||
        grid[k].hi > problem.domain().upper()[kk]) {
      summary.outside_domain = true;
    }
  }

  if (csv) {
    for (std::size_t k = 0; k < n; ++k) *csv << 'x' << k + 1 << ',';
    *csv << "V_xtfc";
    if (exact) *csv << ",V_exact,abs_error";
    *csv << '\n';
  }

  std::size_t total = 1;
  for (const auto& a : grid) total *= static_cast<std::size_t>(a.count);
  std::vector<int> index(n, 0);
  Vec x(static_cast<Eigen::Index>(n));
  double sum_sq = 0.0;
  for (std::size_t p = 0; p < total; ++p) {
    // Last axis varies fastest.
    std::size_t rem = p;
    for (std::size_t k = n; k-- > 0;) {
      const auto c = static_cast<std::size_t>(grid[k].count);
      index[k] = static_cast<int>(rem % c);
      rem /= c;
      x[static_cast<Eigen::Index>(k)] = axis_value(grid[k], index[k]);
    }
    const double v = net.value(x);
    if (csv) {
      for (std::size_t k = 0; k < n; ++k) {
        *csv << format_double(x[static_cast<Eigen::Index>(k)]) << ',';
      }
      *csv << format_double(v);
    }
    if (exact) {
      const double ve = exact_value(ckpt.problem.name, x);
      const double e = std::abs(v - ve);
      summary.max_abs_error = std::max(summary.max_abs_error, e);
      sum_sq += e * e;
      if (csv) *csv << ',' << format_double(ve) << ',' << format_double(e);
    }
    if (csv) *csv << '\n';
  }
  summary.points = total;
  if (exact && total > 0) {
    summary.rms_error = std::sqrt(sum_sq / static_cast<double>(total));
  }
  return summary;
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(args.common.config.has_value(), "train: --config is required");
    RunConfig rc = load_run_config(*args.common.config);
    apply_common(rc, args.common);
    const fs::path dir = output_dir(args.common, rc.output_dir);
    const TrainOutcome outcome = train_into(rc, dir, &err);
    out << "final_loss " << format_double(outcome.final_loss) << "\n";
    out << "checkpoint " << (dir / "checkpoint.xtfc").string() << "\n";
    return kExitOk;
  });
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const Checkpoint ckpt = load_checkpoint(args.checkpoint);
    const RunConfig rc = checkpoint_run_config(ckpt, args.common);
    const OcpInstance problem = make_problem(ckpt.problem);
    const auto grid = args.grid ? parse_grid_spec(*args.grid)
                                : default_grid(problem.domain());
    const fs::path dir =
        output_dir(args.common, args.checkpoint.parent_path() / "evaluate");

    std::ostringstream csv;
    const EvaluationSummary s = evaluate_on_grid(ckpt, grid, &csv);
    write_text_file(dir / "evaluation.csv", csv.str());
    write_effective_config(dir, rc);

    if (s.outside_domain) {
      err << "warning: grid extends outside the training domain\n";
    }
    out << "points " << s.points << "\n";
    if (s.has_exact) {
      out << "max_abs_error " << format_double(s.max_abs_error) << "\n";
      out << "rms_error " << format_double(s.rms_error) << "\n";
    } else {
      out << "no analytic solution for '" << ckpt.problem.name
          << "'; wrote V only\n";
    }
    return kExitOk;
  });
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const Checkpoint ckpt = load_checkpoint(args.checkpoint);
    const RunConfig rc = checkpoint_run_config(ckpt, args.common);
    const OcpInstance problem = make_problem(ckpt.problem);
    const PolicyMode mode = rc.train.policy_mode;
    validate_policy_mode(problem, mode);

    Vec x0;
    if (args.x0) {
      x0 = parse_vector(*args.x0, "--x0");
    } else {
      require(rc.x0.has_value(), "simulate: --x0 is required (or sim.x0 in --config)");
      x0 = *rc.x0;
    }
    require_dim(x0.size(), problem.state_dim(), "--x0");
    if (!problem.domain().contains(x0)) {
      err << "warning: x0 lies outside the training domain\n";
    }
    const SimOptions opts = sim_options(rc.sim, args.dt, args.t_max, args.stop_tol);
    const fs::path dir =
        output_dir(args.common, args.checkpoint.parent_path() / "simulate");

    const Policy learned = synthesize_policy(ckpt.network(), problem, mode);
    const Trajectory traj = rollout(problem, learned, x0, opts);
    write_stream_file(dir / "trajectory.csv",
                      [&](std::ostream& os) { write_trajectory_csv(os, traj); });
    RunConfig echo = rc;
    echo.sim = opts;
    echo.x0 = x0;
    write_effective_config(dir, echo);

    out << "converged " << (traj.converged ? "true" : "false") << "\n";
    out << "final_norm " << format_double(traj.states.row(traj.states.rows() - 1).norm())
        << "\n";
    out << "cost " << format_double(traj.cost_so_far.back()) << "\n";

    if (args.compare_exact) {
      require(has_exact_solution(ckpt.problem.name),
              "no analytic solution for '" + ckpt.problem.name + "'");
      const std::string name = ckpt.problem.name;
      const Policy exact = [name](const Vec& x) { return exact_policy(name, x); };
      const RolloutComparison cmp =
          compare_rollouts(problem, learned, exact, x0, opts.dt, opts.t_max);
      write_stream_file(dir / "trajectory_exact.csv",
                        [&](std::ostream& os) { write_trajectory_csv(os, cmp.b); });
      const double v_star = exact_value(name, x0);
      const double j_learned = cmp.a.cost_so_far.back();
      nlohmann::json j;
      j["x0"] = to_json(x0);
      j["dt"] = opts.dt;
      j["t_max"] = opts.t_max;
      j["max_state_deviation"] = cmp.max_state_deviation;
      j["cost_learned"] = j_learned;
      j["cost_exact_policy"] = cmp.b.cost_so_far.back();
      j["cost_difference"] = cmp.cost_difference;
      j["exact_value"] = v_star;
      j["cost_vs_exact_value"] = j_learned - v_star;
      write_json(dir / "comparison.json", j);
      out << "max_state_deviation " << format_double(cmp.max_state_deviation) << "\n";
      out << "cost_difference " << format_double(cmp.cost_difference) << "\n";
      out << "cost_vs_exact_value " << format_double(j_learned - v_star) << "\n";
    }
    return kExitOk;
  });
}

int cmd_montecarlo(const MonteCarloArgs& args, std::ostream& out,
                   std::ostream& err) {
  return guarded(err, [&] {
    const Checkpoint ckpt = load_checkpoint(args.checkpoint);
    RunConfig rc = checkpoint_run_config(ckpt, args.common);
    const OcpInstance problem = make_problem(ckpt.problem);
    const PolicyMode mode = rc.train.policy_mode;
    validate_policy_mode(problem, mode);

    if (args.count) rc.mc_count = *args.count;
    if (args.common.seed) rc.mc_seed = *args.common.seed;
    require(rc.mc_count >= 1, "--count must be >= 1");
    rc.sim = sim_options(rc.sim, args.dt, args.t_max, args.stop_tol);
    const Vec lo = rc.ic_lower.value_or(problem.domain().lower());
    const Vec hi = rc.ic_upper.value_or(problem.domain().upper());
    require_dim(lo.size(), problem.state_dim(), "sim.ic_lower");
    require_dim(hi.size(), problem.state_dim(), "sim.ic_upper");
    const fs::path dir =
        output_dir(args.common, args.checkpoint.parent_path() / "montecarlo");

    const Mat ics = sample_initial_conditions(lo, hi, rc.mc_count, rc.mc_seed);
    const Policy policy = synthesize_policy(ckpt.network(), problem, mode);
    const MonteCarloResult mc =
        monte_carlo(problem, policy, ics, rc.sim, rc.train.threads);

    const auto total = mc.trajectories.size();
    for (std::size_t i = 0; i < total; ++i) {
      write_stream_file(dir / trajectory_name(i, total), [&](std::ostream& os) {
        write_trajectory_csv(os, mc.trajectories[i]);
      });
    }
    nlohmann::json j = to_json(mc.report);
    j["seed"] = rc.mc_seed;
    j["dt"] = rc.sim.dt;
    j["t_max"] = rc.sim.t_max;
    j["stop_tol"] = rc.sim.stop_tol;
    write_json(dir / "montecarlo.json", j);
    write_effective_config(dir, rc);

    out << "fraction_converged " << format_double(mc.report.fraction_converged)
        << "\n";
    return kExitOk;
  });
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(args.common.config.has_value(), "sweep: --config is required");
    require(!args.widths.empty(), "sweep: --widths is required");
    for (int w : args.widths) require(w >= 1, "sweep: widths must be >= 1");
    RunConfig rc = load_run_config(*args.common.config);
    apply_common(rc, args.common);
    const fs::path dir = output_dir(args.common, rc.output_dir);
    fs::create_directories(dir);

    struct Row {
      std::string status = "pending";
      double final_loss = std::nan("");
    };
    std::vector<Row> rows(args.widths.size());
    std::mutex mutex;

    const auto write_summary = [&] {
      std::ostringstream csv;
      csv << "name,neurons,final_loss,status\n";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        csv << "xtfc_n" << args.widths[i] << ',' << args.widths[i] << ','
            << format_double(rows[i].final_loss) << ',' << rows[i].status
            << '\n';
      }
      write_text_file(dir / "summary.csv", csv.str());
    };
    write_effective_config(dir, rc);

    const auto run_one = [&](std::size_t i) {
      RunConfig one = rc;
      one.train.hidden = args.widths[i];
      if (args.parallel) one.train.threads = 1;
      const fs::path sub = dir / ("n" + std::to_string(args.widths[i]));
      Row row;
      std::ostringstream log;
      try {
        row.final_loss = train_into(one, sub, args.parallel ? nullptr : &err).final_loss;
        row.status = "ok";
      } catch (const NumericalError& e) {
        row.status = "numerical_failure";
        log << "width " << args.widths[i] << ": " << e.what() << "\n";
      }
      std::lock_guard lock(mutex);
      rows[i] = row;
      err << log.str();
      out << "width " << args.widths[i] << " final_loss "
          << format_double(row.final_loss) << " (" << row.status << ")\n";
      write_summary();
    };

    if (args.parallel) {
      parallel_for(args.widths.size(), static_cast<int>(args.widths.size()),
                   run_one);
    } else {
      for (std::size_t i = 0; i < args.widths.size(); ++i) run_one(i);
    }
    write_summary();
    for (const auto& row : rows) {
      if (row.status != "ok") return kExitNumerical;
    }
    return kExitOk;
  });
}

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"X-TFC solver for stationary Hamilton-Jacobi-Bellman equations",
               "xtfc"};
  app.require_subcommand(1);

  const auto add_common = [](CLI::App* sub, CommonFlags& flags) {
    sub->add_option_function<std::string>(
        "--config", [&flags](const std::string& v) { flags.config = v; },
        "TOML run configuration");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&flags](const std::uint64_t& v) { flags.seed = v; },
        "random seed");
    sub->add_option_function<std::string>(
        "--policy-mode",
        [&flags](const std::string& v) { flags.policy_mode = v; },
        "unconstrained, constrained_paper or constrained_clipped");
    sub->add_option_function<int>(
        "--threads", [&flags](const int& v) { flags.threads = v; },
        "worker threads");
  };
  const auto add_sim = [](CLI::App* sub, std::optional<double>& dt,
                          std::optional<double>& t_max,
                          std::optional<double>& stop_tol) {
    sub->add_option_function<double>(
        "--dt", [&dt](const double& v) { dt = v; }, "integration step");
    sub->add_option_function<double>(
        "--t-max", [&t_max](const double& v) { t_max = v; }, "horizon");
    sub->add_option_function<double>(
        "--stop-tol", [&stop_tol](const double& v) { stop_tol = v; },
        "stop once the state norm falls below this");
  };

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a value network");
  add_common(train_cmd, train_args.common);

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate V on a grid");
  add_common(eval_cmd, eval_args.common);
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint)->required();
  eval_cmd->add_option_function<std::string>(
      "--grid", [&](const std::string& v) { eval_args.grid = v; },
      "lo:hi:count per axis, comma separated");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "closed-loop rollout");
  add_common(sim_cmd, sim_args.common);
  sim_cmd->add_option("--checkpoint", sim_args.checkpoint)->required();
  sim_cmd->add_option_function<std::string>(
      "--x0", [&](const std::string& v) { sim_args.x0 = v; },
      "initial state, comma separated");
  add_sim(sim_cmd, sim_args.dt, sim_args.t_max, sim_args.stop_tol);
  sim_cmd->add_flag("--compare-exact", sim_args.compare_exact,
                    "also roll out the analytic policy");

  MonteCarloArgs mc_args;
  auto* mc_cmd = app.add_subcommand("montecarlo", "Monte Carlo convergence study");
  add_common(mc_cmd, mc_args.common);
  mc_cmd->add_option("--checkpoint", mc_args.checkpoint)->required();
  mc_cmd->add_option_function<int>(
      "--count", [&](const int& v) { mc_args.count = v; },
      "number of initial conditions");
  add_sim(mc_cmd, mc_args.dt, mc_args.t_max, mc_args.stop_tol);

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "train one network per hidden width");
  add_common(sweep_cmd, sweep_args.common);
  sweep_cmd->add_option("--widths", sweep_args.widths, "hidden widths")
      ->delimiter(',')
      ->required();
  sweep_cmd->add_flag("--parallel", sweep_args.parallel,
                      "train the widths concurrently");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*train_cmd) return cmd_train(train_args, out, err);
  if (*eval_cmd) return cmd_evaluate(eval_args, out, err);
  if (*sim_cmd) return cmd_simulate(sim_args, out, err);
  if (*mc_cmd) return cmd_montecarlo(mc_args, out, err);
  if (*sweep_cmd) return cmd_sweep(sweep_args, out, err);
  return kExitUsage;
}

}  // namespace xtfc::cli

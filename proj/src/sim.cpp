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

#include "xtfc/sim.hpp"

#include <cmath>
#include <string>

#include "xtfc/numerics.hpp"
#include "xtfc/parallel.hpp"

namespace xtfc {

ControlledField controlled_field(const OcpInstance& problem) {
  return [problem](const Vec& x, const Vec& u) {
    return problem.dynamics(x, u);
  };
}

Vec rk4_step(const ControlledField& f, const Policy& policy, const Vec& x,
             double dt) {
  require(dt > 0.0, "rk4_step: dt must be positive");
  const Vec k1 = f(x, policy(x));
  const Vec x2 = x + 0.5 * dt * k1;
  const Vec k2 = f(x2, policy(x2));
  const Vec x3 = x + 0.5 * dt * k2;
  const Vec k3 = f(x3, policy(x3));
  const Vec x4 = x + dt * k3;
  const Vec k4 = f(x4, policy(x4));
  Vec next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw NumericalError("rk4_step: non-finite state");
  return next;
}

Trajectory rollout(const OcpInstance& problem, const Policy& policy,
                   const Vec& x0, const SimOptions& options) {
  require(options.dt > 0.0, "rollout: dt must be positive");
  require(options.t_max > 0.0, "rollout: t_max must be positive");
  require(options.stop_tol >= 0.0, "rollout: stop_tol must be non-negative");
  require_dim(x0.size(), problem.state_dim(), "rollout: initial state");

  const ControlledField f = controlled_field(problem);
  const auto steps = static_cast<long>(std::llround(options.t_max / options.dt));
  const double escape_radius = options.escape_factor * problem.domain().diagonal();
  const int n = problem.state_dim();
  const int m = problem.control_dim();

  std::vector<Vec> xs{x0};
  std::vector<Vec> us{policy(x0)};
  std::vector<double> costs{0.0};
  auto stage_cost = [&](const Vec& x, const Vec& u) {
    return problem.state_cost(x) + problem.control_cost(u);
  };
  double prev_cost = stage_cost(x0, us.back());

  Trajectory traj;
  if (x0.norm() < options.stop_tol) {
    traj.converged = true;
    traj.convergence_time = 0.0;
  }
  for (long k = 1; k <= steps && !traj.converged; ++k) {
    Vec x;
    try {
      x = rk4_step(f, policy, xs.back(), options.dt);
    } catch (const NumericalError&) {
      throw NumericalError("rollout: non-finite state at step " +
                           std::to_string(k));
    }
    Vec u = policy(x);
    const double c = stage_cost(x, u);
    costs.push_back(costs.back() + 0.5 * options.dt * (prev_cost + c));
    prev_cost = c;
    xs.push_back(std::move(x));
    us.push_back(std::move(u));
    const double norm = xs.back().norm();
    if (norm > escape_radius) {
      traj.diverged = true;
      break;
    }
    if (norm < options.stop_tol) {
      traj.converged = true;
      traj.convergence_time = static_cast<double>(k) * options.dt;
    }
  }

  const auto K = static_cast<Eigen::Index>(xs.size());
  traj.states.resize(K, n);
  traj.controls.resize(K, m);
  traj.times.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    traj.times[k] = static_cast<double>(k) * options.dt;
    traj.states.row(k) = xs[k].transpose();
    traj.controls.row(k) = us[k].transpose();
  }
  traj.cost_so_far = std::move(costs);
  traj.running_cost = traj.cost_so_far.back();
  return traj;
}

RolloutComparison compare_rollouts(const OcpInstance& problem,
                                   const Policy& policy_a,
                                   const Policy& policy_b, const Vec& x0,
                                   double dt, double t_max) {
  SimOptions opts;
  opts.dt = dt;
  opts.t_max = t_max;
  opts.stop_tol = 0.0;
  RolloutComparison out;
  out.a = rollout(problem, policy_a, x0, opts);
  out.b = rollout(problem, policy_b, x0, opts);
  const Eigen::Index K = std::min(out.a.size(), out.b.size());
  for (Eigen::Index k = 0; k < K; ++k) {
    out.max_state_deviation =
        std::max(out.max_state_deviation,
                 (out.a.states.row(k) - out.b.states.row(k)).norm());
  }
  if (out.a.size() != out.b.size()) {
    out.max_state_deviation = std::numeric_limits<double>::infinity();
  }
  out.cost_difference = out.a.running_cost - out.b.running_cost;
  return out;
}

Mat sample_initial_conditions(const Vec& lower, const Vec& upper, int count,
                              std::uint64_t seed) {
  require(count >= 1, "sample_initial_conditions: count must be >= 1");
  require_dim(upper.size(), lower.size(), "sample_initial_conditions: upper");
  RngStream stream(seed, RngPurpose::InitialConditions);
  Mat X(count, lower.size());
  for (int i = 0; i < count; ++i) {
    for (Eigen::Index k = 0; k < lower.size(); ++k) {
      X(i, k) = lower[k] == upper[k] ? lower[k]
                                     : stream.uniform(lower[k], upper[k]);
    }
  }
  return X;
}

MonteCarloResult monte_carlo(const OcpInstance& problem, const Policy& policy,
                             const Mat& initial_conditions,
                             const SimOptions& options, int threads) {
  const Eigen::Index count = initial_conditions.rows();
  require(count >= 1, "monte_carlo: need at least one initial condition");
  MonteCarloResult out;
  out.trajectories.resize(count);
  parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t i) {
    const Vec x0 = initial_conditions.row(static_cast<Eigen::Index>(i)).transpose();
    try {
      out.trajectories[i] = rollout(problem, policy, x0, options);
    } catch (const NumericalError&) {
      Trajectory failed;
      failed.times = {0.0};
      failed.states = x0.transpose();
      failed.controls = Mat::Zero(1, problem.control_dim());
      failed.cost_so_far = {0.0};
      failed.diverged = true;
      out.trajectories[i] = std::move(failed);
    }
  });

  MonteCarloReport& r = out.report;
  r.initial_conditions = initial_conditions;
  std::size_t hits = 0;
  for (const Trajectory& t : out.trajectories) {
    r.converged.push_back(t.converged);
    r.convergence_times.push_back(t.convergence_time);
    r.final_norms.push_back(t.states.row(t.size() - 1).norm());
    hits += t.converged ? 1 : 0;
  }
  r.fraction_converged =
      static_cast<double>(hits) / static_cast<double>(count);
  return out;
}

}  // namespace xtfc

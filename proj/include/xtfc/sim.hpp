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
#include <functional>
#include <optional>
#include <vector>

#include "xtfc/policy.hpp"
#include "xtfc/problem.hpp"

namespace xtfc {

/// xdot = f(x, u).
using ControlledField = std::function<Vec(const Vec&, const Vec&)>;

ControlledField controlled_field(const OcpInstance& problem);

/// One classical Runge-Kutta step of xdot = f(x, policy(x)). The policy is
/// re-evaluated at every stage state. Throws NumericalError on a non-finite
/// result.
Vec rk4_step(const ControlledField& f, const Policy& policy, const Vec& x,
             double dt);

struct SimOptions {
  double dt = 0.01;
  double t_max = 20.0;
  /// Stop once ||x|| < stop_tol; zero disables early stopping.
  double stop_tol = 1e-3;
  /// Escape radius as a multiple of the domain diagonal.
  double escape_factor = 10.0;
};

struct Trajectory {
  std::vector<double> times;
  Mat states;    // K x n
  Mat controls;  // K x m, controls.row(k) = policy(states.row(k))
  std::vector<double> cost_so_far;
  double running_cost = 0.0;
  bool converged = false;
  bool diverged = false;
  std::optional<double> convergence_time;

  Eigen::Index size() const { return states.rows(); }
};

/// Closed-loop integration from x0 until t_max, convergence, or escape.
/// Running cost r(x) + g(u) is accumulated with the trapezoid rule.
Trajectory rollout(const OcpInstance& problem, const Policy& policy,
                   const Vec& x0, const SimOptions& options = {});

struct RolloutComparison {
  double max_state_deviation = 0.0;
  /// cost(a) - cost(b)
  double cost_difference = 0.0;
  Trajectory a;
  Trajectory b;
};

/// Integrates both policies over the full horizon (no early stop) and
/// compares them pointwise in time.
RolloutComparison compare_rollouts(const OcpInstance& problem,
                                   const Policy& policy_a,
                                   const Policy& policy_b, const Vec& x0,
                                   double dt, double t_max);

struct MonteCarloReport {
  Mat initial_conditions;  // count x n
  std::vector<bool> converged;
  std::vector<std::optional<double>> convergence_times;
  std::vector<double> final_norms;
  double fraction_converged = 0.0;
};

struct MonteCarloResult {
  MonteCarloReport report;
  std::vector<Trajectory> trajectories;
};

/// Initial conditions uniform on the box [lower, upper].
Mat sample_initial_conditions(const Vec& lower, const Vec& upper, int count,
                              std::uint64_t seed);

/// Independent rollouts from each row of `initial_conditions`. Results keep
/// the row order regardless of `threads`.
MonteCarloResult monte_carlo(const OcpInstance& problem, const Policy& policy,
                             const Mat& initial_conditions,
                             const SimOptions& options, int threads = 1);

}  // namespace xtfc

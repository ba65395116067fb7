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


#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"
#include "xtfc/network.hpp"
#include "xtfc/numerics.hpp"
#include "xtfc/policy.hpp"
#include "xtfc/sim.hpp"

using namespace xtfc;

namespace {

Policy exact(const std::string& name) {
  return [name](const Vec& x) { return exact_policy(name, x); };
}

Policy zero_control(int m) {
  return [m](const Vec&) { return Vec::Zero(m); };
}

/// x(t) = (1, 0) under u = -(x1 + sqrt(3) x2), from the damped closed loop.
Vec di_closed_loop(double t) {
  const double a = std::sqrt(3.0) / 2.0;
  const double e = std::exp(-a * t);
  Vec x(2);
  x << e * (std::cos(t / 2) + std::sqrt(3.0) * std::sin(t / 2)), -2.0 * e * std::sin(t / 2);
  return x;
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("rk4 step on linear decay") {
  const ControlledField f = [](const Vec& x, const Vec&) -> Vec { return -x; };
  const Vec x = rk4_step(f, zero_control(1), Vec::Ones(1), 0.1);
  CHECK(x[0] == doctest::Approx(0.9048375).epsilon(1e-9));
}

TEST_CASE("rk4 global error is fourth order") {
  const ControlledField f = [](const Vec& x, const Vec&) -> Vec {
    Vec d(2);
    d << x[1], -x[0];
    return d;
  };
  auto error = [&](int steps) {
    Vec x(2);
    x << 1.0, 0.0;
    const double dt = 2.0 / steps;
    for (int k = 0; k < steps; ++k) x = rk4_step(f, zero_control(1), x, dt);
    return std::hypot(x[0] - std::cos(2.0), x[1] + std::sin(2.0));
  };
  const double slope = std::log2(error(20) / error(40));
  CHECK(slope == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("rk4 evaluates the policy at each stage") {
  // xdot = u, u = -x: the stage-wise policy makes this the same as xdot = -x.
  const ControlledField f = [](const Vec&, const Vec& u) { return u; };
  const Policy feedback = [](const Vec& x) -> Vec { return -x; };
  CHECK(rk4_step(f, feedback, Vec::Ones(1), 0.1)[0] == doctest::Approx(0.9048375).epsilon(1e-9));
}

TEST_CASE("starting at the origin yields a single sample") {
  const Trajectory t = rollout(make_double_integrator(), exact("double_integrator"), Vec::Zero(2));
  CHECK(t.size() == 1);
  CHECK(t.converged);
  CHECK(t.running_cost == 0.0);
  CHECK(*t.convergence_time == 0.0);
}

TEST_CASE("exact double integrator policy tracks the closed-form trajectory") {
  SimOptions opt;
  opt.dt = 1e-3;
  opt.t_max = 10.0;
  opt.stop_tol = 0.0;
  const Trajectory t =
      rollout(make_double_integrator(), exact("double_integrator"), (Vec(2) << 1.0, 0.0).finished(), opt);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    worst = std::max(worst, (t.states.row(k).transpose() - di_closed_loop(t.times[k])).norm());
  }
  CHECK(worst < 1e-6);
  CHECK(t.size() == 10001);
}

TEST_CASE("closed-form value decreases along optimal trajectories and equals the cost") {
  RngStream rng(1, RngPurpose::InitialConditions);
  SimOptions opt;
  opt.dt = 0.01;
  opt.t_max = 30.0;
  for (const char* name : {"double_integrator", "nonlinear_benchmark"}) {
    CAPTURE(name);
    ProblemConfig pc;
    pc.name = name;
    const OcpInstance p = make_problem(pc);
    for (int trial = 0; trial < 10; ++trial) {
      const Vec x0 = testing::random_point(p.domain(), rng);
      const Trajectory t = rollout(p, exact(name), x0, opt);
      CHECK(t.converged);
      for (Eigen::Index k = 1; k < t.size(); ++k) {
        CHECK(exact_value(name, t.states.row(k).transpose()) <
              exact_value(name, t.states.row(k - 1).transpose()));
      }
      CHECK(std::abs(t.running_cost - exact_value(name, x0)) < 5e-3);
    }
  }
}

TEST_CASE("cost accumulates with the trapezoid rule") {
  const OcpInstance p = make_double_integrator();
  SimOptions opt;
  opt.t_max = 0.5;
  opt.stop_tol = 0.0;
  const Trajectory t = rollout(p, exact("double_integrator"), (Vec(2) << 0.5, -0.2).finished(), opt);
  double sum = 0.0;
  for (Eigen::Index k = 1; k < t.size(); ++k) {
    auto c = [&](Eigen::Index i) {
      return p.state_cost(t.states.row(i).transpose()) +
             p.control_cost(t.controls.row(i).transpose());
    };
    sum += 0.5 * opt.dt * (c(k - 1) + c(k));
    CHECK(t.cost_so_far[static_cast<std::size_t>(k)] == doctest::Approx(sum).epsilon(1e-13));
  }
  CHECK(t.running_cost == t.cost_so_far.back());
}

TEST_CASE("learned pendulum policy respects the torque bounds") {
  const OcpInstance p = make_pendulum();
  RngStream rng(2, RngPurpose::InitBeta);
  const ValueNetwork net(init_elm(2, 30, 3), seeded_uniform(rng, 30, -20, 20));
  for (PolicyMode mode : {PolicyMode::ConstrainedPaper, PolicyMode::ConstrainedClipped}) {
    CAPTURE(to_string(mode));
    SimOptions opt;
    opt.t_max = 5.0;
    const Trajectory t = rollout(p, synthesize_policy(net, p, mode), (Vec(2) << 1.0, 0.5).finished(), opt);
    CHECK(t.controls.maxCoeff() <= 2.0);
    CHECK(t.controls.minCoeff() >= -2.0);
  }
}

TEST_CASE("comparing a policy with itself gives zero deviation") {
  const OcpInstance p = make_nonlinear_benchmark();
  const RolloutComparison c = compare_rollouts(p, exact("nonlinear_benchmark"),
                                               exact("nonlinear_benchmark"),
                                               (Vec(2) << 0.7, -0.4).finished(), 0.01, 5.0);
  CHECK(c.max_state_deviation == 0.0);
  CHECK(c.cost_difference == 0.0);
  CHECK(c.a.size() == 501);
}

TEST_CASE("escaping trajectories are flagged as diverged") {
  // A destabilizing feedback on the double integrator escapes.
  const OcpInstance p = make_double_integrator();
  const Policy push = [](const Vec& x) { return Vec::Constant(1, 5.0 * (x[0] + x[1])); };
  SimOptions opt;
  opt.t_max = 50.0;
  const Trajectory t = rollout(p, push, (Vec(2) << 0.5, 0.5).finished(), opt);
  CHECK(t.diverged);
  CHECK_FALSE(t.converged);
  CHECK(t.states.row(t.size() - 1).norm() > opt.escape_factor * p.domain().diagonal());
}

TEST_CASE("monte carlo results are deterministic and thread independent") {
  const OcpInstance p = make_nonlinear_benchmark();
  const Mat ics = sample_initial_conditions(p.domain().lower(), p.domain().upper(), 17, 5);
  CHECK(ics == sample_initial_conditions(p.domain().lower(), p.domain().upper(), 17, 5));
  const MonteCarloResult one = monte_carlo(p, exact("nonlinear_benchmark"), ics, {}, 1);
  const MonteCarloResult four = monte_carlo(p, exact("nonlinear_benchmark"), ics, {}, 4);
  CHECK(one.report.fraction_converged == 1.0);
  CHECK(one.report.final_norms == four.report.final_norms);
  for (std::size_t i = 0; i < one.trajectories.size(); ++i) {
    CHECK(one.trajectories[i].states == four.trajectories[i].states);
  }
  for (Eigen::Index i = 0; i < ics.rows(); ++i) {
    CHECK(p.domain().contains(ics.row(i).transpose()));
  }
}

TEST_CASE("monte carlo records failures without aborting") {
  const OcpInstance p = make_double_integrator();
  const Policy blow_up = [](const Vec& x) {
    return Vec::Constant(1, x[0] > 0.9 ? std::nan("") : 0.0);
  };
  Mat ics(2, 2);
  ics << 0.5, 1.0, -0.5, -1.0;
  SimOptions opt;
  opt.t_max = 2.0;
  const MonteCarloResult r = monte_carlo(p, blow_up, ics, opt);
  CHECK(r.trajectories[0].diverged);
  CHECK_FALSE(r.report.converged[0]);
  CHECK_FALSE(r.report.converged[1]);
  CHECK(r.report.fraction_converged == 0.0);
}

TEST_CASE("degenerate initial-condition box") {
  const Mat ics = sample_initial_conditions(Vec::Zero(2), Vec::Zero(2), 3, 0);
  CHECK(ics == Mat::Zero(3, 2));
}

}  // TEST_SUITE

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

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xtfc/types.hpp"

namespace xtfc {

/// Box on the control input. The half-range alpha and midpoint gamma are
/// always derived from the stored limits.
class ControlBounds {
 public:
  ControlBounds(Vec u_min, Vec u_max);

  const Vec& u_min() const { return u_min_; }
  const Vec& u_max() const { return u_max_; }
  Vec alpha() const { return 0.5 * (u_max_ - u_min_); }
  Vec gamma() const { return 0.5 * (u_max_ + u_min_); }
  Eigen::Index dim() const { return u_min_.size(); }

 private:
  Vec u_min_;
  Vec u_max_;
};

/// Axis-aligned training region; must contain the origin.
class Domain {
 public:
  Domain(Vec lower, Vec upper);

  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  Eigen::Index dim() const { return lower_.size(); }
  bool contains(const Vec& x) const;
  double diagonal() const { return (upper_ - lower_).norm(); }

 private:
  Vec lower_;
  Vec upper_;
};

/// Infinite-horizon optimal control problem with control-affine dynamics
///   xdot = A(x) + B(x) u
/// and separable running cost r(x) + u^T R u.
class OcpInstance {
 public:
  using DriftFn = std::function<Vec(const Vec&)>;
  using InputMapFn = std::function<Mat(const Vec&)>;
  using StateCostFn = std::function<double(const Vec&)>;

  struct Definition {
    std::string name;
    int state_dim = 0;
    int control_dim = 0;
    DriftFn drift;
    InputMapFn input_map;
    StateCostFn state_cost;
    Mat control_weight;  // R
    Mat state_weight;    // Q
    std::optional<ControlBounds> bounds;
    Domain domain;
  };

  explicit OcpInstance(Definition def);

  const std::string& name() const { return def_.name; }
  int state_dim() const { return def_.state_dim; }
  int control_dim() const { return def_.control_dim; }
  const Mat& control_weight() const { return def_.control_weight; }
  const Mat& control_weight_inverse() const { return control_weight_inv_; }
  bool control_weight_is_diagonal() const { return control_weight_diagonal_; }
  const Mat& state_weight() const { return def_.state_weight; }
  const std::optional<ControlBounds>& bounds() const { return def_.bounds; }
  const Domain& domain() const { return def_.domain; }

  Vec drift(const Vec& x) const;
  Mat input_map(const Vec& x) const;
  double state_cost(const Vec& x) const;
  /// g(u) = u^T R u.
  double control_cost(const Vec& u) const;
  /// A(x) + B(x) u.
  Vec dynamics(const Vec& x, const Vec& u) const;

 private:
  Definition def_;
  Mat control_weight_inv_;
  bool control_weight_diagonal_ = false;
};

OcpInstance make_double_integrator();
OcpInstance make_nonlinear_benchmark();

struct PendulumParams {
  double mass = 1.0;               // kg
  double length = 0.5;             // hinge to centre of mass, m
  double inertia_com = 1.0 / 12.0; // kg m^2
  double gravity = 9.81;           // m/s^2
  Mat q = Mat::Identity(2, 2);
  double r_weight = 1.0;
  double torque_limit = 2.0;       // N m
  Vec domain_lower = (Vec(2) << -3.141592653589793, -4.0).finished();
  Vec domain_upper = (Vec(2) << 3.141592653589793, 4.0).finished();

  double a2() const { return mass * length * gravity / (inertia_com + mass * length * length); }
  double b2() const { return 1.0 / (inertia_com + mass * length * length); }
};
OcpInstance make_pendulum(const PendulumParams& params = {});

struct DetumblingParams {
  Mat inertia = Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal();
  Mat q = Mat::Identity(3, 3);
  Mat r = Mat::Identity(3, 3);
  Vec domain_lower = Vec::Constant(3, -1.0);
  Vec domain_upper = Vec::Constant(3, 1.0);
};
OcpInstance make_detumbling(const DetumblingParams& params = {});

/// Everything needed to rebuild an instance from a config file or checkpoint.
/// Optional overrides left empty keep each benchmark's defaults.
struct ProblemConfig {
  std::string name = "double_integrator";
  PendulumParams pendulum;
  DetumblingParams detumbling;
  std::optional<Vec> domain_lower;
  std::optional<Vec> domain_upper;
  std::optional<Vec> u_min;
  std::optional<Vec> u_max;
};

/// Builds the registered benchmark named by `config.name`.
OcpInstance make_problem(const ProblemConfig& config);
std::vector<std::string> registered_problems();

/// Closed-form optimal value; only the double integrator and the nonlinear
/// benchmark have one.
bool has_exact_solution(std::string_view problem);
double exact_value(std::string_view problem, const Vec& x);
Vec exact_value_gradient(std::string_view problem, const Vec& x);
/// Closed-form optimal (unconstrained) control.
Vec exact_policy(std::string_view problem, const Vec& x);

}  // namespace xtfc

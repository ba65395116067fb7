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

#include "xtfc/problem.hpp"

#include <cmath>
#include <map>

namespace xtfc {
namespace {

constexpr double kSqrt3 = 1.7320508075688772;

Mat symmetric_check(const Mat& m, const char* what) {
  require(m.rows() == m.cols(), std::string(what) + " must be square");
  require((m - m.transpose()).cwiseAbs().maxCoeff() <=
              1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()),
          std::string(what) + " must be symmetric");
  return m;
}

Vec vec2(double a, double b) { return (Vec(2) << a, b).finished(); }

}  // namespace

ControlBounds::ControlBounds(Vec u_min, Vec u_max)
    : u_min_(std::move(u_min)), u_max_(std::move(u_max)) {
  require_dim(u_max_.size(), u_min_.size(), "ControlBounds: u_max");
  require(u_min_.size() > 0, "ControlBounds: empty bounds");
  for (Eigen::Index i = 0; i < u_min_.size(); ++i) {
    require(std::isfinite(u_min_[i]) && std::isfinite(u_max_[i]),
            "ControlBounds: limits must be finite");
    require(u_min_[i] < u_max_[i],
            "ControlBounds: u_min must be strictly below u_max");
  }
}

Domain::Domain(Vec lower, Vec upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  require_dim(upper_.size(), lower_.size(), "Domain: upper");
  require(lower_.size() > 0, "Domain: empty domain");
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    require(lower_[i] < upper_[i], "Domain: lower must be below upper");
    require(lower_[i] <= 0.0 && upper_[i] >= 0.0,
            "Domain: must contain the origin");
  }
}

bool Domain::contains(const Vec& x) const {
  if (x.size() != lower_.size()) return false;
  return (x.array() >= lower_.array()).all() &&
         (x.array() <= upper_.array()).all();
}

OcpInstance::OcpInstance(Definition def) : def_(std::move(def)) {
  require(def_.state_dim >= 1, "OcpInstance: state_dim must be positive");
  require(def_.control_dim >= 1, "OcpInstance: control_dim must be positive");
  require(def_.drift && def_.input_map && def_.state_cost,
          "OcpInstance: dynamics and cost functions are required");
  require_dim(def_.domain.dim(), def_.state_dim, "OcpInstance: domain");

  const Mat& R = symmetric_check(def_.control_weight, "control weight R");
  require_dim(R.rows(), def_.control_dim, "OcpInstance: R");
  Eigen::SelfAdjointEigenSolver<Mat> eig(R);
  require(eig.eigenvalues().minCoeff() > 0.0,
          "OcpInstance: R must be positive definite");
  control_weight_inv_ = R.inverse();
  control_weight_diagonal_ = (R - Mat(R.diagonal().asDiagonal())).isZero(0.0);

  const Mat& Q = symmetric_check(def_.state_weight, "state weight Q");
  require_dim(Q.rows(), def_.state_dim, "OcpInstance: Q");

  if (def_.bounds) {
    require_dim(def_.bounds->dim(), def_.control_dim, "OcpInstance: bounds");
  }
}

Vec OcpInstance::drift(const Vec& x) const {
  require_dim(x.size(), def_.state_dim, "drift: state");
  return def_.drift(x);
}

Mat OcpInstance::input_map(const Vec& x) const {
  require_dim(x.size(), def_.state_dim, "input_map: state");
  return def_.input_map(x);
}

double OcpInstance::state_cost(const Vec& x) const {
  require_dim(x.size(), def_.state_dim, "state_cost: state");
  return def_.state_cost(x);
}

double OcpInstance::control_cost(const Vec& u) const {
  require_dim(u.size(), def_.control_dim, "control_cost: control");
  return u.dot(def_.control_weight * u);
}

Vec OcpInstance::dynamics(const Vec& x, const Vec& u) const {
  require_dim(u.size(), def_.control_dim, "dynamics: control");
  return drift(x) + input_map(x) * u;
}

OcpInstance make_double_integrator() {
  OcpInstance::Definition def{
      .name = "double_integrator",
      .state_dim = 2,
      .control_dim = 1,
      .drift = [](const Vec& x) { return vec2(x[1], 0.0); },
      .input_map = [](const Vec&) { return Mat(vec2(0.0, 1.0)); },
      // The objective carries an overall factor 1/2; it is folded into r and R.
      .state_cost = [](const Vec& x) { return 0.5 * x.squaredNorm(); },
      .control_weight = Mat::Constant(1, 1, 0.5),
      .state_weight = 0.5 * Mat::Identity(2, 2),
      .bounds = std::nullopt,
      .domain = Domain(vec2(-1.0, -1.0), vec2(1.0, 1.0)),
  };
  return OcpInstance(std::move(def));
}

OcpInstance make_nonlinear_benchmark() {
  OcpInstance::Definition def{
      .name = "nonlinear_benchmark",
      .state_dim = 2,
      .control_dim = 1,
      .drift =
          [](const Vec& x) {
            return vec2(-x[0] + x[1],
                        -0.5 * (x[0] + x[1] - x[0] * x[0] * x[1]));
          },
      .input_map = [](const Vec& x) { return Mat(vec2(0.0, x[0])); },
      .state_cost = [](const Vec& x) { return x.squaredNorm(); },
      .control_weight = Mat::Identity(1, 1),
      .state_weight = Mat::Identity(2, 2),
      .bounds = std::nullopt,
      .domain = Domain(vec2(-1.0, -1.0), vec2(1.0, 1.0)),
  };
  return OcpInstance(std::move(def));
}

OcpInstance make_pendulum(const PendulumParams& p) {
  require(p.mass > 0.0 && p.length > 0.0 && p.inertia_com > 0.0 &&
              p.gravity > 0.0 && p.r_weight > 0.0 && p.torque_limit > 0.0,
          "make_pendulum: physical parameters must be positive");
  require(p.q.rows() == 2 && p.q.cols() == 2, "make_pendulum: Q must be 2x2");
  const double a2 = p.a2();
  const double b2 = p.b2();
  const Mat q = p.q;
  OcpInstance::Definition def{
      .name = "pendulum",
      .state_dim = 2,
      .control_dim = 1,
      .drift = [a2](const Vec& x) { return vec2(x[1], a2 * std::sin(x[0])); },
      .input_map = [b2](const Vec&) { return Mat(vec2(0.0, b2)); },
      .state_cost = [q](const Vec& x) { return x.dot(q * x); },
      .control_weight = Mat::Constant(1, 1, p.r_weight),
      .state_weight = q,
      .bounds = ControlBounds(Vec::Constant(1, -p.torque_limit),
                              Vec::Constant(1, p.torque_limit)),
      .domain = Domain(p.domain_lower, p.domain_upper),
  };
  return OcpInstance(std::move(def));
}

OcpInstance make_detumbling(const DetumblingParams& p) {
  require(p.inertia.rows() == 3 && p.inertia.cols() == 3,
          "make_detumbling: inertia must be 3x3");
  const Eigen::Matrix3d inertia = symmetric_check(p.inertia, "inertia");
  require((inertia.diagonal().array() > 0.0).all(),
          "make_detumbling: inertia diagonal entries must be positive");
  Eigen::FullPivLU<Eigen::Matrix3d> lu(inertia);
  require(lu.isInvertible(), "make_detumbling: inertia is singular");
  const Eigen::Matrix3d inertia_inv = lu.inverse();
  require(p.q.rows() == 3 && p.q.cols() == 3, "make_detumbling: Q must be 3x3");
  require(p.r.rows() == 3 && p.r.cols() == 3, "make_detumbling: R must be 3x3");
  const Mat q = p.q;

  OcpInstance::Definition def{
      .name = "detumbling",
      .state_dim = 3,
      .control_dim = 3,
      .drift =
          [inertia, inertia_inv](const Vec& x) {
            const Eigen::Vector3d w = x;
            const Eigen::Vector3d gyro = w.cross(inertia * w);
            return Vec(-(inertia_inv * gyro));
          },
      .input_map = [inertia_inv](const Vec&) { return Mat(inertia_inv); },
      .state_cost = [q](const Vec& x) { return x.dot(q * x); },
      .control_weight = p.r,
      .state_weight = q,
      .bounds = std::nullopt,
      .domain = Domain(p.domain_lower, p.domain_upper),
  };
  return OcpInstance(std::move(def));
}

namespace {

using Factory = std::function<OcpInstance(const ProblemConfig&)>;

OcpInstance with_overrides(const OcpInstance& base, const ProblemConfig& c) {
  if (!c.domain_lower && !c.domain_upper && !c.u_min && !c.u_max) return base;
  // Rebuild the definition with the overridden domain and/or bounds.
  const int n = base.state_dim();
  const int m = base.control_dim();
  const OcpInstance copy = base;
  OcpInstance::Definition def{
      .name = base.name(),
      .state_dim = n,
      .control_dim = m,
      .drift = [copy](const Vec& x) { return copy.drift(x); },
      .input_map = [copy](const Vec& x) { return copy.input_map(x); },
      .state_cost = [copy](const Vec& x) { return copy.state_cost(x); },
      .control_weight = base.control_weight(),
      .state_weight = base.state_weight(),
      .bounds = base.bounds(),
      .domain = Domain(c.domain_lower.value_or(base.domain().lower()),
                       c.domain_upper.value_or(base.domain().upper())),
  };
  if (c.u_min || c.u_max) {
    require(c.u_min.has_value() && c.u_max.has_value(),
            "problem: u_min and u_max must be given together");
    def.bounds = ControlBounds(*c.u_min, *c.u_max);
  }
  return OcpInstance(std::move(def));
}

const std::map<std::string, Factory, std::less<>>& registry() {
  static const std::map<std::string, Factory, std::less<>> factories = {
      {"double_integrator",
       [](const ProblemConfig&) { return make_double_integrator(); }},
      {"nonlinear_benchmark",
       [](const ProblemConfig&) { return make_nonlinear_benchmark(); }},
      {"pendulum",
       [](const ProblemConfig& c) { return make_pendulum(c.pendulum); }},
      {"detumbling",
       [](const ProblemConfig& c) { return make_detumbling(c.detumbling); }},
  };
  return factories;
}

}  // namespace

OcpInstance make_problem(const ProblemConfig& config) {
  const auto& factories = registry();
  const auto it = factories.find(config.name);
  require(it != factories.end(), "unknown problem '" + config.name + "'");
  return with_overrides(it->second(config), config);
}

std::vector<std::string> registered_problems() {
  std::vector<std::string> names;
  for (const auto& [name, factory] : registry()) names.push_back(name);
  return names;
}

bool has_exact_solution(std::string_view problem) {
  return problem == "double_integrator" || problem == "nonlinear_benchmark";
}

double exact_value(std::string_view problem, const Vec& x) {
  if (problem == "double_integrator") {
    require_dim(x.size(), 2, "exact_value: state");
    return 0.5 * kSqrt3 * x[0] * x[0] + 0.5 * kSqrt3 * x[1] * x[1] +
           x[0] * x[1];
  }
  if (problem == "nonlinear_benchmark") {
    require_dim(x.size(), 2, "exact_value: state");
    return 0.5 * x[0] * x[0] + x[1] * x[1];
  }
  throw InvalidArgument("no analytic solution for problem '" +
                        std::string(problem) + "'");
}

Vec exact_value_gradient(std::string_view problem, const Vec& x) {
  if (problem == "double_integrator") {
    require_dim(x.size(), 2, "exact_value_gradient: state");
    return vec2(kSqrt3 * x[0] + x[1], kSqrt3 * x[1] + x[0]);
  }
  if (problem == "nonlinear_benchmark") {
    require_dim(x.size(), 2, "exact_value_gradient: state");
    return vec2(x[0], 2.0 * x[1]);
  }
  throw InvalidArgument("no analytic solution for problem '" +
                        std::string(problem) + "'");
}

Vec exact_policy(std::string_view problem, const Vec& x) {
  if (problem == "double_integrator") {
    require_dim(x.size(), 2, "exact_policy: state");
    return Vec::Constant(1, -kSqrt3 * x[1] - x[0]);
  }
  if (problem == "nonlinear_benchmark") {
    // -1/2 R^{-1} B^T V_x with B = (0, x1), V_x = (x1, 2 x2), R = 1.
    require_dim(x.size(), 2, "exact_policy: state");
    return Vec::Constant(1, -x[0] * x[1]);
  }
  throw InvalidArgument("no analytic policy for problem '" +
                        std::string(problem) + "'");
}

}  // namespace xtfc

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

#include "xtfc/policy.hpp"

#include <algorithm>
#include <cmath>

namespace xtfc {
namespace {

bool is_diagonal(const Mat& R) {
  return (R - Mat(R.diagonal().asDiagonal())).isZero(0.0);
}

const ControlBounds& require_bounds(const std::optional<ControlBounds>& bounds,
                                    PolicyMode mode) {
  if (!bounds) {
    throw InvalidArgument("policy mode '" + to_string(mode) +
                          "' requires control bounds");
  }
  return *bounds;
}

// Interior mask of the constrained_paper policy: 1 where |w_i| < alpha_i.
Vec interior_mask(const Vec& w, const ControlBounds& bounds) {
  const Vec alpha = bounds.alpha();
  Vec mask(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    mask[i] = std::abs(w[i]) < alpha[i] ? 1.0 : 0.0;
  }
  return mask;
}

ControlSolution solve_with(const Vec& w, const Mat& R, const Mat& R_inv,
                           const std::optional<ControlBounds>& bounds,
                           PolicyMode mode) {
  ControlSolution s;
  switch (mode) {
    case PolicyMode::Unconstrained: {
      s.control = 0.5 * (R_inv * w);
      s.conjugate = 0.5 * w.dot(s.control);
      s.conjugate_grad = s.control;
      return s;
    }
    case PolicyMode::ConstrainedClipped: {
      s.control = policy_constrained_clipped(w, R, require_bounds(bounds, mode));
      s.conjugate = w.dot(s.control) - s.control.dot(R * s.control);
      s.conjugate_grad = s.control;
      return s;
    }
    case PolicyMode::ConstrainedPaper: {
      const ControlBounds& b = require_bounds(bounds, mode);
      s.control = policy_constrained_paper(w, b);
      const Vec Ru = R * s.control;
      s.conjugate = w.dot(s.control) - s.control.dot(Ru);
      const Vec mask = interior_mask(w, b);
      s.conjugate_grad =
          s.control + mask.cwiseProduct(w - 2.0 * Ru);
      return s;
    }
  }
  throw InvalidArgument("unknown policy mode");
}

}  // namespace

std::string to_string(PolicyMode mode) {
  switch (mode) {
    case PolicyMode::Unconstrained:
      return "unconstrained";
    case PolicyMode::ConstrainedPaper:
      return "constrained_paper";
    case PolicyMode::ConstrainedClipped:
      return "constrained_clipped";
  }
  return "unknown";
}

PolicyMode parse_policy_mode(std::string_view name) {
  if (name == "unconstrained") return PolicyMode::Unconstrained;
  if (name == "constrained_paper") return PolicyMode::ConstrainedPaper;
  if (name == "constrained_clipped") return PolicyMode::ConstrainedClipped;
  throw InvalidArgument("unknown policy mode '" + std::string(name) +
                        "' (expected unconstrained, constrained_paper or "
                        "constrained_clipped)");
}

bool is_constrained(PolicyMode mode) {
  return mode != PolicyMode::Unconstrained;
}

Vec control_preimage(const Vec& vx, const Mat& B) {
  require_dim(vx.size(), B.rows(), "control_preimage: value gradient");
  return -(B.transpose() * vx);
}

Vec policy_unconstrained(const Vec& w, const Mat& R) {
  require_dim(w.size(), R.rows(), "policy_unconstrained: w");
  return 0.5 * R.ldlt().solve(w);
}

Vec policy_constrained_paper(const Vec& w, const ControlBounds& bounds) {
  require_dim(w.size(), bounds.dim(), "policy_constrained_paper: w");
  const Vec alpha = bounds.alpha();
  const Vec gamma = bounds.gamma();
  Vec u(w.size());
  const Vec& lo = bounds.u_min();
  const Vec& hi = bounds.u_max();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (std::abs(w[i]) < alpha[i]) {
      // Clamped only against rounding in w + gamma.
      u[i] = std::clamp(w[i] + gamma[i], lo[i], hi[i]);
    } else if (w[i] > 0.0) {
      u[i] = hi[i];
    } else if (w[i] < 0.0) {
      u[i] = lo[i];
    } else {
      u[i] = gamma[i];
    }
  }
  return u;
}

Vec policy_constrained_clipped(const Vec& w, const Mat& R,
                               const ControlBounds& bounds) {
  require_dim(w.size(), bounds.dim(), "policy_constrained_clipped: w");
  require_dim(R.rows(), w.size(), "policy_constrained_clipped: R");
  if (!is_diagonal(R)) {
    throw InvalidArgument(
        "componentwise projection requires separable g (diagonal R)");
  }
  Vec u(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    u[i] = std::clamp(w[i] / (2.0 * R(i, i)), bounds.u_min()[i],
                      bounds.u_max()[i]);
  }
  return u;
}

Vec select_control(const Vec& w, const Mat& R,
                   const std::optional<ControlBounds>& bounds,
                   PolicyMode mode) {
  switch (mode) {
    case PolicyMode::Unconstrained:
      return policy_unconstrained(w, R);
    case PolicyMode::ConstrainedPaper:
      return policy_constrained_paper(w, require_bounds(bounds, mode));
    case PolicyMode::ConstrainedClipped:
      return policy_constrained_clipped(w, R, require_bounds(bounds, mode));
  }
  throw InvalidArgument("unknown policy mode");
}

double conjugate_value(const Vec& w, const Mat& R,
                       const std::optional<ControlBounds>& bounds,
                       PolicyMode mode) {
  require_dim(w.size(), R.rows(), "conjugate_value: w");
  if (mode == PolicyMode::Unconstrained) {
    return 0.25 * w.dot(R.ldlt().solve(w));
  }
  const Vec u = select_control(w, R, bounds, mode);
  return w.dot(u) - u.dot(R * u);
}

Vec conjugate_gradient(const Vec& w, const Mat& R,
                       const std::optional<ControlBounds>& bounds,
                       PolicyMode mode) {
  require_dim(w.size(), R.rows(), "conjugate_gradient: w");
  if (mode == PolicyMode::ConstrainedClipped) {
    require(is_diagonal(R),
            "componentwise projection requires separable g (diagonal R)");
  }
  return solve_with(w, R, R.inverse(), bounds, mode).conjugate_grad;
}

ControlSolution solve_control(const OcpInstance& problem, PolicyMode mode,
                              const Vec& w) {
  return solve_with(w, problem.control_weight(),
                    problem.control_weight_inverse(), problem.bounds(), mode);
}

void validate_policy_mode(const OcpInstance& problem, PolicyMode mode) {
  if (is_constrained(mode) && !problem.bounds()) {
    throw InvalidArgument("policy mode '" + to_string(mode) +
                          "' requires control bounds, but problem '" +
                          problem.name() + "' has none");
  }
  if (mode == PolicyMode::ConstrainedClipped &&
      !problem.control_weight_is_diagonal()) {
    throw InvalidArgument(
        "componentwise projection requires separable g (diagonal R)");
  }
}

Policy synthesize_policy(const ValueNetwork& net, const OcpInstance& problem,
                         PolicyMode mode) {
  validate_policy_mode(problem, mode);
  return [net, problem, mode](const Vec& x) {
    const Vec w = control_preimage(net.gradient(x), problem.input_map(x));
    return solve_control(problem, mode, w).control;
  };
}

}  // namespace xtfc

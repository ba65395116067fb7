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

#include "xtfc/network.hpp"
#include "xtfc/problem.hpp"

namespace xtfc {

/// How the minimizing control is recovered from w = -B^T V_x.
///
/// - Unconstrained: u = 1/2 R^{-1} w.
/// - ConstrainedPaper: componentwise w_i + gamma_i when |w_i| < alpha_i,
///   otherwise sgn(w_i) alpha_i + gamma_i. R does not enter.
/// - ConstrainedClipped: clamp(w_i / (2 R_ii), u_min_i, u_max_i), the exact
///   box-constrained minimizer for diagonal R.
enum class PolicyMode { Unconstrained, ConstrainedPaper, ConstrainedClipped };

std::string to_string(PolicyMode mode);
PolicyMode parse_policy_mode(std::string_view name);
bool is_constrained(PolicyMode mode);

using Policy = std::function<Vec(const Vec&)>;

/// w = -B^T vx.
Vec control_preimage(const Vec& vx, const Mat& B);

Vec policy_unconstrained(const Vec& w, const Mat& R);
Vec policy_constrained_paper(const Vec& w, const ControlBounds& bounds);
Vec policy_constrained_clipped(const Vec& w, const Mat& R,
                               const ControlBounds& bounds);

/// Control selected by `mode` for preimage w.
Vec select_control(const Vec& w, const Mat& R,
                   const std::optional<ControlBounds>& bounds, PolicyMode mode);

/// g*(w) = sup_u { u^T w - u^T R u }. Constrained modes evaluate the envelope
/// identity w^T u(w) - g(u(w)) at the mode's control, so the residual and the
/// policy are always consistent.
double conjugate_value(const Vec& w, const Mat& R,
                       const std::optional<ControlBounds>& bounds,
                       PolicyMode mode);

/// Gradient of conjugate_value with respect to w. Equal to the selected
/// control for the unconstrained and clipped modes. For ConstrainedPaper with
/// R != I/2 the envelope identity is not stationary in u, so interior
/// components pick up an extra (w - 2 R u) term.
Vec conjugate_gradient(const Vec& w, const Mat& R,
                       const std::optional<ControlBounds>& bounds,
                       PolicyMode mode);

/// Same three quantities, using the problem's cached R^{-1}.
struct ControlSolution {
  Vec control;         // u*(w)
  double conjugate;    // g*(w)
  Vec conjugate_grad;  // dg*/dw
};
ControlSolution solve_control(const OcpInstance& problem, PolicyMode mode,
                              const Vec& w);

/// Checks that `mode` can be used with `problem`.
void validate_policy_mode(const OcpInstance& problem, PolicyMode mode);

/// x -> u from the learned value gradient.
Policy synthesize_policy(const ValueNetwork& net, const OcpInstance& problem,
                         PolicyMode mode);

}  // namespace xtfc

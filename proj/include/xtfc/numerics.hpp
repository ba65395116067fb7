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
#include <random>
#include <span>
#include <string_view>

#include "xtfc/types.hpp"

namespace xtfc {

/// Independent random streams, keyed by purpose so that drawing more values
/// for one purpose never shifts the sequence of another.
enum class RngPurpose : std::uint64_t {
  Weights = 1,
  Biases = 2,
  Sampling = 3,
  InitBeta = 4,
  InitialConditions = 5,
};

class RngStream {
 public:
  RngStream(std::uint64_t seed, RngPurpose purpose);

  std::uint64_t seed() const { return seed_; }
  RngPurpose purpose() const { return purpose_; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  RngPurpose purpose_;
  std::mt19937_64 engine_;
};

/// `count` values uniform on [lo, hi) drawn from `stream`.
Vec seeded_uniform(RngStream& stream, Eigen::Index count, double lo, double hi);

/// Minimizer of ||H b - T||^2 + ridge ||b||^2 via a thin SVD. With ridge = 0
/// this is the Moore-Penrose solution; singular values below
/// `kSingularCutoff * s_max` are discarded.
Vec ridge_pinv_solve(const Mat& H, const Vec& T, double ridge);
inline constexpr double kSingularCutoff = 1e-12;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h.
Vec finite_difference_gradient(const std::function<double(const Vec&)>& f,
                               const Vec& x, double h);

/// Rescales g onto the ball of radius max_norm if it lies outside.
Vec clip_global_norm(const Vec& g, double max_norm);

/// Stabilizing solution P of A^T P + P A - P B R^{-1} B^T P + Q = 0, computed
/// with the scaled matrix-sign iteration on the Hamiltonian. Throws
/// NumericalError when the iteration fails or P does not stabilize A - B K.
Mat solve_care(const Mat& A, const Mat& B, const Mat& Q, const Mat& R);

/// Jacobian of f at x by central differences, one column per coordinate.
Mat finite_difference_jacobian(const std::function<Vec(const Vec&)>& f,
                               const Vec& x, double h);

/// Pairwise (cascade) summation; bitwise deterministic for a given input.
double pairwise_sum(std::span<const double> values);

}  // namespace xtfc

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

#include "xtfc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace xtfc {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, RngPurpose purpose)
    : seed_(seed),
      purpose_(purpose),
      engine_(splitmix64(splitmix64(seed) ^
                         splitmix64(static_cast<std::uint64_t>(purpose) *
                                    0xd1b54a32d192ed03ULL))) {}

double RngStream::uniform(double lo, double hi) {
  // 53 random mantissa bits give a value in [0, 1).
  const double unit =
      static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  const double v = lo + (hi - lo) * unit;
  return v < hi ? v : std::nextafter(hi, lo);
}

std::uint64_t RngStream::below(std::uint64_t n) {
  require(n > 0, "RngStream::below: n must be positive");
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

Vec seeded_uniform(RngStream& stream, Eigen::Index count, double lo,
                   double hi) {
  require(lo < hi, "seeded_uniform: lo must be below hi");
  require(count >= 0, "seeded_uniform: negative count");
  Vec out(count);
  for (Eigen::Index i = 0; i < count; ++i) out[i] = stream.uniform(lo, hi);
  return out;
}

Vec ridge_pinv_solve(const Mat& H, const Vec& T, double ridge) {
  require(ridge >= 0.0, "ridge_pinv_solve: ridge must be non-negative");
  require_dim(T.size(), H.rows(), "ridge_pinv_solve: target length");
  if (H.size() == 0) return Vec::Zero(H.cols());

  Eigen::BDCSVD<Mat> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  const double s_max = s.size() > 0 ? s[0] : 0.0;
  const Vec projected = svd.matrixU().transpose() * T;

  Vec scaled(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (ridge > 0.0) {
      scaled[i] = s[i] / (s[i] * s[i] + ridge) * projected[i];
    } else if (s[i] > kSingularCutoff * s_max && s[i] > 0.0) {
      scaled[i] = projected[i] / s[i];
    } else {
      scaled[i] = 0.0;
    }
  }
  return svd.matrixV() * scaled;
}

Vec finite_difference_gradient(const std::function<double(const Vec&)>& f,
                               const Vec& x, double h) {
  require(h > 0.0, "finite_difference_gradient: step must be positive");
  Vec grad(x.size());
  Vec probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

Mat solve_care(const Mat& A, const Mat& B, const Mat& Q, const Mat& R) {
  const Eigen::Index n = A.rows();
  require(A.cols() == n, "solve_care: A must be square");
  require_dim(B.rows(), n, "solve_care: B rows");
  require(Q.rows() == n && Q.cols() == n, "solve_care: Q must be n x n");
  require(R.rows() == B.cols() && R.cols() == B.cols(),
          "solve_care: R must be m x m");
  const Eigen::LDLT<Mat> r_ldlt(R);
  require(r_ldlt.info() == Eigen::Success && r_ldlt.isPositive(),
          "solve_care: R must be positive definite");
  const Mat S = B * r_ldlt.solve(B.transpose());

  Mat Z(2 * n, 2 * n);
  Z << A, -S, -Q, -A.transpose();
  constexpr int kMaxIterations = 100;
  bool converged = false;
  for (int k = 0; k < kMaxIterations && !converged; ++k) {
    const Eigen::PartialPivLU<Mat> lu(Z);
    const double det = std::abs(lu.determinant());
    if (!(det > 0.0) || !std::isfinite(det)) {
      throw NumericalError(
          "solve_care: Hamiltonian has eigenvalues on the imaginary axis");
    }
    const double c = std::pow(det, -1.0 / static_cast<double>(2 * n));
    const Mat next = 0.5 * (c * Z + lu.inverse() / c);
    converged = (next - Z).lpNorm<1>() <= 1e-13 * next.lpNorm<1>();
    Z = next;
  }
  if (!converged) throw NumericalError("solve_care: sign iteration did not converge");

  // The stable invariant subspace [I; P] is the null space of sign(H) + I.
  const Mat I = Mat::Identity(n, n);
  Mat lhs(2 * n, n), rhs(2 * n, n);
  lhs << Z.topRightCorner(n, n), Z.bottomRightCorner(n, n) + I;
  rhs << -(Z.topLeftCorner(n, n) + I), -Z.bottomLeftCorner(n, n);
  Mat P = lhs.colPivHouseholderQr().solve(rhs);
  P = 0.5 * (P + P.transpose()).eval();

  const Eigen::VectorXcd closed = (A - S * P).eigenvalues();
  if (!P.allFinite() || (closed.real().array() >= 0.0).any()) {
    throw NumericalError("solve_care: no stabilizing solution");
  }
  return P;
}

Mat finite_difference_jacobian(const std::function<Vec(const Vec&)>& f,
                               const Vec& x, double h) {
  require(h > 0.0, "finite_difference_jacobian: h must be positive");
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  Vec xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    J.col(i) = (f(xp) - f(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return J;
}

Vec clip_global_norm(const Vec& g, double max_norm) {
  require(max_norm > 0.0, "clip_global_norm: max_norm must be positive");
  const double norm = g.norm();
  if (!(norm > max_norm)) return g;
  Vec out = g * (max_norm / norm);
  // Guard against the rescaled norm landing one ulp above the bound.
  while (out.norm() > max_norm) out *= (1.0 - 1e-15);
  return out;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 32;
  if (values.size() <= kLeaf) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace xtfc

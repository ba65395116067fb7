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


// Shared helpers for the unit tests.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "xtfc/numerics.hpp"
#include "xtfc/problem.hpp"
#include "xtfc/types.hpp"

namespace xtfc::testing {

inline double rel_error(const Vec& approx, const Vec& exact) {
  const double scale = std::max(exact.norm(), 1e-300);
  return (approx - exact).norm() / scale;
}

inline Vec random_point(const Domain& domain, RngStream& rng) {
  Vec x(domain.dim());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    x[k] = rng.uniform(domain.lower()[k], domain.upper()[k]);
  }
  return x;
}

inline Mat random_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng,
                         double lo = -1.0, double hi = 1.0) {
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(lo, hi);
  }
  return m;
}

inline Mat random_points(const Domain& domain, Eigen::Index count,
                         RngStream& rng) {
  Mat X(count, domain.dim());
  for (Eigen::Index i = 0; i < count; ++i) {
    X.row(i) = random_point(domain, rng).transpose();
  }
  return X;
}

inline OcpInstance boxed(const std::string& name, double u_abs) {
  ProblemConfig pc;
  pc.name = name;
  const int m = name == "detumbling" ? 3 : 1;
  pc.u_min = Vec::Constant(m, -u_abs);
  pc.u_max = Vec::Constant(m, u_abs);
  return make_problem(pc);
}

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "xtfc_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace xtfc::testing

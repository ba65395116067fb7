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

#include <cstddef>
#include <vector>

#include "xtfc/network.hpp"
#include "xtfc/policy.hpp"
#include "xtfc/problem.hpp"

namespace xtfc {

/// HJB residual V_x^T A(x) + r(x) - g*(-B(x)^T V_x) for a given value gradient.
double hjb_residual_from_gradient(const OcpInstance& problem, PolicyMode mode,
                                  const Vec& x, const Vec& vx);

double hjb_residual(const ValueNetwork& net, const OcpInstance& problem,
                    PolicyMode mode, const Vec& x);

/// Residuals, loss and loss gradient over one point set.
struct ResidualBatch {
  Mat points;
  Vec residuals;
  double loss = 0.0;
  Vec grad_beta;
};

/// Reference per-point evaluation of the training loss
///   mean_i r_i^2 + lambda ||beta||^2
/// and its gradient in beta. Rows of X are states.
ResidualBatch evaluate_batch(const ValueNetwork& net, const OcpInstance& problem,
                             PolicyMode mode, const Mat& X, double lambda,
                             int threads = 1);

double loss(const ValueNetwork& net, const OcpInstance& problem,
            PolicyMode mode, const Mat& X, double lambda, int threads = 1);

Vec loss_gradient_beta(const ValueNetwork& net, const OcpInstance& problem,
                       PolicyMode mode, const Mat& X, double lambda,
                       int threads = 1);

/// Training-time form of the same loss. The input layer and the point set are
/// fixed, so A(x_i), B(x_i), r(x_i) and the activation slopes
/// sigma'(w_j^T x_i + b_j) are computed once; each evaluation then costs two
/// dense products per chunk of points.
class ResidualObjective {
 public:
  struct Evaluation {
    double loss = 0.0;
    Vec gradient;
    Vec residuals;
  };

  ResidualObjective(const ElmParams& elm, const OcpInstance& problem,
                    PolicyMode mode, const Mat& X, double lambda,
                    int threads = 1);

  Evaluation evaluate(const Vec& beta) const;
  Eigen::Index num_points() const { return X_.rows(); }
  Eigen::Index num_params() const { return elm_.hidden_count(); }
  double lambda() const { return lambda_; }

  /// Slope matrices above this many bytes are recomputed per chunk instead
  /// of being stored.
  static constexpr std::size_t kSlopeCacheBytes = std::size_t{768} << 20;
  static constexpr Eigen::Index kChunkRows = 256;

 private:
  void fill_slopes(Eigen::Index row0, Eigen::Index rows, Mat& out) const;

  ElmParams elm_;
  OcpInstance problem_;
  PolicyMode mode_;
  Mat X_;
  double lambda_;
  int threads_;

  std::vector<Vec> drift_;
  std::vector<Mat> input_map_;
  Vec state_cost_;
  Mat slopes_;  // M x N, empty when not cached
};

}  // namespace xtfc

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
#include <string>
#include <string_view>

#include "xtfc/types.hpp"

namespace xtfc {

enum class Activation { Swish };

std::string to_string(Activation a);
Activation parse_activation(std::string_view name);

/// swish(z) = z * sigmoid(z).
double swish(double z);
/// d/dz swish(z) = s(z) + z s(z) (1 - s(z)).
double swish_derivative(double z);

double activation(Activation a, double z);
double activation_derivative(Activation a, double z);

/// Fixed random input layer of an extreme learning machine.
struct ElmParams {
  Mat input_weights;  // N x n, row j is w_j
  Vec biases;         // N
  Activation activation = Activation::Swish;
  std::uint64_t seed = 0;
  double weight_scale = 1.0;

  Eigen::Index hidden_count() const { return input_weights.rows(); }
  Eigen::Index state_dim() const { return input_weights.cols(); }
};

/// Draws W and b i.i.d. uniform on [-weight_scale, weight_scale] from
/// purpose-keyed streams of `seed`.
ElmParams init_elm(int state_dim, int hidden_count, std::uint64_t seed,
                   double weight_scale = 1.0);

/// Wraps explicit weights, e.g. a hand-built layer or a loaded checkpoint.
ElmParams make_elm(Mat input_weights, Vec biases, std::uint64_t seed = 0,
                   double weight_scale = 1.0);

/// w_j^T x + b_j accumulated in a fixed order, shared by every code path that
/// needs hidden-unit inputs so that they agree bitwise.
inline double preactivation(const ElmParams& elm, Eigen::Index j,
                            const double* x) {
  double z = 0.0;
  for (Eigen::Index k = 0; k < elm.input_weights.cols(); ++k) {
    z += elm.input_weights(j, k) * x[k];
  }
  return z + elm.biases[j];
}

/// h_j(x) = sigma(w_j^T x + b_j).
Vec hidden_features(const ElmParams& elm, const Vec& x);
/// n x N matrix whose column j is sigma'(w_j^T x + b_j) w_j.
Mat hidden_feature_jacobian(const ElmParams& elm, const Vec& x);
/// Row i is hidden_features(X.row(i)).
Mat build_H(const ElmParams& elm, const Mat& X);

/// V(x) = eta(x) - eta(0) with eta(x) = beta^T h(x). V(0) = 0 for every beta.
class ValueNetwork {
 public:
  ValueNetwork(ElmParams elm, Vec beta);
  explicit ValueNetwork(ElmParams elm);

  const ElmParams& elm() const { return elm_; }
  const Vec& beta() const { return beta_; }
  const Vec& anchor() const { return anchor_; }
  Eigen::Index state_dim() const { return elm_.state_dim(); }
  Eigen::Index hidden_count() const { return elm_.hidden_count(); }

  void set_beta(Vec beta);

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;

 private:
  ElmParams elm_;
  Vec beta_;
  Vec anchor_;  // h(0)
};

double eval_value(const ValueNetwork& net, const Vec& x);
Vec eval_value_gradient(const ValueNetwork& net, const Vec& x);

}  // namespace xtfc

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

#include "xtfc/network.hpp"

#include <cmath>

#include "xtfc/numerics.hpp"

namespace xtfc {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Swish:
      return "swish";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "swish") return Activation::Swish;
  throw InvalidArgument("unknown activation '" + std::string(name) + "'");
}

double swish(double z) { return z / (1.0 + std::exp(-z)); }

double swish_derivative(double z) {
  const double s = 1.0 / (1.0 + std::exp(-z));
  return s + z * s * (1.0 - s);
}

double activation(Activation a, double z) {
  switch (a) {
    case Activation::Swish:
      return swish(z);
  }
  return 0.0;
}

double activation_derivative(Activation a, double z) {
  switch (a) {
    case Activation::Swish:
      return swish_derivative(z);
  }
  return 0.0;
}

ElmParams init_elm(int state_dim, int hidden_count, std::uint64_t seed,
                   double weight_scale) {
  require(state_dim >= 1, "init_elm: state dimension must be positive");
  require(hidden_count >= 1, "init_elm: hidden count must be positive");
  require(weight_scale > 0.0, "init_elm: weight scale must be positive");

  RngStream weight_stream(seed, RngPurpose::Weights);
  RngStream bias_stream(seed, RngPurpose::Biases);
  ElmParams elm;
  elm.input_weights.resize(hidden_count, state_dim);
  for (int j = 0; j < hidden_count; ++j) {
    for (int k = 0; k < state_dim; ++k) {
      elm.input_weights(j, k) = weight_stream.uniform(-weight_scale, weight_scale);
    }
  }
  elm.biases = seeded_uniform(bias_stream, hidden_count, -weight_scale,
                              weight_scale);
  elm.seed = seed;
  elm.weight_scale = weight_scale;
  return elm;
}

ElmParams make_elm(Mat input_weights, Vec biases, std::uint64_t seed,
                   double weight_scale) {
  require(input_weights.rows() >= 1 && input_weights.cols() >= 1,
          "make_elm: empty input layer");
  require_dim(biases.size(), input_weights.rows(), "make_elm: biases");
  ElmParams elm;
  elm.input_weights = std::move(input_weights);
  elm.biases = std::move(biases);
  elm.seed = seed;
  elm.weight_scale = weight_scale;
  return elm;
}

Vec hidden_features(const ElmParams& elm, const Vec& x) {
  require_dim(x.size(), elm.state_dim(), "hidden_features: state");
  Vec h(elm.hidden_count());
  for (Eigen::Index j = 0; j < h.size(); ++j) {
    h[j] = activation(elm.activation, preactivation(elm, j, x.data()));
  }
  return h;
}

Mat hidden_feature_jacobian(const ElmParams& elm, const Vec& x) {
  require_dim(x.size(), elm.state_dim(), "hidden_feature_jacobian: state");
  Mat D(elm.state_dim(), elm.hidden_count());
  for (Eigen::Index j = 0; j < D.cols(); ++j) {
    const double slope =
        activation_derivative(elm.activation, preactivation(elm, j, x.data()));
    D.col(j) = slope * elm.input_weights.row(j).transpose();
  }
  return D;
}

Mat build_H(const ElmParams& elm, const Mat& X) {
  require(X.rows() >= 1, "build_H: need at least one sample");
  require_dim(X.cols(), elm.state_dim(), "build_H: sample width");
  Mat H(X.rows(), elm.hidden_count());
  Vec x(X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    x = X.row(i).transpose();
    for (Eigen::Index j = 0; j < H.cols(); ++j) {
      H(i, j) = activation(elm.activation, preactivation(elm, j, x.data()));
    }
  }
  return H;
}

ValueNetwork::ValueNetwork(ElmParams elm, Vec beta)
    : elm_(std::move(elm)), beta_(std::move(beta)) {
  require_dim(elm_.biases.size(), elm_.hidden_count(), "ValueNetwork: biases");
  require_dim(beta_.size(), elm_.hidden_count(), "ValueNetwork: beta");
  anchor_ = hidden_features(elm_, Vec::Zero(elm_.state_dim()));
}

ValueNetwork::ValueNetwork(ElmParams elm)
    : ValueNetwork(elm, Vec::Zero(elm.hidden_count())) {}

void ValueNetwork::set_beta(Vec beta) {
  require_dim(beta.size(), elm_.hidden_count(), "ValueNetwork::set_beta");
  beta_ = std::move(beta);
}

double ValueNetwork::value(const Vec& x) const {
  return beta_.dot(hidden_features(elm_, x) - anchor_);
}

Vec ValueNetwork::gradient(const Vec& x) const {
  return hidden_feature_jacobian(elm_, x) * beta_;
}

double eval_value(const ValueNetwork& net, const Vec& x) { return net.value(x); }

Vec eval_value_gradient(const ValueNetwork& net, const Vec& x) {
  return net.gradient(x);
}

}  // namespace xtfc

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


#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "xtfc/network.hpp"
#include "xtfc/numerics.hpp"
#include "xtfc/train.hpp"

using namespace xtfc;
using xtfc::testing::random_point;
using xtfc::testing::rel_error;

TEST_SUITE("network") {

TEST_CASE("swish and its derivative") {
  CHECK(swish(0.0) == 0.0);
  CHECK(swish(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-15));
  CHECK(swish_derivative(0.0) == 0.5);
  for (double z : {-30.0, -3.0, -0.4, 0.0, 0.7, 2.0, 25.0}) {
    const double h = 1e-6;
    const double fd = (swish(z + h) - swish(z - h)) / (2 * h);
    CHECK(swish_derivative(z) == doctest::Approx(fd).epsilon(1e-8));
    CHECK(std::isfinite(swish(-800.0 + z)));
  }
  CHECK(activation(Activation::Swish, 1.0) == swish(1.0));
  CHECK(activation_derivative(Activation::Swish, -2.0) == swish_derivative(-2.0));
  CHECK(parse_activation("swish") == Activation::Swish);
  CHECK_THROWS_AS(parse_activation("relu"), InvalidArgument);
}

TEST_CASE("init_elm is seeded and bounded") {
  const ElmParams a = init_elm(3, 40, 17, 1.0);
  const ElmParams b = init_elm(3, 40, 17, 1.0);
  CHECK(a.input_weights == b.input_weights);
  CHECK(a.biases == b.biases);
  CHECK(init_elm(3, 40, 18, 1.0).input_weights != a.input_weights);
  CHECK(a.hidden_count() == 40);
  CHECK(a.state_dim() == 3);

  const ElmParams big = init_elm(1, 50000, 3, 1.0);  // 10^5 draws
  CHECK(big.input_weights.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(big.biases.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(big.input_weights.minCoeff() < -0.99);
  CHECK(big.input_weights.maxCoeff() > 0.99);

  const ElmParams scaled = init_elm(2, 1000, 3, 0.25);
  CHECK(scaled.input_weights.cwiseAbs().maxCoeff() <= 0.25);
  CHECK(scaled.biases.cwiseAbs().maxCoeff() <= 0.25);
  CHECK_THROWS_AS(init_elm(2, 0, 1, 1.0), InvalidArgument);
  CHECK_THROWS_AS(init_elm(2, 5, 1, 0.0), InvalidArgument);
}

TEST_CASE("hidden features") {
  const ElmParams zero = make_elm(Mat::Zero(4, 2), Vec::Zero(4));
  CHECK(hidden_features(zero, Vec::Ones(2)).norm() == 0.0);
  CHECK(hidden_feature_jacobian(zero, Vec::Ones(2)).norm() == 0.0);

  const ElmParams one = make_elm((Mat(1, 2) << 1.0, 0.0).finished(), Vec::Zero(1));
  CHECK(hidden_features(one, (Vec(2) << 1.0, 0.3).finished())[0] ==
        doctest::Approx(0.7310586).epsilon(1e-7));

  const ElmParams two = make_elm((Mat(1, 2) << 2.0, 0.0).finished(), Vec::Zero(1));
  const Mat D = hidden_feature_jacobian(two, Vec::Zero(2));
  CHECK(D.rows() == 2);
  CHECK(D.cols() == 1);
  CHECK(D(0, 0) == 1.0);
  CHECK(D(1, 0) == 0.0);

  CHECK_THROWS_AS(hidden_features(one, Vec::Ones(3)), InvalidArgument);
  CHECK_THROWS_AS(hidden_feature_jacobian(one, Vec::Ones(1)), InvalidArgument);
}

TEST_CASE("feature Jacobian matches finite differences") {
  RngStream rng(31, RngPurpose::Sampling);
  const Domain box(Vec::Constant(3, -2.0), Vec::Constant(3, 2.0));
  const ElmParams elm = init_elm(3, 25, 5, 1.5);
  for (int i = 0; i < 100; ++i) {
    const Vec x = random_point(box, rng);
    const Mat D = hidden_feature_jacobian(elm, x);
    for (Eigen::Index j = 0; j < elm.hidden_count(); ++j) {
      const Vec fd = finite_difference_gradient(
          [&](const Vec& y) { return hidden_features(elm, y)[j]; }, x, 1e-6);
      // Features with a vanishing gradient are compared absolutely.
      const Vec col = D.col(j);
      if (col.norm() > 1e-3) {
        CHECK(rel_error(fd, col) < 1e-6);
      } else {
        CHECK((fd - col).norm() < 1e-9);
      }
    }
  }
}

TEST_CASE("build_H stacks hidden features") {
  RngStream rng(2, RngPurpose::Sampling);
  const ElmParams elm = init_elm(2, 7, 1);
  const Mat X = xtfc::testing::random_matrix(9, 2, rng);
  const Mat H = build_H(elm, X);
  REQUIRE(H.rows() == 9);
  REQUIRE(H.cols() == 7);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    CHECK(H.row(i).transpose() == hidden_features(elm, X.row(i).transpose()));
  }
  const Vec beta = Vec::LinSpaced(7, -1.0, 1.0);
  const ValueNetwork net(elm, beta);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double eta = H.row(i).dot(beta);
    CHECK(net.value(X.row(i).transpose()) ==
          doctest::Approx(eta - net.anchor().dot(beta)).epsilon(1e-14));
  }
  const ElmParams zero = make_elm(Mat::Zero(3, 2), Vec::Zero(3));
  CHECK(build_H(zero, Mat::Ones(1, 2)).norm() == 0.0);
}

TEST_CASE("constrained expression vanishes at the origin for any weights") {
  RngStream rng(13, RngPurpose::Sampling);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int n = 1 + static_cast<int>(seed % 3);
    const ElmParams elm = init_elm(n, 30, seed, 0.5 + static_cast<double>(seed));
    const Vec beta = seeded_uniform(rng, 30, -100.0, 100.0);
    const ValueNetwork net(elm, beta);
    CHECK(net.value(Vec::Zero(n)) == 0.0);
    CHECK(eval_value(net, Vec::Zero(n)) == 0.0);
    CHECK(net.anchor() == hidden_features(elm, Vec::Zero(n)));
  }
  const ValueNetwork zero_beta(init_elm(2, 10, 1));
  CHECK(zero_beta.value((Vec(2) << 0.3, -0.2).finished()) == 0.0);
  CHECK(zero_beta.gradient((Vec(2) << 0.3, -0.2).finished()).norm() == 0.0);
}

TEST_CASE("value is linear in beta") {
  RngStream rng(14, RngPurpose::Sampling);
  const ElmParams elm = init_elm(2, 40, 3);
  const Vec b1 = seeded_uniform(rng, 40, -1.0, 1.0);
  const Vec b2 = seeded_uniform(rng, 40, -1.0, 1.0);
  const Domain box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  for (int i = 0; i < 100; ++i) {
    const Vec x = random_point(box, rng);
    const double sum = ValueNetwork(elm, b1 + b2).value(x);
    CHECK(std::abs(sum - ValueNetwork(elm, b1).value(x) -
                   ValueNetwork(elm, b2).value(x)) < 1e-12);
  }
}

TEST_CASE("value gradient matches finite differences") {
  RngStream rng(15, RngPurpose::Sampling);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 2;
    const ElmParams elm = init_elm(n, 50, 100 + static_cast<std::uint64_t>(trial));
    const ValueNetwork net(elm, seeded_uniform(rng, 50, -2.0, 2.0));
    const Domain box(Vec::Constant(n, -3.0), Vec::Constant(n, 3.0));
    const Vec x = random_point(box, rng);
    const Vec fd = finite_difference_gradient(
        [&](const Vec& y) { return net.value(y); }, x, 1e-5);
    CHECK(rel_error(eval_value_gradient(net, x), fd) < 1e-6);
  }
}

TEST_CASE("dimension mismatch is rejected") {
  const ValueNetwork net(init_elm(2, 5, 1), Vec::Ones(5));
  CHECK_THROWS_AS(net.value(Vec::Ones(3)), InvalidArgument);
  CHECK_THROWS_AS(net.gradient(Vec::Ones(1)), InvalidArgument);
  CHECK_THROWS_AS(ValueNetwork(init_elm(2, 5, 1), Vec::Ones(4)), InvalidArgument);
}

TEST_CASE("fit to x^T x reproduces value and gradient") {
  const Domain box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  const Mat X = sample_training_points(box, 900, Sampling::Grid, 0);
  const ElmParams elm = init_elm(2, 60, 4);
  const Vec beta = elm_fit(elm, X, quadratic_targets(X, Mat::Identity(2, 2)), 1e-10);
  const ValueNetwork net(elm, beta);
  CHECK(net.value((Vec(2) << 0.5, 0.5).finished()) == doctest::Approx(0.5).epsilon(1e-3));
  const Vec g = net.gradient((Vec(2) << 0.5, 0.0).finished());
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::abs(g[1]) < 1e-3);
}

}  // TEST_SUITE

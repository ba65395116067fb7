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
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "xtfc/network.hpp"
#include "xtfc/numerics.hpp"
#include "xtfc/residual.hpp"
#include "xtfc/train.hpp"

using namespace xtfc;
using xtfc::testing::rel_error;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.hidden = 20;
  c.num_points = 200;
  c.adam_epochs = 50;
  c.lbfgs_iters = 30;
  c.adam_lr = 1e-3;
  return c;
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("sampled points lie in the domain and repeat with the seed") {
  const Domain domain(Vec::Constant(3, -1.0), (Vec(3) << 1.0, 2.0, 0.5).finished());
  for (Sampling s : {Sampling::UniformRandom, Sampling::LatinHypercube}) {
    CAPTURE(to_string(s));
    const Mat X = sample_training_points(domain, 500, s, 11);
    CHECK(X.rows() == 500);
    for (Eigen::Index i = 0; i < X.rows(); ++i) CHECK(domain.contains(X.row(i).transpose()));
    CHECK(X == sample_training_points(domain, 500, s, 11));
    CHECK(X != sample_training_points(domain, 500, s, 12));
  }
}

TEST_CASE("grid sampling includes the corners") {
  const Domain domain(Vec::Constant(2, -2.0), Vec::Constant(2, 3.0));
  const Mat X = sample_training_points(domain, 25, Sampling::Grid, 0);
  std::set<std::pair<double, double>> pts;
  for (Eigen::Index i = 0; i < X.rows(); ++i) pts.insert({X(i, 0), X(i, 1)});
  CHECK(pts.size() == 25);
  CHECK(pts.count({-2.0, -2.0}) == 1);
  CHECK(pts.count({-2.0, 3.0}) == 1);
  CHECK(pts.count({3.0, -2.0}) == 1);
  CHECK(pts.count({3.0, 3.0}) == 1);
  CHECK(pts.count({0.5, 0.5}) == 1);
  CHECK_THROWS_AS(sample_training_points(domain, 26, Sampling::Grid, 0), InvalidArgument);
}

TEST_CASE("latin hypercube puts one point in every stratum") {
  const Domain domain(Vec::Zero(2), Vec::Ones(2));
  const int m = 40;
  const Mat X = sample_training_points(domain, m, Sampling::LatinHypercube, 3);
  for (Eigen::Index k = 0; k < 2; ++k) {
    std::set<int> strata;
    for (Eigen::Index i = 0; i < m; ++i) strata.insert(static_cast<int>(X(i, k) * m));
    CHECK(strata.size() == static_cast<std::size_t>(m));
  }
}

TEST_CASE("quadratic targets") {
  Mat X(2, 2);
  X << 1, 2, -1, 0.5;
  Mat Q(2, 2);
  Q << 2, 1, 1, 3;
  const Vec t = quadratic_targets(X, Q);
  CHECK(t[0] == doctest::Approx(2 + 4 + 12));
  CHECK(t[1] == doctest::Approx(2 - 1 + 0.75));
}

TEST_CASE("elm_fit satisfies the ridge normal equations") {
  RngStream rng(4, RngPurpose::Sampling);
  const ElmParams elm = init_elm(2, 30, 5);
  const Mat X = testing::random_points(make_double_integrator().domain(), 300, rng);
  const Vec t = quadratic_targets(X, Mat::Identity(2, 2));
  const double ridge = 1e-6;
  const Vec beta = elm_fit(elm, X, t, ridge);
  const Mat H = build_H(elm, X);
  const Vec lhs = (H.transpose() * H + ridge * Mat::Identity(30, 30)) * beta;
  CHECK(rel_error(lhs, H.transpose() * t) < 1e-8);
}

TEST_CASE("lqr value matrix matches closed-form Riccati solutions") {
  Mat di(2, 2);
  di << std::sqrt(3.0) / 2, 0.5, 0.5, std::sqrt(3.0) / 2;
  CHECK((lqr_value_matrix(make_double_integrator()) - di).norm() < 1e-8);

  // Pendulum linearization: A = [[0,1],[a2,-a1]], B = [0;b2], Q = I, R = 1.
  const Mat pend = lqr_value_matrix(make_pendulum());
  CHECK(pend(0, 0) == doctest::Approx(13.8069).epsilon(1e-4));
  CHECK(pend(0, 1) == doctest::Approx(3.3036).epsilon(1e-4));
  CHECK(pend(1, 1) == doctest::Approx(0.9194).epsilon(1e-4));

  // Detumbling has zero drift Jacobian at rest: P = J when Q = R = I.
  const OcpInstance det = make_detumbling();
  const Mat P = lqr_value_matrix(det);
  const Vec diag = (Vec(3) << 1.0, 2.0, 3.0).finished();
  CHECK((P - Mat(diag.asDiagonal())).norm() < 1e-8);
}

TEST_CASE("pendulum Riccati matrix solves the algebraic equation") {
  const OcpInstance p = make_pendulum();
  const Mat P = lqr_value_matrix(p);
  const Mat A = finite_difference_jacobian([&](const Vec& x) { return p.drift(x); },
                                           Vec::Zero(2), 1e-6);
  const Mat B = p.input_map(Vec::Zero(2));
  const Mat care = A.transpose() * P + P * A -
                   P * B * p.control_weight_inverse() * B.transpose() * P + p.state_weight();
  CHECK(care.norm() < 1e-6);
}

TEST_CASE("training stages never increase the loss") {
  TrainConfig c = small_config();
  const OcpInstance p = make_double_integrator();
  std::ostringstream log;
  const auto [net, report] = train(p, c, &log);
  CHECK(report.adam_loss <= report.stage1_loss);
  CHECK(report.final_loss <= report.adam_loss);
  CHECK(report.loss_history.front().stage == "elm");
  CHECK(report.loss_history[report.adam_begin].stage == "adam");
  CHECK(log.str().find("[lbfgs]") != std::string::npos);

  const Mat X = sample_training_points(p.domain(), c.num_points, c.sampling, c.seed);
  CHECK(loss(net, p, c.policy_mode, X, c.lambda) ==
        doctest::Approx(report.final_loss).epsilon(1e-12));
  CHECK(std::abs(net.value(Vec::Zero(2))) < 1e-15);
}

TEST_CASE("training is bitwise reproducible across thread counts") {
  TrainConfig c = small_config();
  c.num_points = 700;
  const OcpInstance p = make_nonlinear_benchmark();
  const auto [a, ra] = train(p, c);
  c.threads = 4;
  const auto [b, rb] = train(p, c);
  CHECK(a.beta() == b.beta());
  CHECK(ra.final_loss == rb.final_loss);
  c.seed = 1;
  const auto [d, rd] = train(p, c);
  CHECK(d.beta() != a.beta());
}

TEST_CASE("every init mode trains") {
  for (InitMode m : {InitMode::Quadratic, InitMode::Lqr, InitMode::Random}) {
    CAPTURE(to_string(m));
    TrainConfig c = small_config();
    c.init_mode = m;
    const auto [net, report] = train(make_double_integrator(), c);
    CHECK(std::isfinite(report.final_loss));
    CHECK(report.final_loss <= report.stage1_loss);
    CHECK(parse_init_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_init_mode("zero"), InvalidArgument);
}

TEST_CASE("invalid configurations are rejected") {
  const OcpInstance p = make_double_integrator();
  auto rejects = [&](auto mutate) {
    TrainConfig c = small_config();
    mutate(c);
    CHECK_THROWS_AS(train(p, c), InvalidArgument);
  };
  rejects([](TrainConfig& c) { c.hidden = 0; });
  rejects([](TrainConfig& c) { c.num_points = 0; });
  rejects([](TrainConfig& c) { c.lambda = -1.0; });
  rejects([](TrainConfig& c) { c.adam_lr = 0.0; });
  rejects([](TrainConfig& c) { c.lbfgs_memory = 0; });
  rejects([](TrainConfig& c) { c.threads = 0; });
  // Constrained modes need control bounds.
  rejects([](TrainConfig& c) { c.policy_mode = PolicyMode::ConstrainedClipped; });
}

TEST_CASE("per-problem defaults") {
  CHECK(default_train_config("pendulum").init_mode == InitMode::Lqr);
  CHECK(default_train_config("pendulum").policy_mode == PolicyMode::ConstrainedClipped);
  CHECK(default_train_config("detumbling").hidden == 400);
  CHECK(default_train_config("double_integrator").num_points == 2500);
  const TrainConfig fallback = default_train_config("custom");
  CHECK(fallback.lambda == 1e-9);
  CHECK(fallback.adam_lr == 1e-2);
}

}  // TEST_SUITE

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

#include "xtfc/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "xtfc/numerics.hpp"
#include "xtfc/residual.hpp"

namespace xtfc {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Objective make_objective(const ResidualObjective& residual) {
  return [&residual](const Vec& beta) {
    auto e = residual.evaluate(beta);
    return ObjectiveValue{e.loss, std::move(e.gradient)};
  };
}

AdamOptions adam_options(const TrainConfig& c) {
  AdamOptions o;
  o.epochs = c.adam_epochs;
  o.learning_rate = c.adam_lr;
  o.clip_norm = c.clip_norm;
  o.schedule = c.scheduler;
  return o;
}

LbfgsOptions lbfgs_options(const TrainConfig& c) {
  LbfgsOptions o;
  o.max_iterations = c.lbfgs_iters;
  o.memory = c.lbfgs_memory;
  return o;
}

}  // namespace

std::string to_string(Sampling s) {
  switch (s) {
    case Sampling::UniformRandom:
      return "uniform_random";
    case Sampling::Grid:
      return "grid";
    case Sampling::LatinHypercube:
      return "latin_hypercube";
  }
  return "unknown";
}

Sampling parse_sampling(std::string_view name) {
  if (name == "uniform_random") return Sampling::UniformRandom;
  if (name == "grid") return Sampling::Grid;
  if (name == "latin_hypercube") return Sampling::LatinHypercube;
  throw InvalidArgument("unknown sampling '" + std::string(name) +
                        "' (expected uniform_random, grid or latin_hypercube)");
}

std::string to_string(InitMode m) {
  switch (m) {
    case InitMode::Quadratic: return "quadratic";
    case InitMode::Lqr: return "lqr";
    case InitMode::Random: return "random";
  }
  return "unknown";
}

InitMode parse_init_mode(std::string_view name) {
  if (name == "quadratic") return InitMode::Quadratic;
  if (name == "lqr") return InitMode::Lqr;
  if (name == "random") return InitMode::Random;
  throw InvalidArgument("unknown init_mode '" + std::string(name) +
                        "' (expected quadratic, lqr or random)");
}

void TrainConfig::validate() const {
  require(hidden >= 1, "train.hidden must be >= 1");
  require(weight_scale > 0.0, "network.weight_scale must be positive");
  require(num_points >= 1, "train.num_points must be >= 1");
  require(ridge >= 0.0, "train.ridge must be non-negative");
  require(lambda >= 0.0, "train.lambda must be non-negative");
  require(adam_lr > 0.0, "train.adam_lr must be positive");
  require(adam_epochs >= 1, "train.adam_epochs must be >= 1");
  require(clip_norm > 0.0, "train.clip_norm must be positive");
  require(lbfgs_iters >= 0, "train.lbfgs_iters must be non-negative");
  require(lbfgs_memory >= 1, "train.lbfgs_memory must be >= 1");
  require(scheduler.patience >= 1, "train.patience must be >= 1");
  require(scheduler.factor > 0.0 && scheduler.factor < 1.0,
          "train.factor must lie in (0, 1)");
  require(threads >= 1, "train.threads must be >= 1");
}

TrainConfig default_train_config(std::string_view problem) {
  TrainConfig c;
  if (problem == "double_integrator" || problem == "nonlinear_benchmark") {
    c.hidden = 100;
    c.num_points = 2500;
    c.lambda = 1e-12;
    c.adam_lr = 1e-3;
    c.adam_epochs = 2000;
    c.lbfgs_iters = 5000;
    c.lbfgs_memory = 50;
  } else if (problem == "pendulum") {
    c.hidden = 200;
    c.num_points = 5000;
    c.init_mode = InitMode::Lqr;
    c.lambda = 1e-12;
    c.adam_lr = 1e-3;
    c.adam_epochs = 2000;
    c.lbfgs_iters = 3000;
    c.lbfgs_memory = 50;
    c.policy_mode = PolicyMode::ConstrainedClipped;
  } else if (problem == "detumbling") {
    c.hidden = 400;
    c.num_points = 25000;
    c.adam_epochs = 5000;
    c.lbfgs_iters = 500;
  }
  return c;
}

Mat sample_training_points(const Domain& domain, int count, Sampling sampling,
                           std::uint64_t seed) {
  require(count >= 1, "sample_training_points: count must be >= 1");
  const Eigen::Index n = domain.dim();
  const Vec& lo = domain.lower();
  const Vec& hi = domain.upper();
  Mat X(count, n);
  RngStream stream(seed, RngPurpose::Sampling);

  switch (sampling) {
    case Sampling::UniformRandom:
      for (int i = 0; i < count; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) X(i, k) = stream.uniform(lo[k], hi[k]);
      }
      return X;
    case Sampling::Grid: {
      const auto per_axis = static_cast<long>(
          std::llround(std::pow(static_cast<double>(count), 1.0 / n)));
      long total = 1;
      for (Eigen::Index k = 0; k < n; ++k) total *= per_axis;
      require(total == count,
              "sample_training_points: grid sampling needs a perfect power "
              "of the state dimension");
      for (int i = 0; i < count; ++i) {
        long rem = i;
        for (Eigen::Index k = n - 1; k >= 0; --k) {
          const long idx = rem % per_axis;
          rem /= per_axis;
          X(i, k) = per_axis == 1
                        ? 0.5 * (lo[k] + hi[k])
                        : lo[k] + (hi[k] - lo[k]) * static_cast<double>(idx) /
                                      static_cast<double>(per_axis - 1);
        }
      }
      return X;
    }
    case Sampling::LatinHypercube: {
      std::vector<int> perm(count);
      for (Eigen::Index k = 0; k < n; ++k) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = count - 1; i > 0; --i) {
          const auto j = static_cast<int>(stream.below(static_cast<std::uint64_t>(i) + 1));
          std::swap(perm[i], perm[j]);
        }
        for (int i = 0; i < count; ++i) {
          const double u = (perm[i] + stream.uniform(0.0, 1.0)) / count;
          X(i, k) = std::min(hi[k], lo[k] + (hi[k] - lo[k]) * u);
        }
      }
      return X;
    }
  }
  throw InvalidArgument("sample_training_points: unknown sampling");
}

Vec quadratic_targets(const Mat& X, const Mat& Q) {
  require_dim(Q.rows(), X.cols(), "quadratic_targets: Q");
  require_dim(Q.cols(), X.cols(), "quadratic_targets: Q");
  return (X * Q).cwiseProduct(X).rowwise().sum();
}

Mat lqr_value_matrix(const OcpInstance& problem) {
  const Vec origin = Vec::Zero(problem.state_dim());
  const Mat A = finite_difference_jacobian(
      [&](const Vec& x) { return problem.drift(x); }, origin, 1e-6);
  return solve_care(A, problem.input_map(origin), problem.state_weight(),
                    problem.control_weight());
}

Vec elm_fit(const ElmParams& elm, const Mat& X, const Vec& targets,
            double ridge) {
  return ridge_pinv_solve(build_H(elm, X), targets, ridge);
}

OptimizeResult run_adam(const ValueNetwork& net, const OcpInstance& problem,
                        const Mat& X, const TrainConfig& config) {
  const ResidualObjective residual(net.elm(), problem, config.policy_mode, X,
                                   config.lambda, config.threads);
  return run_adam(make_objective(residual), net.beta(), adam_options(config));
}

OptimizeResult run_lbfgs(const ValueNetwork& net, const OcpInstance& problem,
                         const Mat& X, const TrainConfig& config) {
  const ResidualObjective residual(net.elm(), problem, config.policy_mode, X,
                                   config.lambda, config.threads);
  return run_lbfgs(make_objective(residual), net.beta(),
                   lbfgs_options(config));
}

std::pair<ValueNetwork, TrainReport> train(const OcpInstance& problem,
                                           const TrainConfig& config,
                                           std::ostream* log) {
  config.validate();
  validate_policy_mode(problem, config.policy_mode);

  TrainReport report;
  report.config = config;

  // Stage 1: analytic fit of the output weights.
  auto t0 = Clock::now();
  ElmParams elm = init_elm(problem.state_dim(), config.hidden, config.seed,
                           config.weight_scale);
  const Mat X = sample_training_points(problem.domain(), config.num_points,
                                       config.sampling, config.seed);
  Vec beta;
  if (config.init_mode == InitMode::Quadratic) {
    beta = elm_fit(elm, X, quadratic_targets(X, problem.state_weight()),
                   config.ridge);
  } else if (config.init_mode == InitMode::Lqr) {
    beta = elm_fit(elm, X, quadratic_targets(X, lqr_value_matrix(problem)),
                   config.ridge);
  } else {
    RngStream stream(config.seed, RngPurpose::InitBeta);
    beta = seeded_uniform(stream, config.hidden, -1e-3, 1e-3);
  }
  const ResidualObjective residual(elm, problem, config.policy_mode, X,
                                   config.lambda, config.threads);
  const Objective objective = make_objective(residual);
  report.stage1_loss = objective(beta).value;
  report.loss_history.push_back({0, report.stage1_loss, "elm", 0.0});
  report.elm_seconds = seconds_since(t0);
  if (log) {
    *log << "[elm] loss " << report.stage1_loss << " (" << report.elm_seconds
         << " s)\n";
  }
  if (!std::isfinite(report.stage1_loss)) {
    throw NumericalError("elm: non-finite loss after the analytic fit");
  }

  // Stage 2a: Adam.
  t0 = Clock::now();
  report.adam_begin = report.loss_history.size();
  const OptimizeResult adam = run_adam(objective, beta, adam_options(config));
  for (const auto& rec : adam.history) {
    report.loss_history.push_back({rec.iteration, rec.loss, "adam", rec.learning_rate});
  }
  if (adam.best_loss < report.stage1_loss) beta = adam.best;
  report.adam_loss = std::min(adam.best_loss, report.stage1_loss);
  report.adam_seconds = seconds_since(t0);
  if (log) {
    *log << "[adam] best loss " << report.adam_loss << " after "
         << adam.iterations << " epochs (" << report.adam_seconds << " s)\n";
  }

  // Stage 2b: L-BFGS.
  t0 = Clock::now();
  report.lbfgs_begin = report.loss_history.size();
  const OptimizeResult lbfgs = run_lbfgs(objective, beta, lbfgs_options(config));
  const int offset = config.adam_epochs;
  for (const auto& rec : lbfgs.history) {
    report.loss_history.push_back(
        {offset + rec.iteration, rec.loss, "lbfgs", rec.learning_rate});
  }
  if (lbfgs.best_loss < report.adam_loss) beta = lbfgs.best;
  report.lbfgs_iterations = lbfgs.iterations;
  report.warning = lbfgs.warning;
  report.lbfgs_seconds = seconds_since(t0);

  report.final_loss = objective(beta).value;
  if (log) {
    *log << "[lbfgs] final loss " << report.final_loss << " after "
         << lbfgs.iterations << " iterations (" << report.lbfgs_seconds
         << " s)\n";
    if (!lbfgs.warning.empty()) *log << "warning: " << lbfgs.warning << "\n";
  }
  return {ValueNetwork(std::move(elm), std::move(beta)), std::move(report)};
}

}  // namespace xtfc

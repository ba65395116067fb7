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
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xtfc/network.hpp"
#include "xtfc/optimizers.hpp"
#include "xtfc/policy.hpp"
#include "xtfc/problem.hpp"

namespace xtfc {

enum class Sampling { UniformRandom, Grid, LatinHypercube };
enum class InitMode { Quadratic, Lqr, Random };

std::string to_string(Sampling s);
Sampling parse_sampling(std::string_view name);
std::string to_string(InitMode m);
InitMode parse_init_mode(std::string_view name);

struct TrainConfig {
  // network
  int hidden = 100;
  double weight_scale = 1.0;
  // data
  int num_points = 2500;
  Sampling sampling = Sampling::UniformRandom;
  std::uint64_t seed = 0;
  // stage 1
  InitMode init_mode = InitMode::Quadratic;
  double ridge = 1e-8;
  // stage 2
  double lambda = 1e-9;
  double adam_lr = 1e-2;
  int adam_epochs = 1000;
  PlateauSchedule scheduler;
  double clip_norm = 1.0;
  int lbfgs_iters = 500;
  int lbfgs_memory = 10;
  PolicyMode policy_mode = PolicyMode::Unconstrained;
  // execution; never affects results
  int threads = 1;

  void validate() const;
};

/// Defaults tuned per benchmark.
TrainConfig default_train_config(std::string_view problem);

struct LossRecord {
  int epoch = 0;
  double loss = 0.0;
  std::string stage;  // "elm", "adam" or "lbfgs"
  double lr = 0.0;
};

struct TrainReport {
  std::vector<LossRecord> loss_history;
  std::size_t adam_begin = 0;   // index of the first Adam record
  std::size_t lbfgs_begin = 0;  // index of the first L-BFGS record
  double stage1_loss = 0.0;
  double adam_loss = 0.0;       // best loss after Adam
  double final_loss = 0.0;
  double elm_seconds = 0.0;
  double adam_seconds = 0.0;
  double lbfgs_seconds = 0.0;
  int lbfgs_iterations = 0;
  std::string warning;
  TrainConfig config;
};

/// M points inside the domain, deterministic in `seed`. Grid mode needs M to
/// be a perfect n-th power and includes the corners.
Mat sample_training_points(const Domain& domain, int count, Sampling sampling,
                           std::uint64_t seed);

/// t_i = x_i^T Q x_i.
Vec quadratic_targets(const Mat& X, const Mat& Q);

/// Riccati matrix P of the problem linearized at the origin, so that xᵀPx is
/// the LQR value of the linear-quadratic approximation.
Mat lqr_value_matrix(const OcpInstance& problem);

/// Output weights minimizing ||H beta - T||^2 + ridge ||beta||^2.
Vec elm_fit(const ElmParams& elm, const Mat& X, const Vec& targets, double ridge);

OptimizeResult run_adam(const ValueNetwork& net, const OcpInstance& problem,
                        const Mat& X, const TrainConfig& config);
OptimizeResult run_lbfgs(const ValueNetwork& net, const OcpInstance& problem,
                         const Mat& X, const TrainConfig& config);

/// Stage 1 (ELM fit to the initial guess) followed by Stage 2 (Adam, then
/// L-BFGS on the HJB residual loss). `log`, when given, receives progress.
std::pair<ValueNetwork, TrainReport> train(const OcpInstance& problem,
                                           const TrainConfig& config,
                                           std::ostream* log = nullptr);

}  // namespace xtfc

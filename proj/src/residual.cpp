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

#include "xtfc/residual.hpp"

#include <cmath>

#include "xtfc/numerics.hpp"
#include "xtfc/parallel.hpp"

namespace xtfc {
namespace {

Eigen::Index num_chunks(Eigen::Index rows, Eigen::Index chunk) {
  return (rows + chunk - 1) / chunk;
}

double mean_square(const Vec& r) {
  Vec sq = r.array().square();
  return pairwise_sum(std::span<const double>(sq.data(), sq.size())) /
         static_cast<double>(r.size());
}

}  // namespace

double hjb_residual_from_gradient(const OcpInstance& problem, PolicyMode mode,
                                  const Vec& x, const Vec& vx) {
  require_dim(vx.size(), problem.state_dim(), "hjb_residual: value gradient");
  const Vec w = control_preimage(vx, problem.input_map(x));
  return vx.dot(problem.drift(x)) + problem.state_cost(x) -
         conjugate_value(w, problem.control_weight(), problem.bounds(), mode);
}

double hjb_residual(const ValueNetwork& net, const OcpInstance& problem,
                    PolicyMode mode, const Vec& x) {
  return hjb_residual_from_gradient(problem, mode, x, net.gradient(x));
}

ResidualBatch evaluate_batch(const ValueNetwork& net, const OcpInstance& problem,
                             PolicyMode mode, const Mat& X, double lambda,
                             int threads) {
  require(X.rows() >= 1, "loss: empty training set");
  require(lambda >= 0.0, "loss: lambda must be non-negative");
  require_dim(X.cols(), problem.state_dim(), "loss: point width");
  validate_policy_mode(problem, mode);

  const Eigen::Index M = X.rows();
  const Eigen::Index N = net.hidden_count();
  constexpr Eigen::Index kChunk = 64;
  const Eigen::Index chunks = num_chunks(M, kChunk);

  ResidualBatch batch;
  batch.points = X;
  batch.residuals.resize(M);
  std::vector<Vec> partial(chunks, Vec::Zero(N));

  parallel_for(chunks, threads, [&](std::size_t c) {
    const Eigen::Index begin = static_cast<Eigen::Index>(c) * kChunk;
    const Eigen::Index end = std::min(M, begin + kChunk);
    for (Eigen::Index i = begin; i < end; ++i) {
      const Vec x = X.row(i).transpose();
      const Mat D = hidden_feature_jacobian(net.elm(), x);
      const Vec vx = D * net.beta();
      const Mat B = problem.input_map(x);
      const Vec A = problem.drift(x);
      const ControlSolution sol =
          solve_control(problem, mode, control_preimage(vx, B));
      const double r = vx.dot(A) + problem.state_cost(x) - sol.conjugate;
      batch.residuals[i] = r;
      // d r / d beta = D^T (A + B dg*/dw).
      partial[c] += r * (D.transpose() * (A + B * sol.conjugate_grad));
    }
  });

  Vec grad = Vec::Zero(N);
  for (const Vec& p : partial) grad += p;
  batch.grad_beta = (2.0 / static_cast<double>(M)) * grad +
                    2.0 * lambda * net.beta();
  batch.loss = mean_square(batch.residuals) + lambda * net.beta().squaredNorm();
  return batch;
}

double loss(const ValueNetwork& net, const OcpInstance& problem,
            PolicyMode mode, const Mat& X, double lambda, int threads) {
  return evaluate_batch(net, problem, mode, X, lambda, threads).loss;
}

Vec loss_gradient_beta(const ValueNetwork& net, const OcpInstance& problem,
                       PolicyMode mode, const Mat& X, double lambda,
                       int threads) {
  return evaluate_batch(net, problem, mode, X, lambda, threads).grad_beta;
}

ResidualObjective::ResidualObjective(const ElmParams& elm,
                                     const OcpInstance& problem,
                                     PolicyMode mode, const Mat& X,
                                     double lambda, int threads)
    : elm_(elm),
      problem_(problem),
      mode_(mode),
      X_(X),
      lambda_(lambda),
      threads_(threads) {
  require(X_.rows() >= 1, "ResidualObjective: empty training set");
  require(lambda_ >= 0.0, "ResidualObjective: lambda must be non-negative");
  require_dim(X_.cols(), problem_.state_dim(), "ResidualObjective: points");
  require_dim(elm_.state_dim(), problem_.state_dim(),
              "ResidualObjective: network input");
  validate_policy_mode(problem_, mode_);

  const Eigen::Index M = X_.rows();
  drift_.resize(M);
  input_map_.resize(M);
  state_cost_.resize(M);
  for (Eigen::Index i = 0; i < M; ++i) {
    const Vec x = X_.row(i).transpose();
    drift_[i] = problem_.drift(x);
    input_map_[i] = problem_.input_map(x);
    state_cost_[i] = problem_.state_cost(x);
  }

  const std::size_t bytes = static_cast<std::size_t>(M) *
                            static_cast<std::size_t>(elm_.hidden_count()) *
                            sizeof(double);
  if (bytes <= kSlopeCacheBytes) {
    slopes_.resize(M, elm_.hidden_count());
    const Eigen::Index chunks = num_chunks(M, kChunkRows);
    parallel_for(chunks, threads_, [&](std::size_t c) {
      const Eigen::Index row0 = static_cast<Eigen::Index>(c) * kChunkRows;
      const Eigen::Index rows = std::min(kChunkRows, M - row0);
      Mat block;
      fill_slopes(row0, rows, block);
      slopes_.middleRows(row0, rows) = block;
    });
  }
}

void ResidualObjective::fill_slopes(Eigen::Index row0, Eigen::Index rows,
                                    Mat& out) const {
  const Eigen::Index N = elm_.hidden_count();
  out.resize(rows, N);
  Vec x(X_.cols());
  for (Eigen::Index i = 0; i < rows; ++i) {
    x = X_.row(row0 + i).transpose();
    for (Eigen::Index j = 0; j < N; ++j) {
      out(i, j) = activation_derivative(elm_.activation,
                                        preactivation(elm_, j, x.data()));
    }
  }
}

ResidualObjective::Evaluation ResidualObjective::evaluate(
    const Vec& beta) const {
  require_dim(beta.size(), elm_.hidden_count(), "ResidualObjective: beta");
  const Eigen::Index M = X_.rows();
  const Eigen::Index n = X_.cols();
  const Eigen::Index N = elm_.hidden_count();
  const Eigen::Index chunks = num_chunks(M, kChunkRows);

  // G(j, k) = beta_j W(j, k), so V_x for a block of points is S_block * G.
  const Mat G = beta.asDiagonal() * elm_.input_weights;

  Evaluation out;
  out.residuals.resize(M);
  std::vector<Mat> partial(chunks);

  parallel_for(chunks, threads_, [&](std::size_t c) {
    const Eigen::Index row0 = static_cast<Eigen::Index>(c) * kChunkRows;
    const Eigen::Index rows = std::min(kChunkRows, M - row0);
    Mat local;
    if (slopes_.size() == 0) fill_slopes(row0, rows, local);
    const auto S = slopes_.size() != 0
                       ? Eigen::Ref<const Mat>(slopes_.middleRows(row0, rows))
                       : Eigen::Ref<const Mat>(local);

    const Mat V = S * G;  // rows x n
    Mat weighted(rows, n);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Eigen::Index p = row0 + i;
      const Vec vx = V.row(i).transpose();
      const Mat& B = input_map_[p];
      const ControlSolution sol =
          solve_control(problem_, mode_, -(B.transpose() * vx));
      const double r = vx.dot(drift_[p]) + state_cost_[p] - sol.conjugate;
      out.residuals[p] = r;
      weighted.row(i) =
          (r * (drift_[p] + B * sol.conjugate_grad)).transpose();
    }
    partial[c] = S.transpose() * weighted;  // N x n
  });

  Mat P = Mat::Zero(N, n);
  for (const Mat& p : partial) P += p;
  const Vec grad = P.cwiseProduct(elm_.input_weights).rowwise().sum();

  out.gradient = (2.0 / static_cast<double>(M)) * grad + 2.0 * lambda_ * beta;
  out.loss = mean_square(out.residuals) + lambda_ * beta.squaredNorm();
  return out;
}

}  // namespace xtfc

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

#include "xtfc/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "xtfc/numerics.hpp"

namespace xtfc {
namespace {

void check_finite(const ObjectiveValue& f, const char* stage, int iteration) {
  if (std::isfinite(f.value) && f.gradient.allFinite()) return;
  std::ostringstream msg;
  msg << stage << ": non-finite loss at iteration " << iteration
      << " (loss " << f.value << ", gradient norm " << f.gradient.norm()
      << ")";
  throw NumericalError(msg.str());
}

struct LinePoint {
  double step = 0.0;
  double value = 0.0;
  double slope = 0.0;  // directional derivative
};

// Minimizer of the cubic matching values and slopes at a and b; falls back to
// bisection when the interpolant is degenerate or lands near an endpoint.
double interpolate(const LinePoint& a, const LinePoint& b) {
  const double lo = std::min(a.step, b.step);
  const double hi = std::max(a.step, b.step);
  const double mid = 0.5 * (lo + hi);
  const double width = hi - lo;
  if (width <= 0.0) return mid;
  const double d1 =
      a.slope + b.slope - 3.0 * (a.value - b.value) / (a.step - b.step);
  const double disc = d1 * d1 - a.slope * b.slope;
  if (!(disc >= 0.0)) return mid;
  const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
  const double denom = b.slope - a.slope + 2.0 * d2;
  if (denom == 0.0) return mid;
  const double t = b.step - (b.step - a.step) * (b.slope + d2 - d1) / denom;
  if (!std::isfinite(t) || t < lo + 0.1 * width || t > hi - 0.1 * width) {
    return mid;
  }
  return t;
}

struct LineSearchResult {
  bool ok = false;
  double step = 0.0;
  Vec point;
  ObjectiveValue value;
  int evaluations = 0;
};

// Strong-Wolfe bracketing search followed by zoom.
LineSearchResult strong_wolfe(const Objective& objective, const Vec& x,
                              const ObjectiveValue& f0, const Vec& direction,
                              double initial_step, const LbfgsOptions& opt) {
  LineSearchResult out;
  const double slope0 = f0.gradient.dot(direction);
  if (!(slope0 < 0.0)) return out;

  auto probe = [&](double step, LineSearchResult& r) {
    r.point = x + step * direction;
    r.value = objective(r.point);
    r.step = step;
    ++out.evaluations;
    return LinePoint{step, r.value.value, r.value.gradient.dot(direction)};
  };
  auto sufficient = [&](const LinePoint& p) {
    return p.value <= f0.value + opt.c1 * p.step * slope0;
  };
  auto curvature = [&](const LinePoint& p) {
    return std::abs(p.slope) <= -opt.c2 * slope0;
  };

  auto zoom = [&](LinePoint lo, LinePoint hi) {
    LineSearchResult trial;
    while (out.evaluations < opt.max_line_search) {
      const LinePoint p = probe(interpolate(lo, hi), trial);
      if (!std::isfinite(p.value)) {
        hi = p;
        continue;
      }
      if (!sufficient(p) || p.value >= lo.value) {
        hi = p;
      } else {
        if (curvature(p)) {
          trial.ok = true;
          trial.evaluations = out.evaluations;
          return trial;
        }
        if (p.slope * (hi.step - lo.step) >= 0.0) hi = lo;
        lo = p;
      }
      if (std::abs(hi.step - lo.step) <= 1e-16 * std::max(1.0, lo.step)) break;
    }
    trial.ok = false;
    trial.evaluations = out.evaluations;
    return trial;
  };

  LinePoint prev{0.0, f0.value, slope0};
  double step = initial_step;
  for (int i = 0; out.evaluations < opt.max_line_search; ++i) {
    LineSearchResult trial;
    const LinePoint p = probe(step, trial);
    if (!std::isfinite(p.value)) {
      // Overshot into a non-finite region; shrink and retry.
      step = 0.5 * (prev.step + step);
      continue;
    }
    if (!sufficient(p) || (i > 0 && p.value >= prev.value)) {
      return zoom(prev, p);
    }
    if (curvature(p)) {
      trial.ok = true;
      trial.evaluations = out.evaluations;
      return trial;
    }
    if (p.slope >= 0.0) return zoom(p, prev);
    prev = p;
    step *= 2.0;
  }
  return out;
}

}  // namespace

OptimizeResult run_adam(const Objective& objective, const Vec& start,
                        const AdamOptions& options) {
  require(options.epochs >= 0, "run_adam: epochs must be non-negative");
  require(options.learning_rate > 0.0, "run_adam: learning rate must be positive");
  require(options.clip_norm > 0.0, "run_adam: clip_norm must be positive");

  OptimizeResult result;
  Vec beta = start;
  Vec m = Vec::Zero(beta.size());
  Vec v = Vec::Zero(beta.size());
  double lr = options.learning_rate;
  double schedule_best = std::numeric_limits<double>::infinity();
  int stale = 0;
  double decay1 = 1.0;
  double decay2 = 1.0;

  ObjectiveValue f = objective(beta);
  check_finite(f, "adam", 0);
  result.best = beta;
  result.best_loss = f.value;

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const Vec g = std::isinf(options.clip_norm)
                      ? f.gradient
                      : clip_global_norm(f.gradient, options.clip_norm);
    m = options.beta1 * m + (1.0 - options.beta1) * g;
    v = options.beta2 * v + (1.0 - options.beta2) * g.cwiseAbs2();
    decay1 *= options.beta1;
    decay2 *= options.beta2;
    const double step = lr * std::sqrt(1.0 - decay2) / (1.0 - decay1);
    beta.array() -= step * m.array() /
                    (v.array().sqrt() + options.epsilon * std::sqrt(1.0 - decay2));

    f = objective(beta);
    check_finite(f, "adam", epoch);
    result.history.push_back({epoch, f.value, lr});
    result.iterations = epoch;
    if (f.value < result.best_loss) {
      result.best_loss = f.value;
      result.best = beta;
    }

    if (options.schedule.enabled) {
      if (f.value < schedule_best - options.schedule.threshold) {
        schedule_best = f.value;
        stale = 0;
      } else if (++stale >= options.schedule.patience) {
        lr *= options.schedule.factor;
        stale = 0;
      }
    }
  }
  return result;
}

OptimizeResult run_lbfgs(const Objective& objective, const Vec& start,
                         const LbfgsOptions& options) {
  require(options.max_iterations >= 0, "run_lbfgs: iterations must be non-negative");
  require(options.memory >= 1, "run_lbfgs: memory must be positive");

  OptimizeResult result;
  Vec x = start;
  ObjectiveValue f = objective(x);
  check_finite(f, "lbfgs", 0);
  result.best = x;
  result.best_loss = f.value;

  std::deque<Vec> s_hist;
  std::deque<Vec> y_hist;
  std::deque<double> rho_hist;

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const double gnorm = f.gradient.norm();
    if (gnorm <= options.gradient_tolerance) break;

    // Two-loop recursion for d = -H g.
    Vec q = f.gradient;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) {
      gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    }
    Vec d = gamma * q;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double b = rho_hist[i] * y_hist[i].dot(d);
      d += s_hist[i] * (alpha[i] - b);
    }
    d = -d;
    if (!(d.dot(f.gradient) < 0.0)) {
      // Not a descent direction: restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -f.gradient;
    }

    const double initial = s_hist.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;
    LineSearchResult ls = strong_wolfe(objective, x, f, d, initial, options);
    if (!ls.ok) {
      result.warning = "lbfgs: line search failed at iteration " +
                       std::to_string(iter) + "; returning best iterate";
      break;
    }
    check_finite(ls.value, "lbfgs", iter);

    Vec s = ls.point - x;
    Vec y = ls.value.gradient - f.gradient;
    const double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm() && sy > 0.0) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    x = std::move(ls.point);
    f = std::move(ls.value);
    result.iterations = iter;
    result.history.push_back({iter, f.value, ls.step});
    if (f.value < result.best_loss) {
      result.best_loss = f.value;
      result.best = x;
    }
  }
  return result;
}

}  // namespace xtfc

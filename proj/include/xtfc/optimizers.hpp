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

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "xtfc/types.hpp"

namespace xtfc {

/// f(beta) and its gradient.
struct ObjectiveValue {
  double value = 0.0;
  Vec gradient;
};
using Objective = std::function<ObjectiveValue(const Vec&)>;

/// Halves (by default) the learning rate when the loss has not improved by
/// more than `threshold` for `patience` consecutive epochs.
struct PlateauSchedule {
  bool enabled = true;
  int patience = 200;
  double factor = 0.5;
  double threshold = 1e-12;
};

struct AdamOptions {
  int epochs = 1000;
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Global-norm clipping bound; infinity disables clipping.
  double clip_norm = 1.0;
  PlateauSchedule schedule;
};

struct LbfgsOptions {
  int max_iterations = 500;
  int memory = 10;
  /// Stop once ||grad|| <= gradient_tolerance.
  double gradient_tolerance = 0.0;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 40;
};

struct IterationRecord {
  int iteration = 0;
  double loss = 0.0;
  double learning_rate = 0.0;  // Adam lr, or accepted step length for L-BFGS
};

struct OptimizeResult {
  Vec best;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<IterationRecord> history;
  int iterations = 0;
  /// Set when L-BFGS stopped because its line search failed.
  std::string warning;
};

/// Adam on `objective` starting from `start`. Returns the best iterate seen,
/// including the start. Throws NumericalError on a non-finite loss.
OptimizeResult run_adam(const Objective& objective, const Vec& start,
                        const AdamOptions& options);

/// Limited-memory BFGS with a strong-Wolfe line search. Returns the best
/// iterate seen; a line-search failure ends the run with a warning.
OptimizeResult run_lbfgs(const Objective& objective, const Vec& start,
                         const LbfgsOptions& options);

}  // namespace xtfc

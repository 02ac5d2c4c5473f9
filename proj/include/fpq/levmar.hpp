/*
 * Copyright 2026 The fpq Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace fpq {

enum class LossKind { squared, huber };

/// Objective as a function of residuals:
///   squared: sum r^2
///   huber:   sum (r^2 if |r| <= h else 2h|r| - h^2)
double robust_objective(std::span<const double> residuals, LossKind kind, double huber_h);

/// Residual callback: fills r (size m) for parameters x (size n). Returning
/// false, or leaving a non-finite entry, marks x as infeasible.
using ResidualFn = std::function<bool(std::span<const double> x, std::span<double> r)>;
/// Jacobian callback: fills the row-major m x n matrix dr/dx.
using JacobianFn = std::function<bool(std::span<const double> x, std::span<double> jac)>;

struct LevMarOptions {
  std::size_t max_iterations = 500;
  /// Stop once an accepted step lowers the objective by less than this fraction.
  double rel_tolerance = 1e-10;
  double initial_lambda = 1e-3;
  LossKind loss = LossKind::squared;
  double huber_h = 1e-3;
  /// Central-difference step, relative to max(|x_i|, 1), used without a JacobianFn.
  double fd_step = 1e-6;
  /// Optional box; steps are projected onto it.
  std::vector<double> lower;
  std::vector<double> upper;
};

struct LevMarResult {
  std::vector<double> x;
  std::vector<double> residuals;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Objective after the start and after every accepted step.
  std::vector<double> history;
};

/// Levenberg-Marquardt with Marquardt diagonal scaling and adaptive damping.
/// Huber losses are handled by iteratively reweighting the normal equations;
/// a step is accepted only if it lowers the true objective, so the history
/// is non-increasing. Returns std::nullopt if the start point is infeasible.
std::optional<LevMarResult> levenberg_marquardt(std::size_t num_residuals,
                                                std::vector<double> x0, const ResidualFn& residuals,
                                                const JacobianFn& jacobian,
                                                const LevMarOptions& opts);

}  // namespace fpq

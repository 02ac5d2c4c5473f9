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

#include "fpq/levmar.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace fpq {

double robust_objective(std::span<const double> residuals, LossKind kind, double huber_h) {
  double sum = 0.0;
  for (double r : residuals) {
    const double a = std::fabs(r);
    if (kind == LossKind::squared || a <= huber_h) {
      sum += r * r;
    } else {
      sum += 2.0 * huber_h * a - huber_h * huber_h;
    }
  }
  return sum;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

class Solver {
 public:
  Solver(std::size_t m, std::size_t n, const ResidualFn& residuals, const JacobianFn& jacobian,
         const LevMarOptions& opts)
      : m_(m), n_(n), residuals_(residuals), jacobian_(jacobian), opts_(opts) {}

  bool eval(std::span<const double> x, std::vector<double>& r) const {
    r.assign(m_, 0.0);
    return residuals_(x, r) && all_finite(r);
  }

  bool jacobian(const std::vector<double>& x, RowMatrix& J) const {
    J.resize(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(n_));
    if (jacobian_) {
      return jacobian_(x, std::span<double>(J.data(), m_ * n_)) &&
             all_finite(std::span<const double>(J.data(), m_ * n_));
    }
    std::vector<double> xp = x;
    std::vector<double> rp;
    std::vector<double> rm;
    for (std::size_t j = 0; j < n_; ++j) {
      const double h = opts_.fd_step * std::max(std::fabs(x[j]), 1.0);
      xp[j] = x[j] + h;
      if (!eval(xp, rp)) return false;
      xp[j] = x[j] - h;
      if (!eval(xp, rm)) return false;
      xp[j] = x[j];
      for (std::size_t i = 0; i < m_; ++i) {
        J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (rp[i] - rm[i]) / (2.0 * h);
      }
    }
    return true;
  }

  void project(std::vector<double>& x) const {
    for (std::size_t j = 0; j < n_; ++j) {
      if (j < opts_.lower.size()) x[j] = std::max(x[j], opts_.lower[j]);
      if (j < opts_.upper.size()) x[j] = std::min(x[j], opts_.upper[j]);
    }
  }

  Eigen::VectorXd weights(const std::vector<double>& r) const {
    Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m_));
    if (opts_.loss == LossKind::huber) {
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = std::fabs(r[i]);
        if (a > opts_.huber_h) w[static_cast<Eigen::Index>(i)] = opts_.huber_h / a;
      }
    }
    return w;
  }

  double objective(const std::vector<double>& r) const {
    return robust_objective(r, opts_.loss, opts_.huber_h);
  }

 private:
  std::size_t m_;
  std::size_t n_;
  const ResidualFn& residuals_;
  const JacobianFn& jacobian_;
  const LevMarOptions& opts_;
};

}  // namespace

std::optional<LevMarResult> levenberg_marquardt(std::size_t num_residuals, std::vector<double> x0,
                                                const ResidualFn& residuals,
                                                const JacobianFn& jacobian,
                                                const LevMarOptions& opts) {
  const std::size_t n = x0.size();
  Solver solver(num_residuals, n, residuals, jacobian, opts);

  LevMarResult out;
  out.x = std::move(x0);
  solver.project(out.x);
  if (!solver.eval(out.x, out.residuals)) return std::nullopt;
  out.objective = solver.objective(out.residuals);
  out.history.push_back(out.objective);

  RowMatrix J;
  if (!solver.jacobian(out.x, J)) return std::nullopt;

  double lambda = opts.initial_lambda;
  std::vector<double> trial_x(n);
  std::vector<double> trial_r;
  const auto dim = static_cast<Eigen::Index>(n);

  while (out.iterations < opts.max_iterations) {
    if (out.objective == 0.0) {
      out.converged = true;
      break;
    }
    const Eigen::Map<const Eigen::VectorXd> r(out.residuals.data(),
                                              static_cast<Eigen::Index>(num_residuals));
    const Eigen::VectorXd w = solver.weights(out.residuals);
    const RowMatrix WJ = w.asDiagonal() * J;
    const Eigen::MatrixXd A = J.transpose() * WJ;
    const Eigen::VectorXd g = WJ.transpose() * r;
    Eigen::VectorXd scale = A.diagonal().cwiseMax(1e-12 * std::max(1.0, A.diagonal().maxCoeff()));

    bool accepted = false;
    while (!accepted && out.iterations < opts.max_iterations) {
      ++out.iterations;
      Eigen::MatrixXd damped = A;
      damped.diagonal() += lambda * scale;
      const Eigen::VectorXd step = damped.ldlt().solve(-g);
      for (Eigen::Index j = 0; j < dim; ++j) trial_x[j] = out.x[j] + step[j];
      solver.project(trial_x);

      const bool ok = step.allFinite() && solver.eval(trial_x, trial_r);
      const double trial_f = ok ? solver.objective(trial_r) : std::numeric_limits<double>::infinity();
      if (ok && trial_f < out.objective) {
        const double rel = (out.objective - trial_f) / out.objective;
        out.x = trial_x;
        out.residuals = trial_r;
        out.objective = trial_f;
        out.history.push_back(trial_f);
        lambda = std::max(lambda / 3.0, 1e-15);
        accepted = true;
        if (rel < opts.rel_tolerance) {
          out.converged = true;
          return out;
        }
        if (!solver.jacobian(out.x, J)) return out;
      } else {
        lambda *= 4.0;
        if (lambda > 1e16) {
          // No damped step lowers the objective: numerically stationary.
          out.converged = true;
          return out;
        }
      }
    }
  }
  return out;
}

}  // namespace fpq

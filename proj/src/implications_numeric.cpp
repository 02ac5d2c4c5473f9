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

// Direct minimizers used to cross-check the closed forms. They share no
// algebra with implications.cpp beyond the loss definitions themselves.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "fpq/errors.hpp"
#include "fpq/implications.hpp"

namespace fpq {

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double tol) {
  if (!(hi > lo)) throw InvalidInput("golden-section search needs lo < hi");
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 400 && (b - a) > tol * (1.0 + std::fabs(a) + std::fabs(b)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

namespace {

// rho with the layout already optimized for a continuous P.
double layout_term(double N, double D, double P, double log2B, const LawConstants& c) {
  const double s = c.delta + c.nu;
  // gamma (E+.5)^delta (M+.5)^nu at E+.5 = delta P/s, M+.5 = nu P/s
  const double denom =
      c.gamma * std::pow(c.delta * P / s, c.delta) * std::pow(c.nu * P / s, c.nu);
  return std::pow(D, c.beta) / std::pow(N, c.alpha) * log2B / denom;
}

double oracle_loss(double N, double D, double P, double log2B, const LawConstants& c) {
  if (!(P > 0.0) || !(N > 0.0) || !(D > 0.0)) return std::numeric_limits<double>::infinity();
  return c.n / std::pow(N, c.alpha) + c.d / std::pow(D, c.beta) + c.epsilon +
         layout_term(N, D, P, log2B, c);
}

// Brackets the minimum of f over a log grid, then refines with golden section.
double grid_then_golden(const std::function<double(double)>& f, double lo, double hi, int points) {
  const double step = (hi - lo) / (points - 1);
  int best = 0;
  double best_f = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double v = f(lo + step * i);
    if (v < best_f) {
      best_f = v;
      best = i;
    }
  }
  const double a = lo + step * std::max(best - 1, 0);
  const double b = lo + step * std::min(best + 1, points - 1);
  return golden_section_minimize(f, a, b);
}

}  // namespace

double numeric_critical_data_size(double N, double E, double M, double log2B,
                                  const LawConstants& c) {
  if (!(log2B > 0.0)) throw InvalidInput("numeric critical data size needs log2B > 0");
  const auto f = [&](double logD) {
    return capybara_loss(N, std::exp(logD), E, M, log2B, c);
  };
  return std::exp(grid_then_golden(f, std::log(1e3), std::log(1e30), 400));
}

double numeric_p_opt_fixed_d(double D, const ComputeBudget& budget, double log2B,
                             const LawConstants& c) {
  budget.validate();
  const auto f = [&](double logP) {
    const double P = std::exp(logP);
    const double N = budget.C / (budget.k * (P + budget.b) * D);
    return oracle_loss(N, D, P, log2B, c);
  };
  return std::exp(grid_then_golden(f, std::log(0.25), std::log(512.0), 400));
}

double numeric_p_opt_fixed_n(double N, const ComputeBudget& budget, double log2B,
                             const LawConstants& c) {
  budget.validate();
  const auto f = [&](double logP) {
    const double P = std::exp(logP);
    const double D = budget.C / (budget.k * (P + budget.b) * N);
    return oracle_loss(N, D, P, log2B, c);
  };
  return std::exp(grid_then_golden(f, std::log(0.25), std::log(512.0), 400));
}

JointOptimum numeric_p_opt_joint(const ComputeBudget& budget, double log2B, const LawConstants& c) {
  budget.validate();
  const double total = std::log(budget.C / budget.k);
  const auto precision = [&](double logN, double logD) {
    return std::exp(total - logN - logD) - budget.b;
  };
  const auto loss = [&](double logN, double logD) {
    return oracle_loss(std::exp(logN), std::exp(logD), precision(logN, logD), log2B, c);
  };

  // Coarse grid; P outside [1/4, 1024] bits is not a meaningful float format.
  constexpr int kGrid = 400;
  const double lo = std::log(1e3);
  const double hi = total;
  const double step = (hi - lo) / (kGrid - 1);
  std::vector<double> values(static_cast<std::size_t>(kGrid) * kGrid,
                             std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const double logN = lo + step * i;
      const double logD = lo + step * j;
      const double P = precision(logN, logD);
      if (P < 0.25 || P > 1024.0) continue;
      values[static_cast<std::size_t>(i) * kGrid + j] = loss(logN, logD);
    }
  }
  // Serial scan: the first minimal index wins regardless of thread count.
  std::size_t best = 0;
  for (std::size_t idx = 1; idx < values.size(); ++idx) {
    if (values[idx] < values[best]) best = idx;
  }
  if (!std::isfinite(values[best])) throw NumericError("joint oracle found no feasible grid point");
  const double n0 = lo + step * static_cast<double>(best / kGrid);
  const double d0 = lo + step * static_cast<double>(best % kGrid);

  // Nested refinement: for each log N, the best log D; then the best log N.
  const auto inner = [&](double logN) {
    return golden_section_minimize([&](double logD) { return loss(logN, logD); }, d0 - 6 * step,
                                   d0 + 6 * step, 1e-13);
  };
  const double logN = golden_section_minimize([&](double x) { return loss(x, inner(x)); },
                                              n0 - 3 * step, n0 + 3 * step, 1e-13);
  const double logD = inner(logN);

  JointOptimum out;
  out.N = std::exp(logN);
  out.D = std::exp(logD);
  out.P = precision(logN, logD);
  return out;
}

}  // namespace fpq

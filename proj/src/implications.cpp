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

#include "fpq/implications.hpp"

#include <cmath>
#include <string>

#include "fpq/errors.hpp"

namespace fpq {

DerivedConstants derived_constants(const LawConstants& c) {
  const double s = c.delta + c.nu;
  DerivedConstants k;
  k.gamma_rho = c.gamma * std::pow(c.delta, c.delta) * std::pow(c.nu, c.nu) / std::pow(s, s);
  k.gamma_n = k.gamma_rho * c.n;
  k.gamma_D = (s - c.alpha) / (c.n * c.alpha * k.gamma_rho);
  k.gamma_N = (c.beta + s) / (c.d * c.beta * k.gamma_rho);
  k.lambda = (c.d * c.beta / (c.n * c.alpha)) * (s - c.alpha) / (s + c.beta);
  return k;
}

void ComputeBudget::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw InvalidInput("compute budget C must be positive");
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidInput("compute constant k must be positive");
  if (!(b >= 0.0) || !std::isfinite(b)) throw InvalidInput("overhead b must be non-negative");
}

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput(std::string(what) + " must be positive");
}

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidInput(std::string(what) + " must be non-negative");
  }
}

}  // namespace

double optimal_mantissa(double P, const LawConstants& c) {
  if (!(P >= 2.0)) throw InvalidInput("precision must be at least 2 bits");
  return c.nu * P / (c.delta + c.nu) - 0.5;
}

FloatLayout optimal_layout_int(int P, const LawConstants& c) {
  if (P < 2) throw InvalidInput("precision must be at least 2 bits");
  FloatLayout best{};
  double best_rho = 0.0;
  // rho is proportional to 1 / ((E+.5)^delta (M+.5)^nu); compare in logs.
  for (int E = 1; E <= P - 1; ++E) {
    const int M = P - 1 - E;
    const double r = -(c.delta * std::log(E + 0.5) + c.nu * std::log(M + 0.5));
    if (E == 1 || r <= best_rho) {
      best = {E, M};
      best_rho = r;
    }
  }
  return best;
}

double loss_optimal_layout(double N, double D, double P, double log2B, const LawConstants& c) {
  require_positive(N, "N");
  require_positive(D, "D");
  require_positive(P, "P");
  require_nonnegative(log2B, "log2B");
  const DerivedConstants k = derived_constants(c);
  return chinchilla_loss(N, D, c) +
         knowledge_intensity(N, D, c) * log2B / (k.gamma_rho * std::pow(P, c.delta + c.nu));
}

double n_eff(double N, double D, double P, double log2B, const LawConstants& c) {
  require_positive(N, "N");
  require_positive(D, "D");
  require_positive(P, "P");
  require_nonnegative(log2B, "log2B");
  const DerivedConstants k = derived_constants(c);
  const double x = std::pow(D, c.beta) * log2B / (k.gamma_n * std::pow(P, c.delta + c.nu));
  return N * std::pow(1.0 / (1.0 + x), 1.0 / c.alpha);
}

double simplified_n_eff(double N, double D, double P, double log2B, const LawConstants& c) {
  require_positive(N, "N");
  require_positive(D, "D");
  require_positive(P, "P");
  require_positive(log2B, "log2B");
  const DerivedConstants k = derived_constants(c);
  return std::pow(k.gamma_n / (std::pow(D, c.beta) * log2B), 1.0 / c.alpha) * N *
         std::pow(P, (c.delta + c.nu) / c.alpha);
}

std::optional<double> critical_data_size(double N, double E, double M, double log2B,
                                         const LawConstants& c) {
  require_positive(N, "N");
  require_nonnegative(E, "E");
  require_nonnegative(M, "M");
  require_nonnegative(log2B, "log2B");
  if (log2B == 0.0) return std::nullopt;
  const double num = c.d * c.gamma * std::pow(N, c.alpha) * std::pow(E + 0.5, c.delta) *
                     std::pow(M + 0.5, c.nu);
  return std::pow(num / log2B, 1.0 / (2.0 * c.beta));
}

double p_opt_fixed_d(double D, double log2B, const LawConstants& c) {
  require_positive(D, "D");
  require_positive(log2B, "log2B");
  const DerivedConstants k = derived_constants(c);
  if (!(k.gamma_D > 0.0)) throw ConfigError("fixed-D optimum needs delta + nu > alpha");
  return std::pow(k.gamma_D * std::pow(D, c.beta) * log2B, 1.0 / (c.delta + c.nu));
}

double p_opt_fixed_n(double N, const ComputeBudget& budget, double log2B, const LawConstants& c) {
  require_positive(N, "N");
  require_positive(log2B, "log2B");
  budget.validate();
  const DerivedConstants k = derived_constants(c);
  const double rhs = k.gamma_N * std::pow(budget.C / budget.k, 2.0 * c.beta) *
                     std::pow(N, -(c.alpha + 2.0 * c.beta)) * log2B;
  return std::pow(rhs, 1.0 / (c.delta + c.nu + 2.0 * c.beta));
}

double exchange_rate_constant(double N, double P, const LawConstants& c) {
  require_positive(N, "N");
  require_positive(P, "P");
  return std::pow(P, c.delta + c.nu + 2.0 * c.beta) * std::pow(N, c.alpha + 2.0 * c.beta);
}

JointOptimum p_opt_joint(const ComputeBudget& budget, double log2B, const LawConstants& c) {
  budget.validate();
  require_positive(log2B, "log2B");
  const DerivedConstants k = derived_constants(c);
  if (!(k.lambda > 0.0) || !(k.gamma_D > 0.0)) {
    throw ConfigError("joint optimum needs delta + nu > alpha");
  }
  const double s = c.delta + c.nu;
  const double ab = (c.alpha + c.beta) / c.beta;
  const double rhs =
      k.lambda * std::pow(k.gamma_D * log2B, ab) * std::pow(budget.C / budget.k, c.alpha);
  JointOptimum out;
  out.P = std::pow(rhs, 1.0 / (s * ab + c.alpha));
  // D from the fixed-D optimum condition, N from the budget.
  out.D = std::pow(std::pow(out.P, s) / (k.gamma_D * log2B), 1.0 / c.beta);
  out.N = budget.C / (budget.k * out.P * out.D);
  return out;
}

}  // namespace fpq

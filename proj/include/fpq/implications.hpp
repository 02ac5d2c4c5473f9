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

#include <functional>
#include <optional>

#include "fpq/lawmodels.hpp"

namespace fpq {

/// Combinations of the law constants that appear in the closed-form optima.
/// Always computed from a LawConstants, never stored on their own.
struct DerivedConstants {
  double gamma_rho = 0.0;  // gamma delta^delta nu^nu / (delta+nu)^(delta+nu)
  double gamma_n = 0.0;    // gamma_rho * n
  double gamma_D = 0.0;    // (delta+nu-alpha) / (n alpha gamma_rho)
  double gamma_N = 0.0;    // (beta+delta+nu) / (d beta gamma_rho)
  double lambda = 0.0;     // (d beta / (n alpha)) (delta+nu-alpha) / (delta+nu+beta)
};

DerivedConstants derived_constants(const LawConstants& c);

/// Training compute C = k (P + b) N D.
struct ComputeBudget {
  double C = 0.0;
  double k = 6.0 / 16.0;
  double b = 0.0;

  /// Throws InvalidInput unless C, k > 0 and b >= 0.
  void validate() const;
};

struct FloatLayout {
  int E = 0;
  int M = 0;
};

/// Continuous mantissa width minimizing rho at P total bits (sign included).
double optimal_mantissa(double P, const LawConstants& c);
/// Best integer split with E >= 1, M >= 0 and E + M = P - 1; ties go to the
/// larger exponent. Throws InvalidInput for P < 2.
FloatLayout optimal_layout_int(int P, const LawConstants& c);

/// Unified law evaluated at the continuous optimal layout for P bits.
double loss_optimal_layout(double N, double D, double P, double log2B, const LawConstants& c);

double n_eff(double N, double D, double P, double log2B, const LawConstants& c);
/// Power-law approximation valid when D^beta log2B >> gamma_n P^(delta+nu).
double simplified_n_eff(double N, double D, double P, double log2B, const LawConstants& c);

/// Token count minimizing the unified loss at fixed N and format.
/// std::nullopt when log2B == 0: the loss then decreases in D forever.
std::optional<double> critical_data_size(double N, double E, double M, double log2B,
                                         const LawConstants& c);

/// Cost-optimal precision at fixed D (b = 0).
double p_opt_fixed_d(double D, double log2B, const LawConstants& c);
/// Cost-optimal precision at fixed N under a compute budget (b = 0).
double p_opt_fixed_n(double N, const ComputeBudget& budget, double log2B, const LawConstants& c);
/// P^(delta+nu+2 beta) N^(alpha+2 beta); constant along the fixed-N optimum at fixed C.
double exchange_rate_constant(double N, double P, const LawConstants& c);

struct JointOptimum {
  double P = 0.0;
  double N = 0.0;
  double D = 0.0;
};

/// Cost-optimal precision when N, D and P are all free under C = k P N D.
/// Throws ConfigError when delta + nu <= alpha (no interior optimum).
JointOptimum p_opt_joint(const ComputeBudget& budget, double log2B, const LawConstants& c);

// ---------------------------------------------------------------------------
// Numeric oracles. These minimize the loss directly and support b > 0.

/// Golden-section search for a minimum of f on [lo, hi].
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double tol = 1e-12);

/// argmin over D of the unified loss, searched in log D.
double numeric_critical_data_size(double N, double E, double M, double log2B,
                                  const LawConstants& c);
/// argmin over P of the fixed-D loss with N = C / (k (P + b) D).
double numeric_p_opt_fixed_d(double D, const ComputeBudget& budget, double log2B,
                             const LawConstants& c);
/// argmin over P of the fixed-N loss with D = C / (k (P + b) N).
double numeric_p_opt_fixed_n(double N, const ComputeBudget& budget, double log2B,
                             const LawConstants& c);
/// Grid over (log N, log D) with P = C / (k N D) - b, then nested
/// golden-section refinement of the optimal-layout loss.
JointOptimum numeric_p_opt_joint(const ComputeBudget& budget, double log2B, const LawConstants& c);

}  // namespace fpq

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

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "fpq/blockquant.hpp"

// Scaling-law evaluators. N is a raw parameter count, D a raw token count,
// E and M are bit counts (the law admits 0 through its +0.5 offsets) and
// block size always enters as log2 B.

namespace fpq {

/// The eight constants of the unified law
///   L = n/N^a + d/D^b + eps + (D^b / N^a) * log2B / (gamma (E+.5)^delta (M+.5)^nu).
struct LawConstants {
  double n = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double nu = 0.0;

  static constexpr std::array<std::string_view, 8> kNames = {
      "n", "alpha", "d", "beta", "epsilon", "gamma", "delta", "nu"};

  /// Published fit over the 358-run low-precision campaign.
  static LawConstants capybara_paper();

  std::array<double, 8> as_array() const { return {n, alpha, d, beta, epsilon, gamma, delta, nu}; }
  static LawConstants from_array(const std::array<double, 8>& v);

  /// Throws InvalidInput unless every constant is finite and strictly positive.
  void validate() const;

  friend bool operator==(const LawConstants&, const LawConstants&) = default;
};

// Flat "key = value" text, one constant per line, '#' comments. Unicode
// spellings (α, β, ε, γ, δ, ν) are accepted as aliases on input.
LawConstants parse_constants(std::istream& in);
void write_constants(std::ostream& out, const LawConstants& c);
LawConstants load_constants_file(const std::filesystem::path& path);

/// Built-in or on-disk preset. When FPQ_PRESET_DIR is set, <dir>/<name>.txt
/// takes precedence over the built-in table.
LawConstants load_preset(std::string_view name);

/// One observed (or synthetic) training run.
struct RunRecord {
  double N = 0.0;
  double D = 0.0;
  double E = 0.0;
  double M = 0.0;
  double log2B = 0.0;
  ScalingStrategy::Kind strategy = ScalingStrategy::Kind::block;
  double loss = 0.0;

  /// Throws InvalidInput for N, D, loss <= 0 or negative E, M, log2B.
  void validate() const;
};

// Classical forms.
double chinchilla_loss(double N, double D, const LawConstants& c);
double openai_loss(double N, double D, const LawConstants& c);
double kumar_loss(double N, double D, double E, double M, const LawConstants& c, double gamma_k);

// Unified law.
double knowledge_intensity(double N, double D, const LawConstants& c);
double rho(double N, double D, double E, double M, double log2B, const LawConstants& c);
double capybara_loss(double N, double D, double E, double M, double log2B, const LawConstants& c);

/// Partial derivatives with respect to (n, alpha, d, beta, epsilon).
std::array<double, 5> chinchilla_gradient(double N, double D, const LawConstants& c);
/// Partial derivatives with respect to all eight constants, in kNames order.
std::array<double, 8> capybara_gradient(double N, double D, double E, double M, double log2B,
                                        const LawConstants& c);

// Single-variable marginal laws.
struct ExponentMarginal {
  double gamma = 0.0;
  double delta = 0.0;
  double iota = 0.0;
};
struct MantissaMarginal {
  double gamma = 0.0;
  double nu = 0.0;
  double iota = 0.0;
};
struct BlockMarginal {
  double kappa = 0.0;
  double psi = 0.0;
};

double exponent_marginal(double E, const ExponentMarginal& p);
double mantissa_marginal(double M, const MantissaMarginal& p);
double blocksize_marginal(double log2B, const BlockMarginal& p);

/// Exponents of the knowledge-intensity factor and the BF16 multiplier used
/// while those are still free; the tied laws fix phi = beta, eta = alpha, iota = 1.
struct Reparam {
  double phi = 0.0;
  double eta = 0.0;
  double iota = 1.0;
};

// Joint laws with N and D.
double exponent_joint(double N, double D, double E, const LawConstants& c);
double mantissa_joint(double N, double D, double M, const LawConstants& c);
double em_joint(double N, double D, double E, double M, const LawConstants& c);
double blocksize_joint(double N, double D, double log2B, const LawConstants& c, double kappa);

/// D^phi / N^eta / (gamma (E+.5)^delta) + iota * chinchilla.
double exponent_joint_general(double N, double D, double E, const LawConstants& c, const Reparam& r);
/// D^phi / N^eta / (gamma (M+.5)^nu) + iota * chinchilla.
double mantissa_joint_general(double N, double D, double M, const LawConstants& c, const Reparam& r);
/// D^phi / N^eta * log2B / kappa + iota * chinchilla.
double blocksize_joint_general(double N, double D, double log2B, const LawConstants& c,
                               double kappa, const Reparam& r);

/// Equivalent log2 B of channel-wise scaling, a constant across N and D.
constexpr double channel_equiv_log2B() { return 13.1567; }

/// log2 B_tensor = N^omega / (xi D^eta_t).
struct TensorEquivParams {
  double omega = 0.0;
  double xi = 0.0;
  double eta_t = 0.0;
};
double tensor_equiv_log2B(double N, double D, const TensorEquivParams& p);

}  // namespace fpq

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

#include "fpq/lawmodels.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>

#include "fpq/errors.hpp"

namespace fpq {

LawConstants LawConstants::capybara_paper() {
  LawConstants c;
  c.n = 69.2343;
  c.alpha = 0.2368;
  c.d = 68973.0621;
  c.beta = 0.5162;
  c.epsilon = 1.9061;
  c.gamma = 11334.5197;
  c.delta = 3.1926;
  c.nu = 2.9543;
  return c;
}

LawConstants LawConstants::from_array(const std::array<double, 8>& v) {
  LawConstants c;
  c.n = v[0];
  c.alpha = v[1];
  c.d = v[2];
  c.beta = v[3];
  c.epsilon = v[4];
  c.gamma = v[5];
  c.delta = v[6];
  c.nu = v[7];
  return c;
}

void LawConstants::validate() const {
  const auto values = as_array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] <= 0.0) {
      throw InvalidInput("law constant '" + std::string(kNames[i]) +
                         "' must be finite and positive");
    }
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<std::size_t> constant_index(const std::string& key) {
  static const std::map<std::string, std::size_t> aliases = {
      {"n", 0},       {"alpha", 1}, {"\xCE\xB1", 1}, {"d", 2},       {"beta", 3},
      {"\xCE\xB2", 3}, {"epsilon", 4}, {"eps", 4},      {"\xCE\xB5", 4}, {"gamma", 5},
      {"\xCE\xB3", 5}, {"delta", 6},   {"\xCE\xB4", 6}, {"nu", 7},       {"\xCE\xBD", 7}};
  const auto it = aliases.find(key);
  if (it == aliases.end()) return std::nullopt;
  return it->second;
}

}  // namespace

LawConstants parse_constants(std::istream& in) {
  std::array<double, 8> values{};
  std::array<bool, 8> seen{};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    auto sep = line.find('=');
    if (sep == std::string::npos) sep = line.find(':');
    if (sep == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, sep));
    const std::string text = trim(line.substr(sep + 1));

    const auto idx = constant_index(key);
    if (!idx) throw ParseError("unknown constant '" + key + "'", line_no, 1);
    if (seen[*idx]) throw ParseError("duplicate constant '" + key + "'", line_no, 1);

    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
      throw ParseError("invalid value '" + text + "' for '" + key + "'", line_no, sep + 2);
    }
    values[*idx] = v;
    seen[*idx] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw ParseError("missing constant '" + std::string(LawConstants::kNames[i]) + "'");
  }
  LawConstants c = LawConstants::from_array(values);
  try {
    c.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(e.what());
  }
  return c;
}

void write_constants(std::ostream& out, const LawConstants& c) {
  const auto values = c.as_array();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << LawConstants::kNames[i] << " = " << values[i] << '\n';
  }
}

LawConstants load_constants_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open constants file " + path.string());
  return parse_constants(in);
}

LawConstants load_preset(std::string_view name) {
  if (const char* dir = std::getenv("FPQ_PRESET_DIR"); dir != nullptr && *dir != '\0') {
    const auto path = std::filesystem::path(dir) / (std::string(name) + ".txt");
    if (std::filesystem::exists(path)) return load_constants_file(path);
  }
  if (name == "capybara-paper") return LawConstants::capybara_paper();
  throw InvalidInput("unknown constants preset '" + std::string(name) + "'");
}

void RunRecord::validate() const {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  const auto non_negative = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!positive(N)) throw InvalidInput("N must be positive");
  if (!positive(D)) throw InvalidInput("D must be positive");
  if (!non_negative(E)) throw InvalidInput("E must be non-negative");
  if (!non_negative(M)) throw InvalidInput("M must be non-negative");
  if (!non_negative(log2B)) throw InvalidInput("log2B must be non-negative");
  if (!positive(loss)) throw InvalidInput("loss must be positive");
}

double chinchilla_loss(double N, double D, const LawConstants& c) {
  return c.n / std::pow(N, c.alpha) + c.d / std::pow(D, c.beta) + c.epsilon;
}

double openai_loss(double N, double D, const LawConstants& c) {
  return std::pow(std::pow(c.n / N, c.alpha / c.beta) + c.d / D, c.beta) + c.epsilon;
}

double kumar_loss(double N, double D, double E, double M, const LawConstants& c, double gamma_k) {
  const double n_eff = N * (1.0 - std::exp(-(1.0 + E + M) / gamma_k));
  return c.n / std::pow(n_eff, c.alpha) + c.d / std::pow(D, c.beta) + c.epsilon;
}

double knowledge_intensity(double N, double D, const LawConstants& c) {
  return std::pow(D, c.beta) / std::pow(N, c.alpha);
}

double rho(double N, double D, double E, double M, double log2B, const LawConstants& c) {
  return knowledge_intensity(N, D, c) * log2B /
         (c.gamma * std::pow(E + 0.5, c.delta) * std::pow(M + 0.5, c.nu));
}

double capybara_loss(double N, double D, double E, double M, double log2B, const LawConstants& c) {
  return chinchilla_loss(N, D, c) + rho(N, D, E, M, log2B, c);
}

std::array<double, 5> chinchilla_gradient(double N, double D, const LawConstants& c) {
  const double n_term = std::pow(N, -c.alpha);
  const double d_term = std::pow(D, -c.beta);
  return {n_term, -std::log(N) * c.n * n_term, d_term, -std::log(D) * c.d * d_term, 1.0};
}

std::array<double, 8> capybara_gradient(double N, double D, double E, double M, double log2B,
                                        const LawConstants& c) {
  const auto base = chinchilla_gradient(N, D, c);
  const double r = rho(N, D, E, M, log2B, c);
  return {base[0],
          base[1] - std::log(N) * r,
          base[2],
          base[3] + std::log(D) * r,
          base[4],
          -r / c.gamma,
          -std::log(E + 0.5) * r,
          -std::log(M + 0.5) * r};
}

double exponent_marginal(double E, const ExponentMarginal& p) {
  return p.gamma / std::pow(E + 0.5, p.delta) + p.iota;
}

double mantissa_marginal(double M, const MantissaMarginal& p) {
  return p.gamma / std::pow(M + 0.5, p.nu) + p.iota;
}

double blocksize_marginal(double log2B, const BlockMarginal& p) {
  return p.kappa * log2B + p.psi;
}

double exponent_joint(double N, double D, double E, const LawConstants& c) {
  return exponent_joint_general(N, D, E, c, Reparam{c.beta, c.alpha, 1.0});
}

double mantissa_joint(double N, double D, double M, const LawConstants& c) {
  return mantissa_joint_general(N, D, M, c, Reparam{c.beta, c.alpha, 1.0});
}

double em_joint(double N, double D, double E, double M, const LawConstants& c) {
  return knowledge_intensity(N, D, c) /
             (c.gamma * std::pow(E + 0.5, c.delta) * std::pow(M + 0.5, c.nu)) +
         chinchilla_loss(N, D, c);
}

double blocksize_joint(double N, double D, double log2B, const LawConstants& c, double kappa) {
  return blocksize_joint_general(N, D, log2B, c, kappa, Reparam{c.beta, c.alpha, 1.0});
}

double exponent_joint_general(double N, double D, double E, const LawConstants& c,
                              const Reparam& r) {
  return std::pow(D, r.phi) / std::pow(N, r.eta) / (c.gamma * std::pow(E + 0.5, c.delta)) +
         r.iota * chinchilla_loss(N, D, c);
}

double mantissa_joint_general(double N, double D, double M, const LawConstants& c,
                              const Reparam& r) {
  return std::pow(D, r.phi) / std::pow(N, r.eta) / (c.gamma * std::pow(M + 0.5, c.nu)) +
         r.iota * chinchilla_loss(N, D, c);
}

double blocksize_joint_general(double N, double D, double log2B, const LawConstants& c,
                               double kappa, const Reparam& r) {
  return std::pow(D, r.phi) / std::pow(N, r.eta) * log2B / kappa +
         r.iota * chinchilla_loss(N, D, c);
}

double tensor_equiv_log2B(double N, double D, const TensorEquivParams& p) {
  return std::pow(N, p.omega) / (p.xi * std::pow(D, p.eta_t));
}

}  // namespace fpq

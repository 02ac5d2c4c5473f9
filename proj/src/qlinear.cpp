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

#include "fpq/qlinear.hpp"

#include <cctype>
#include <cmath>

#include "fpq/errors.hpp"
#include "fpq/kernels.hpp"

namespace fpq {

TargetSet TargetSet::parse(std::string_view text) {
  std::string lowered;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (lowered.empty() || lowered == "none") return none();
  if (lowered == "all") return all();

  TargetSet out;
  std::size_t start = 0;
  while (start <= lowered.size()) {
    const auto comma = lowered.find(',', start);
    const auto token = lowered.substr(start, comma == std::string::npos ? std::string::npos
                                                                         : comma - start);
    if (token.size() != 2 || token[0] != 'p' || token[1] < '1' || token[1] > '6') {
      throw InvalidInput("invalid quantization target '" + token + "', expected P1..P6");
    }
    out.insert(static_cast<Target>(token[1] - '1'));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string TargetSet::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (!bits_.test(i)) continue;
    if (!out.empty()) out += ',';
    out += 'P';
    out += static_cast<char>('1' + i);
  }
  return out.empty() ? "none" : out;
}

double round_to_bf16(double x) noexcept {
  if (x == 0.0 || !std::isfinite(x)) return x;
  int k = 0;
  const double f = std::frexp(x, &k);  // |f| in [0.5, 1)
  return std::ldexp(std::nearbyint(std::ldexp(f, 8)), k - 8);
}

Tensor2D quantize_operand(const Tensor2D& operand, Target target, const QLinearConfig& cfg) {
  if (!cfg.targets.contains(target)) return operand;
  return quantize_dequantize(operand, cfg.fmt, cfg.strat, cfg.exec).dequantized;
}

namespace {

Tensor2D matmul_nt(const Tensor2D& a, const Tensor2D& b, const QLinearConfig& cfg) {
  Tensor2D c(a.rows(), b.rows());
  kernels::gemm_nt(cfg.exec, a.values(), b.values(), c.values(), a.rows(), b.rows(), a.cols());
  if (cfg.bf16_output) {
    for (double& v : c.values()) v = round_to_bf16(v);
  }
  return c;
}

}  // namespace

Tensor2D qlinear_forward(const Tensor2D& X, const Tensor2D& W, const QLinearConfig& cfg) {
  if (X.cols() != W.cols()) {
    throw ShapeError("qlinear_forward: X has " + std::to_string(X.cols()) +
                     " input channels but W expects " + std::to_string(W.cols()));
  }
  return matmul_nt(quantize_operand(X, Target::P1, cfg), quantize_operand(W, Target::P2, cfg),
                   cfg);
}

LinearGrads qlinear_backward(const Tensor2D& dY, const Tensor2D& X, const Tensor2D& W,
                             const QLinearConfig& cfg) {
  if (X.cols() != W.cols() || dY.rows() != X.rows() || dY.cols() != W.rows()) {
    throw ShapeError("qlinear_backward: dY, X and W shapes are inconsistent");
  }
  const Tensor2D dYt = dY.transposed();
  LinearGrads grads;
  grads.dX = matmul_nt(quantize_operand(dY, Target::P3, cfg),
                       quantize_operand(W.transposed(), Target::P4, cfg), cfg);
  grads.dW = matmul_nt(quantize_operand(dYt, Target::P5, cfg),
                       quantize_operand(X.transposed(), Target::P6, cfg), cfg);
  return grads;
}

}  // namespace fpq

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

#include <bitset>
#include <cstddef>
#include <string>
#include <string_view>

#include "fpq/blockquant.hpp"
#include "fpq/fpformat.hpp"
#include "fpq/tensor.hpp"

namespace fpq {

/// The six GEMM inputs of a linear layer that may be quantized.
///
///   forward      Y  = X   * W^T         P1 = X,   P2 = W
///   input grad   dX = dY1 * W_bwd       P3 = dY1, P4 = W_bwd
///   weight grad  dW = dY2^T * X_bwd     P5 = dY2, P6 = X_bwd
enum class Target { P1 = 0, P2, P3, P4, P5, P6 };

class TargetSet {
 public:
  TargetSet() = default;
  TargetSet(std::initializer_list<Target> targets) {
    for (auto t : targets) insert(t);
  }

  static TargetSet none() { return {}; }
  static TargetSet all() { return {Target::P1, Target::P2, Target::P3, Target::P4, Target::P5, Target::P6}; }
  /// P2, P4 and P6: weights in both passes plus the activation used for the weight gradient.
  static TargetSet defaults() { return {Target::P2, Target::P4, Target::P6}; }

  /// Comma separated list such as "P2,P4,P6"; "none"/"" and "all" are accepted.
  static TargetSet parse(std::string_view text);

  void insert(Target t) { bits_.set(static_cast<std::size_t>(t)); }
  bool contains(Target t) const { return bits_.test(static_cast<std::size_t>(t)); }
  bool empty() const { return bits_.none(); }
  std::string to_string() const;

  friend bool operator==(const TargetSet&, const TargetSet&) = default;

 private:
  std::bitset<6> bits_;
};

struct QLinearConfig {
  FpFormat fmt{4, 3};
  ScalingStrategy strat = ScalingStrategy::block(32);
  TargetSet targets = TargetSet::defaults();
  /// Round GEMM outputs to bfloat16 (8 significant bits), as a BF16 output cast would.
  bool bf16_output = false;
  Exec exec = Exec::parallel;
};

struct LinearGrads {
  Tensor2D dX;
  Tensor2D dW;
};

/// Applies quantize-dequantize to a GEMM operand when `target` is selected.
/// The operand must be laid out with the contraction dimension last; that is
/// the dimension the scaling blocks run along.
Tensor2D quantize_operand(const Tensor2D& operand, Target target, const QLinearConfig& cfg);

/// Y = Q1(X) Q2(W)^T for X (b x d_in) and W (d_out x d_in).
Tensor2D qlinear_forward(const Tensor2D& X, const Tensor2D& W, const QLinearConfig& cfg);

/// dX = Q3(dY) Q4(W) and dW = Q5(dY)^T Q6(X).
///
/// Operands are blocked along the contraction dimension of their GEMM: W and
/// dY1 along d_out, dY2 and X along the batch. P3 and P5 are separate passes
/// over dY.
LinearGrads qlinear_backward(const Tensor2D& dY, const Tensor2D& X, const Tensor2D& W,
                             const QLinearConfig& cfg);

/// Round to the nearest bfloat16 value (ties to even), without range limits.
double round_to_bf16(double x) noexcept;

}  // namespace fpq

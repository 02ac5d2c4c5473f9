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
#include <string>
#include <string_view>
#include <vector>

#include "fpq/fpformat.hpp"
#include "fpq/kernels.hpp"
#include "fpq/tensor.hpp"

namespace fpq {

/// How many elements share one scaling factor.
///
/// Blocks are contiguous runs along the channel (last) dimension. Channel-wise
/// scaling is a block of d_in elements, tensor-wise a block of b * d_in.
class ScalingStrategy {
 public:
  enum class Kind { block, channel, tensor };

  static ScalingStrategy block(std::size_t block_size);
  static ScalingStrategy channel() { return ScalingStrategy(Kind::channel, 0); }
  static ScalingStrategy tensor() { return ScalingStrategy(Kind::tensor, 0); }

  /// Accepts "block" (with block_size), "channel" or "tensor".
  static ScalingStrategy parse(std::string_view kind, std::size_t block_size = 0);

  Kind kind() const noexcept { return kind_; }
  /// Configured B for block-wise scaling, 0 otherwise.
  std::size_t block_size() const noexcept { return block_; }

  /// Elements per scale for a rows x cols tensor. Throws ConfigError when a
  /// block-wise B exceeds or does not divide cols.
  std::size_t group_size(std::size_t rows, std::size_t cols) const;

  std::string name() const;

  friend bool operator==(const ScalingStrategy&, const ScalingStrategy&) = default;

 private:
  ScalingStrategy(Kind kind, std::size_t block) : kind_(kind), block_(block) {}

  Kind kind_;
  std::size_t block_;
};

struct QuantResult {
  Tensor2D dequantized;
  std::vector<double> scales;  // one per block, row-major block order
  double effective_log2_B = 0.0;
};

/// S_i = fp_max / max|block i|, with S_i = 1 for an all-zero block.
std::vector<double> compute_scales(const Tensor2D& t, const FpFormat& fmt,
                                   const ScalingStrategy& strat, Exec exec = Exec::parallel);

/// Simulated quantization: each x in block i becomes Q(x * S_i) / S_i.
QuantResult quantize_dequantize(const Tensor2D& t, const FpFormat& fmt,
                                const ScalingStrategy& strat, Exec exec = Exec::parallel);

/// 10 log10(sum x^2 / sum (x - xhat)^2); +infinity when the error is zero.
/// Throws ShapeError on mismatch and InvalidInput for an all-zero original.
double measure_sqnr(const Tensor2D& original, const Tensor2D& dequantized);

/// log2 of elements per scale: log2 B, log2 d_in or log2(b * d_in).
double effective_log2_B(const ScalingStrategy& strat, std::size_t rows, std::size_t cols);

}  // namespace fpq

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

#include "fpq/blockquant.hpp"

#include <cmath>
#include <limits>

#include "fpq/errors.hpp"

namespace fpq {

ScalingStrategy ScalingStrategy::block(std::size_t block_size) {
  if (block_size == 0) throw ConfigError("block size must be at least 1");
  return ScalingStrategy(Kind::block, block_size);
}

ScalingStrategy ScalingStrategy::parse(std::string_view kind, std::size_t block_size) {
  if (kind == "block") return block(block_size);
  if (kind == "channel") return channel();
  if (kind == "tensor") return tensor();
  throw InvalidInput("unknown scaling strategy '" + std::string(kind) +
                     "', expected block, channel or tensor");
}

std::size_t ScalingStrategy::group_size(std::size_t rows, std::size_t cols) const {
  switch (kind_) {
    case Kind::channel:
      return cols;
    case Kind::tensor:
      return rows * cols;
    case Kind::block:
      break;
  }
  if (block_ > cols) {
    throw ConfigError("block size " + std::to_string(block_) + " exceeds channel count " +
                      std::to_string(cols));
  }
  if (cols % block_ != 0) {
    throw ConfigError("block size " + std::to_string(block_) + " does not divide channel count " +
                      std::to_string(cols));
  }
  return block_;
}

std::string ScalingStrategy::name() const {
  switch (kind_) {
    case Kind::channel:
      return "channel";
    case Kind::tensor:
      return "tensor";
    case Kind::block:
      break;
  }
  return "block(" + std::to_string(block_) + ")";
}

std::vector<double> compute_scales(const Tensor2D& t, const FpFormat& fmt,
                                   const ScalingStrategy& strat, Exec exec) {
  const std::size_t group = strat.group_size(t.rows(), t.cols());
  std::vector<double> scales(t.size() / group);
  kernels::block_scales(exec, t.values(), group, fmt, scales);
  return scales;
}

QuantResult quantize_dequantize(const Tensor2D& t, const FpFormat& fmt,
                                const ScalingStrategy& strat, Exec exec) {
  const std::size_t group = strat.group_size(t.rows(), t.cols());
  QuantResult result;
  result.scales.resize(t.size() / group);
  kernels::block_scales(exec, t.values(), group, fmt, result.scales);
  result.dequantized = Tensor2D(t.rows(), t.cols());
  kernels::block_quantize(exec, t.values(), group, fmt, result.scales,
                          result.dequantized.values());
  result.effective_log2_B = std::log2(static_cast<double>(group));
  return result;
}

double measure_sqnr(const Tensor2D& original, const Tensor2D& dequantized) {
  if (!original.same_shape(dequantized)) {
    throw ShapeError("measure_sqnr: tensors differ in shape");
  }
  double signal = 0.0;
  double noise = 0.0;
  const auto x = original.values();
  const auto y = dequantized.values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    signal += x[i] * x[i];
    const double e = x[i] - y[i];
    noise += e * e;
  }
  if (signal == 0.0) throw InvalidInput("measure_sqnr: original tensor is all zeros");
  if (noise == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / noise);
}

double effective_log2_B(const ScalingStrategy& strat, std::size_t rows, std::size_t cols) {
  return std::log2(static_cast<double>(strat.group_size(rows, cols)));
}

}  // namespace fpq

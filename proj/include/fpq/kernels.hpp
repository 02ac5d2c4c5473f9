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
#include <span>

#include "fpq/fpformat.hpp"

// Inner loops for block scaling and GEMM. Each kernel exists twice: a plain
// serial reference and an OpenMP version. The parallel versions only split
// independent work (blocks, elements, output rows), so they produce results
// bitwise identical to the serial ones; the test suite checks this.

namespace fpq {

enum class Exec { serial, parallel };

namespace kernels {

// Contract shared by both namespaces:
//
// block_scales: x is split into contiguous groups of `group` elements
//   (group divides x.size()); scales[i] = fp_max / max|group i|, or 1 for an
//   all-zero group.
// block_quantize: out[j] = Q(x[j] * s) / s with s = scales[j / group].
// gemm_nt: c (m x n) = a (m x k) * b(n x k)^T, row-major, each dot product
//   accumulated left to right in double.

namespace serial {

void block_scales(std::span<const double> x, std::size_t group, const FpFormat& fmt,
                  std::span<double> scales);
void block_quantize(std::span<const double> x, std::size_t group, const FpFormat& fmt,
                    std::span<const double> scales, std::span<double> out);
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k);

}  // namespace serial

namespace omp {

void block_scales(std::span<const double> x, std::size_t group, const FpFormat& fmt,
                  std::span<double> scales);
void block_quantize(std::span<const double> x, std::size_t group, const FpFormat& fmt,
                    std::span<const double> scales, std::span<double> out);
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k);

}  // namespace omp

inline void block_scales(Exec exec, std::span<const double> x, std::size_t group,
                         const FpFormat& fmt, std::span<double> scales) {
  exec == Exec::parallel ? omp::block_scales(x, group, fmt, scales)
                         : serial::block_scales(x, group, fmt, scales);
}

inline void block_quantize(Exec exec, std::span<const double> x, std::size_t group,
                           const FpFormat& fmt, std::span<const double> scales,
                           std::span<double> out) {
  exec == Exec::parallel ? omp::block_quantize(x, group, fmt, scales, out)
                         : serial::block_quantize(x, group, fmt, scales, out);
}

inline void gemm_nt(Exec exec, std::span<const double> a, std::span<const double> b,
                    std::span<double> c, std::size_t m, std::size_t n, std::size_t k) {
  exec == Exec::parallel ? omp::gemm_nt(a, b, c, m, n, k) : serial::gemm_nt(a, b, c, m, n, k);
}

}  // namespace kernels
}  // namespace fpq

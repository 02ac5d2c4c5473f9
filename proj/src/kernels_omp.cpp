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

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "fpq/kernels.hpp"

namespace fpq::kernels::omp {

namespace {

// Below this many elements the fork/join overhead dominates.
constexpr std::size_t kMinParallelElements = 1 << 14;

}  // namespace

void block_scales(std::span<const double> x, std::size_t group, const FpFormat& fmt,
                  std::span<double> scales) {
  const double max_value = fp_max(fmt);
  const auto nblocks = static_cast<std::int64_t>(scales.size());
  const bool big = x.size() >= kMinParallelElements;

  if (nblocks >= omp_get_max_threads()) {
#pragma omp parallel for schedule(static) if (big)
    for (std::int64_t blk = 0; blk < nblocks; ++blk) {
      double amax = 0.0;
      const std::size_t begin = static_cast<std::size_t>(blk) * group;
      for (std::size_t j = begin; j < begin + group; ++j) amax = std::max(amax, std::fabs(x[j]));
      scales[blk] = amax > 0.0 ? max_value / amax : 1.0;
    }
    return;
  }

  // Few large blocks (tensor-wise scaling): reduce inside each block.
  // max is exact, so the reduction order cannot change the result.
  for (std::int64_t blk = 0; blk < nblocks; ++blk) {
    const auto begin = static_cast<std::int64_t>(blk * group);
    const auto end = begin + static_cast<std::int64_t>(group);
    double amax = 0.0;
#pragma omp parallel for reduction(max : amax) schedule(static) if (big)
    for (std::int64_t j = begin; j < end; ++j) amax = std::max(amax, std::fabs(x[j]));
    scales[blk] = amax > 0.0 ? max_value / amax : 1.0;
  }
}

void block_quantize(std::span<const double> x, std::size_t group, const FpFormat& fmt,
                    std::span<const double> scales, std::span<double> out) {
  const auto count = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static) if (x.size() >= kMinParallelElements)
  for (std::int64_t j = 0; j < count; ++j) {
    const double s = scales[static_cast<std::size_t>(j) / group];
    out[j] = quantize_scalar_unchecked(x[j] * s, fmt) / s;
  }
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k) {
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (m * n * k >= kMinParallelElements)
  for (std::int64_t i = 0; i < rows; ++i) {
    const double* ai = a.data() + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b.data() + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      c[i * n + j] = acc;
    }
  }
}

}  // namespace fpq::kernels::omp

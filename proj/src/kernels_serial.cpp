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

#include <algorithm>
#include <cmath>

#include "fpq/kernels.hpp"

namespace fpq::kernels::serial {

void block_scales(std::span<const double> x, std::size_t group, const FpFormat& fmt,
                  std::span<double> scales) {
  const double max_value = fp_max(fmt);
  for (std::size_t blk = 0; blk < scales.size(); ++blk) {
    double amax = 0.0;
    for (std::size_t j = blk * group; j < (blk + 1) * group; ++j) {
      amax = std::max(amax, std::fabs(x[j]));
    }
    scales[blk] = amax > 0.0 ? max_value / amax : 1.0;
  }
}

void block_quantize(std::span<const double> x, std::size_t group, const FpFormat& fmt,
                    std::span<const double> scales, std::span<double> out) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double s = scales[j / group];
    out[j] = quantize_scalar_unchecked(x[j] * s, fmt) / s;
  }
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a.data() + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b.data() + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      c[i * n + j] = acc;
    }
  }
}

}  // namespace fpq::kernels::serial

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

// Independent reference implementations shared by the unit and acceptance
// tests. Nothing here calls the library's rounding or law code.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fpq/lawmodels.hpp"
#include "fpq/tensor.hpp"

namespace fpq::testing {

/// Every non-negative value of an ExMy format, indexed by magnitude code
/// (exponent field << M | mantissa field), built straight from the bit layout.
class ReferenceFormat {
 public:
  ReferenceFormat(int E, int M) : E_(E), M_(M) {
    const int bias = (1 << (E - 1)) - 1;
    for (std::uint32_t e = 0; e < (1u << E); ++e) {
      for (std::uint32_t m = 0; m < (1u << M); ++m) {
        long double v;
        if (e == 0) {
          v = std::ldexp(static_cast<long double>(m), 1 - bias - M);
        } else {
          v = std::ldexp(1.0L + std::ldexp(static_cast<long double>(m), -M),
                         static_cast<int>(e) - bias);
        }
        mags_.push_back(v);
      }
    }
  }

  const std::vector<long double>& magnitudes() const { return mags_; }
  long double max() const { return mags_.back(); }

  /// Nearest value by exhaustive comparison against neighbours found by
  /// bisection; exact ties go to the even magnitude code; beyond the top
  /// value the largest magnitude is the nearest. -0 comes back as +0.
  double nearest(double x) const {
    const long double a = std::fabs(static_cast<long double>(x));
    const auto it = std::lower_bound(mags_.begin(), mags_.end(), a);
    std::size_t code;
    if (it == mags_.end()) {
      code = mags_.size() - 1;
    } else if (*it == a || it == mags_.begin()) {
      code = static_cast<std::size_t>(it - mags_.begin());
    } else {
      const std::size_t hi = static_cast<std::size_t>(it - mags_.begin());
      const std::size_t lo = hi - 1;
      const long double mid = (mags_[lo] + mags_[hi]) / 2.0L;
      if (a < mid) {
        code = lo;
      } else if (a > mid) {
        code = hi;
      } else {
        code = (lo % 2 == 0) ? lo : hi;
      }
    }
    const double v = static_cast<double>(mags_[code]);
    if (v == 0.0) return 0.0;
    return std::signbit(x) ? -v : v;
  }

 private:
  int E_;
  int M_;
  std::vector<long double> mags_;
};

/// Block-wise quantize-dequantize along rows, written without the library
/// kernels. `q` is the scalar rounding under test or a reference.
template <typename Quant>
Tensor2D reference_block_quantize(const Tensor2D& t, std::size_t group, double fpmax, Quant q) {
  Tensor2D out(t.rows(), t.cols());
  const auto in = t.values();
  auto o = out.values();
  for (std::size_t start = 0; start < in.size(); start += group) {
    double amax = 0.0;
    for (std::size_t j = start; j < start + group; ++j) amax = std::max(amax, std::fabs(in[j]));
    const double s = amax > 0.0 ? fpmax / amax : 1.0;
    for (std::size_t j = start; j < start + group; ++j) o[j] = q(in[j] * s) / s;
  }
  return out;
}

/// C = A B^T with a plain left-to-right dot product.
inline Tensor2D reference_gemm_nt(const Tensor2D& a, const Tensor2D& b) {
  Tensor2D c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) acc += a(i, p) * b(j, p);
      c(i, j) = acc;
    }
  }
  return c;
}

inline Tensor2D random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                              double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Tensor2D t(rows, cols);
  for (double& v : t.values()) v = g(rng);
  return t;
}

/// The generator law written out term by term.
inline double generator_loss(double N, double D, double E, double M, double log2B,
                             const LawConstants& c) {
  const double base = c.n * std::pow(N, -c.alpha) + c.d * std::pow(D, -c.beta) + c.epsilon;
  const double excess = std::pow(D, c.beta) * std::pow(N, -c.alpha) * log2B /
                        (c.gamma * std::pow(E + 0.5, c.delta) * std::pow(M + 0.5, c.nu));
  return base + excess;
}

struct Grid {
  std::vector<double> N = {4.1e7, 8.5e7, 1.54e8, 6.79e8};
  std::vector<double> D = {1e10, 2e10, 5e10, 1e11};
  std::vector<double> E = {1, 2, 4, 8};
  std::vector<double> M = {1, 3, 7};
  std::vector<double> log2B = {4, 7, 9};
};

/// Full-factorial synthetic run log; Gaussian noise of `sigma` on the loss.
inline std::vector<RunRecord> synthetic_runs(const LawConstants& c, const Grid& g, double sigma,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  std::vector<RunRecord> out;
  for (double N : g.N)
    for (double D : g.D)
      for (double E : g.E)
        for (double M : g.M)
          for (double b : g.log2B) {
            RunRecord r;
            r.N = N;
            r.D = D;
            r.E = E;
            r.M = M;
            r.log2B = b;
            r.loss = generator_loss(N, D, E, M, b, c) + (sigma > 0.0 ? noise(rng) : 0.0);
            out.push_back(r);
          }
  return out;
}

inline double rel_err(double got, double want) { return std::fabs(got - want) / std::fabs(want); }

}  // namespace fpq::testing

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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fpq {

/// An ExMy minifloat: one sign bit, E exponent bits, M mantissa bits.
///
/// Every exponent code carries a value. Code 0 is subnormal and codes
/// 1..2^E-1 are normal, so the all-ones exponent encodes ordinary numbers
/// instead of Inf/NaN (E4M3 therefore tops out at 480, not 448).
/// The bias is always 2^(E-1) - 1.
///
/// Values are held in double, which represents every code of every
/// supported format exactly; this caps E at 10.
class FpFormat {
 public:
  static constexpr int kMaxExponentBits = 10;
  static constexpr int kMaxWidth = 32;

  /// Throws ConfigError unless 1 <= E <= 10, M >= 0 and 1 + E + M <= 32.
  FpFormat(int exponent_bits, int mantissa_bits);

  /// Parses "E<k>M<j>" case-insensitively, e.g. "E4M3" or "e2m1".
  static FpFormat parse(std::string_view text);

  int exponent_bits() const noexcept { return exponent_bits_; }
  int mantissa_bits() const noexcept { return mantissa_bits_; }
  int bias() const noexcept { return (1 << (exponent_bits_ - 1)) - 1; }
  int width() const noexcept { return 1 + exponent_bits_ + mantissa_bits_; }

  /// Unbiased exponent of the smallest normal (and of every subnormal).
  int min_exponent() const noexcept { return 1 - bias(); }
  int max_exponent() const noexcept { return (1 << exponent_bits_) - 1 - bias(); }

  /// Number of non-negative magnitude codes, 2^(E+M).
  std::uint64_t magnitude_codes() const noexcept {
    return std::uint64_t{1} << (exponent_bits_ + mantissa_bits_);
  }

  std::string name() const;

  friend bool operator==(const FpFormat&, const FpFormat&) = default;

 private:
  int exponent_bits_;
  int mantissa_bits_;
};

/// Raw bit fields of one encoded value.
struct FpCode {
  std::uint32_t sign = 0;
  std::uint32_t exponent_field = 0;
  std::uint32_t mantissa_field = 0;

  friend bool operator==(const FpCode&, const FpCode&) = default;
};

/// Exact value of a code. Negative zero decodes to +0.
/// Throws InvalidInput if a field is out of range for fmt.
double decode(const FpCode& code, const FpFormat& fmt);

/// Inverse of decode for representable values. Zero encodes as +0.
/// Throws InvalidInput if value is not exactly representable.
FpCode encode(double value, const FpFormat& fmt);

/// Largest finite magnitude, (2 - 2^-M) * 2^(2^(E-1)).
double fp_max(const FpFormat& fmt);

/// Smallest positive (subnormal) magnitude.
double fp_min_subnormal(const FpFormat& fmt);

/// All distinct values in increasing order; 2^width - 1 entries.
/// Throws ConfigError for formats wider than 16 bits.
std::vector<double> enumerate_values(const FpFormat& fmt);

/// Round-to-nearest onto the format's grid.
///
/// Ties go to the neighbour with the even magnitude code, which is the
/// neighbour with the even mantissa field whenever M >= 1. Magnitudes above
/// fp_max saturate. Throws InvalidInput for non-finite x.
double quantize_scalar(double x, const FpFormat& fmt);

/// Unchecked variant for hot loops; x must be finite.
double quantize_scalar_unchecked(double x, const FpFormat& fmt) noexcept;

}  // namespace fpq

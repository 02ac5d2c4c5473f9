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

#include "fpq/fpformat.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "fpq/errors.hpp"

namespace fpq {

FpFormat::FpFormat(int exponent_bits, int mantissa_bits)
    : exponent_bits_(exponent_bits), mantissa_bits_(mantissa_bits) {
  if (exponent_bits < 1 || exponent_bits > kMaxExponentBits) {
    throw ConfigError("exponent bits must be in [1, " + std::to_string(kMaxExponentBits) +
                      "], got " + std::to_string(exponent_bits));
  }
  if (mantissa_bits < 0) {
    throw ConfigError("mantissa bits must be non-negative, got " + std::to_string(mantissa_bits));
  }
  if (1 + exponent_bits + mantissa_bits > kMaxWidth) {
    throw ConfigError("format width 1+E+M exceeds " + std::to_string(kMaxWidth) + " bits");
  }
}

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

FpFormat FpFormat::parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);

  const auto bad = [&] {
    return InvalidInput("invalid format string '" + std::string(text) + "', expected E<k>M<j>");
  };
  if (text.size() < 4 || std::toupper(static_cast<unsigned char>(text.front())) != 'E') throw bad();
  const auto m_pos = text.find_first_of("Mm");
  if (m_pos == std::string_view::npos) throw bad();

  int e = 0;
  int m = 0;
  if (!parse_int(text.substr(1, m_pos - 1), e) || !parse_int(text.substr(m_pos + 1), m)) throw bad();
  try {
    return FpFormat(e, m);
  } catch (const ConfigError& err) {
    throw InvalidInput(std::string(err.what()));
  }
}

std::string FpFormat::name() const {
  return "E" + std::to_string(exponent_bits_) + "M" + std::to_string(mantissa_bits_);
}

double decode(const FpCode& code, const FpFormat& fmt) {
  const int m_bits = fmt.mantissa_bits();
  if (code.sign > 1) throw InvalidInput("sign field must be 0 or 1");
  if (code.exponent_field >= (std::uint32_t{1} << fmt.exponent_bits())) {
    throw InvalidInput("exponent field out of range for " + fmt.name());
  }
  if (std::uint64_t{code.mantissa_field} >= (std::uint64_t{1} << m_bits)) {
    throw InvalidInput("mantissa field out of range for " + fmt.name());
  }

  double magnitude;
  if (code.exponent_field == 0) {
    magnitude = std::ldexp(static_cast<double>(code.mantissa_field), fmt.min_exponent() - m_bits);
  } else {
    const double significand =
        std::ldexp(1.0, m_bits) + static_cast<double>(code.mantissa_field);
    magnitude = std::ldexp(significand,
                           static_cast<int>(code.exponent_field) - fmt.bias() - m_bits);
  }
  if (magnitude == 0.0) return 0.0;
  return code.sign ? -magnitude : magnitude;
}

double fp_max(const FpFormat& fmt) {
  return std::ldexp(2.0 - std::ldexp(1.0, -fmt.mantissa_bits()), fmt.max_exponent());
}

double fp_min_subnormal(const FpFormat& fmt) {
  return std::ldexp(1.0, fmt.min_exponent() - fmt.mantissa_bits());
}

namespace {

// Binade exponent used for grid spacing: floor(log2 a), clamped to the
// subnormal range, which shares its spacing with the first normal binade.
int grid_exponent(double a, const FpFormat& fmt) {
  int k = 0;
  std::frexp(a, &k);
  return std::max(k - 1, fmt.min_exponent());
}

}  // namespace

FpCode encode(double value, const FpFormat& fmt) {
  if (!std::isfinite(value)) throw InvalidInput("cannot encode a non-finite value");
  FpCode code;
  code.sign = std::signbit(value) && value != 0.0 ? 1U : 0U;
  const double a = std::fabs(value);
  if (a == 0.0) return code;
  if (a > fp_max(fmt)) throw InvalidInput("value exceeds the range of " + fmt.name());

  const int m_bits = fmt.mantissa_bits();
  const int e = grid_exponent(a, fmt);
  const double steps = std::ldexp(a, m_bits - e);
  if (steps != std::floor(steps)) {
    throw InvalidInput("value is not representable in " + fmt.name());
  }
  const std::uint64_t magnitude_code =
      (static_cast<std::uint64_t>(e - fmt.min_exponent()) << m_bits) +
      static_cast<std::uint64_t>(steps);
  code.exponent_field = static_cast<std::uint32_t>(magnitude_code >> m_bits);
  code.mantissa_field =
      static_cast<std::uint32_t>(magnitude_code & ((std::uint64_t{1} << m_bits) - 1));
  return code;
}

std::vector<double> enumerate_values(const FpFormat& fmt) {
  if (fmt.width() > 16) {
    throw ConfigError("refusing to enumerate " + fmt.name() + ": width exceeds 16 bits");
  }
  const std::uint32_t m_count = std::uint32_t{1} << fmt.mantissa_bits();
  const std::uint32_t e_count = std::uint32_t{1} << fmt.exponent_bits();

  std::vector<double> magnitudes;
  magnitudes.reserve(static_cast<std::size_t>(e_count) * m_count);
  for (std::uint32_t e = 0; e < e_count; ++e) {
    for (std::uint32_t m = 0; m < m_count; ++m) {
      magnitudes.push_back(decode(FpCode{0, e, m}, fmt));
    }
  }

  std::vector<double> values;
  values.reserve(2 * magnitudes.size() - 1);
  for (auto it = magnitudes.rbegin(); it != magnitudes.rend(); ++it) {
    if (*it != 0.0) values.push_back(-*it);
  }
  values.insert(values.end(), magnitudes.begin(), magnitudes.end());
  return values;
}

double quantize_scalar_unchecked(double x, const FpFormat& fmt) noexcept {
  const double a = std::fabs(x);
  if (a == 0.0) return 0.0;

  const double max_value = fp_max(fmt);
  if (a >= max_value) return std::copysign(max_value, x);

  // a = steps * 2^(e - M); both neighbours lie on this grid.
  const int m_bits = fmt.mantissa_bits();
  const int e = grid_exponent(a, fmt);
  const double steps = std::ldexp(a, m_bits - e);
  const double lower = std::floor(steps);
  const double frac = steps - lower;

  double chosen = lower;
  if (frac > 0.5) {
    chosen = lower + 1.0;
  } else if (frac == 0.5) {
    const auto lower_code = (static_cast<std::uint64_t>(e - fmt.min_exponent()) << m_bits) +
                            static_cast<std::uint64_t>(lower);
    if (lower_code & 1U) chosen = lower + 1.0;
  }
  if (chosen == 0.0) return 0.0;
  return std::copysign(std::ldexp(chosen, e - m_bits), x);
}

double quantize_scalar(double x, const FpFormat& fmt) {
  if (!std::isfinite(x)) throw InvalidInput("quantize_scalar: input is not finite");
  return quantize_scalar_unchecked(x, fmt);
}

}  // namespace fpq

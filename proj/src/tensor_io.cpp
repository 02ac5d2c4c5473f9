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

#include "fpq/tensor_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace fpq {

static_assert(std::endian::native == std::endian::little,
              "binary tensor I/O assumes a little-endian host");

TensorFileFormat guess_tensor_format(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".bin" || ext == ".f32") ? TensorFileFormat::binary : TensorFileFormat::text;
}

namespace {

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Tensor2D read_tensor_text(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  while (std::getline(in, line)) {
    ++line_no;
    line = strip_comment(line);
    if (blank(line)) continue;
    std::istringstream header(line);
    long long r = 0;
    long long c = 0;
    std::string extra;
    if (!(header >> r >> c) || (header >> extra) || r <= 0 || c <= 0) {
      throw ParseError("expected a header line 'rows cols' with positive integers", line_no);
    }
    rows = static_cast<std::size_t>(r);
    cols = static_cast<std::size_t>(c);
    break;
  }
  if (rows == 0) throw ParseError("empty tensor file", line_no == 0 ? 1 : line_no);

  std::vector<double> data;
  data.reserve(rows * cols);
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_comment(line);
    if (blank(line)) continue;
    std::istringstream fields(line);
    std::string token;
    std::size_t count = 0;
    while (fields >> token) {
      double v = 0.0;
      std::size_t used = 0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || !std::isfinite(v)) {
        throw ParseError("invalid or non-finite value '" + token + "'", line_no);
      }
      data.push_back(v);
      ++count;
    }
    if (count != cols) {
      throw ParseError("expected " + std::to_string(cols) + " values, found " +
                           std::to_string(count),
                       line_no);
    }
  }
  if (data.size() != rows * cols) {
    throw ParseError("expected " + std::to_string(rows) + " rows, found " +
                     std::to_string(data.size() / cols));
  }
  return Tensor2D(rows, cols, std::move(data));
}

void write_tensor_text(std::ostream& out, const Tensor2D& t) {
  out << t.rows() << ' ' << t.cols() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const auto row = t.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ' ';
      out << row[c];
    }
    out << '\n';
  }
}

Tensor2D read_tensor_binary(std::istream& in) {
  std::array<std::uint32_t, 2> dims{};
  if (!in.read(reinterpret_cast<char*>(dims.data()), sizeof(dims))) {
    throw ParseError("binary tensor: truncated 8-byte header");
  }
  if (dims[0] == 0 || dims[1] == 0) throw ParseError("binary tensor: zero dimension in header");

  const std::size_t count = std::size_t{dims[0]} * dims[1];
  std::vector<float> raw(count);
  if (!in.read(reinterpret_cast<char*>(raw.data()),
               static_cast<std::streamsize>(count * sizeof(float)))) {
    throw ParseError("binary tensor: payload shorter than " + std::to_string(count) + " floats");
  }
  std::vector<double> data(raw.begin(), raw.end());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw ParseError("binary tensor: non-finite value at element " + std::to_string(i));
    }
  }
  return Tensor2D(dims[0], dims[1], std::move(data));
}

void write_tensor_binary(std::ostream& out, const Tensor2D& t) {
  if (t.rows() > std::numeric_limits<std::uint32_t>::max() ||
      t.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw ShapeError("binary tensor: dimensions exceed 32 bits");
  }
  const std::array<std::uint32_t, 2> dims{static_cast<std::uint32_t>(t.rows()),
                                          static_cast<std::uint32_t>(t.cols())};
  out.write(reinterpret_cast<const char*>(dims.data()), sizeof(dims));
  std::vector<float> raw(t.values().begin(), t.values().end());
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(float)));
}

Tensor2D read_tensor(const std::filesystem::path& path, TensorFileFormat fmt) {
  std::ifstream in(path, fmt == TensorFileFormat::binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error("cannot open tensor file " + path.string());
  return fmt == TensorFileFormat::binary ? read_tensor_binary(in) : read_tensor_text(in);
}

void write_tensor(const std::filesystem::path& path, const Tensor2D& t, TensorFileFormat fmt) {
  std::ofstream out(path, fmt == TensorFileFormat::binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot write tensor file " + path.string());
  fmt == TensorFileFormat::binary ? write_tensor_binary(out, t) : write_tensor_text(out, t);
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace fpq

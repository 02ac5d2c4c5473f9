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
#include <stdexcept>
#include <string>

namespace fpq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed argument values (non-finite input, bad format string, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Inconsistent configuration, e.g. a block size that does not divide the channel count.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Shape disagreement between tensors.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Text/file parse failure with a 1-based source location (0 means unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0, std::size_t column = 0)
      : Error(format(message, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& message, std::size_t line, std::size_t column) {
    if (line == 0) return message;
    std::string out = "line " + std::to_string(line);
    if (column != 0) out += ", column " + std::to_string(column);
    return out + ": " + message;
  }

  std::size_t line_;
  std::size_t column_;
};

/// A numerical procedure could not produce a usable answer.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace fpq

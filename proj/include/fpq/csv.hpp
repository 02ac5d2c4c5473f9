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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fpq {

/// Minimal comma-separated table: a header row and string cells. Fields may
/// be double-quoted ("" escapes a quote); blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  std::optional<std::size_t> column(std::string_view name) const;
};

/// Throws ParseError (with line numbers) on ragged rows or unterminated quotes.
CsvTable read_csv(std::istream& in);

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no);

/// Quotes a field only when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);

/// Strict full-string double parse; throws ParseError with the given location.
double parse_double(const std::string& text, std::size_t line, std::size_t column);

}  // namespace fpq

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

#include <CLI11.hpp>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fpq/fpformat.hpp"
#include "fpq/lawmodels.hpp"

namespace fpq::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kParse = 3, kNumeric = 4 };

/// Where the law constants come from. At most one of the three flags may be
/// given; with none, the built-in preset is used.
struct ConstantsSource {
  std::string constants_file;
  std::string report_file;
  std::string preset;

  void add_options(CLI::App* app);
  LawConstants resolve() const;
};

/// Model name and fitted parameters stored in a fit report.
struct ReportParams {
  std::string model;
  std::vector<std::pair<std::string, double>> params;
};
ReportParams read_report_params(const std::string& path);

/// "1730T" style for token counts >= 1e12, plain otherwise.
std::string format_tokens(double D);

std::vector<FpFormat> parse_formats(const std::vector<std::string>& names);

/// Prints a fixed-width table.
void print_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows);

/// Short human-readable number.
std::string fmt_num(double v, int precision = 6);

/// A subcommand: registration adds its options, the returned function runs it.
using Runner = std::function<int()>;

Runner add_fit(CLI::App& app);
Runner add_predict(CLI::App& app);
Runner add_curves(CLI::App& app);
Runner add_implications(CLI::App& app);
Runner add_quantize(CLI::App& app);
Runner add_enumerate(CLI::App& app);
Runner add_simulate(CLI::App& app);

}  // namespace fpq::cli

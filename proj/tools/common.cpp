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

#include "common.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "fpq/errors.hpp"
#include "fpq/fitter.hpp"

namespace fpq::cli {

void ConstantsSource::add_options(CLI::App* app) {
  auto* group = app->add_option_group("constants", "Law constants source (pick at most one)");
  group->add_option("--constants", constants_file, "Constants file (key = value lines)");
  group->add_option("--report", report_file, "JSON fit report written by 'fit'");
  group->add_option("--preset", preset, "Named preset (FPQ_PRESET_DIR overrides built-ins)");
}

LawConstants ConstantsSource::resolve() const {
  const int given = !constants_file.empty() + !report_file.empty() + !preset.empty();
  if (given > 1) {
    throw ConfigError("--constants, --report and --preset are mutually exclusive");
  }
  if (!constants_file.empty()) return load_constants_file(constants_file);
  if (!report_file.empty()) return constants_from_fit_report(report_file);
  return load_preset(preset.empty() ? "capybara-paper" : preset);
}

ReportParams read_report_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open fit report " + path);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("fit report: ") + e.what());
  }
  if (!j.contains("model") || !j["model"].is_string() || !j.contains("params") ||
      !j["params"].is_object()) {
    throw ParseError("fit report needs 'model' and 'params'");
  }
  ReportParams out;
  out.model = j["model"].get<std::string>();
  for (const auto& [k, v] : j["params"].items()) {
    if (!v.is_number()) throw ParseError("fit report parameter '" + k + "' is not a number");
    out.params.emplace_back(k, v.get<double>());
  }
  return out;
}

std::string format_tokens(double D) {
  char buf[64];
  if (D >= 1e12) {
    std::snprintf(buf, sizeof buf, "%.4gT", D / 1e12);
  } else {
    std::snprintf(buf, sizeof buf, "%.4g", D);
  }
  return buf;
}

std::string fmt_num(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::vector<FpFormat> parse_formats(const std::vector<std::string>& names) {
  std::vector<FpFormat> out;
  for (const auto& n : names) out.push_back(FpFormat::parse(n));
  return out;
}

void print_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], r[c].size());
    }
  }
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out << "  ";
      out << cells[c] << std::string(width[c] - cells[c].size(), ' ');
    }
    out << '\n';
  };
  line(header);
  std::vector<std::string> rule;
  for (auto w : width) rule.emplace_back(w, '-');
  line(rule);
  for (const auto& r : rows) line(r);
}

}  // namespace fpq::cli

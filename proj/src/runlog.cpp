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

#include "fpq/runlog.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>

#include "fpq/csv.hpp"
#include "fpq/errors.hpp"

namespace fpq {

std::string strategy_name(ScalingStrategy::Kind kind) {
  switch (kind) {
    case ScalingStrategy::Kind::block:
      return "block";
    case ScalingStrategy::Kind::channel:
      return "channel";
    case ScalingStrategy::Kind::tensor:
      return "tensor";
  }
  return "block";
}

namespace {

std::string joined(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

std::size_t column_of(const std::vector<std::string>& fields, std::size_t index) {
  std::size_t col = 1;
  for (std::size_t i = 0; i < index; ++i) col += fields[i].size() + 1;
  return col;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t") == std::string::npos; }

}  // namespace

std::vector<RunRecord> read_runlog(std::istream& in, const RunLogOptions& opts) {
  const CsvTable table = read_csv(in);
  if (joined(table.header) != kRunLogHeader) {
    throw ParseError(std::string("header must be exactly '") + kRunLogHeader + "'", 1, 1);
  }

  std::vector<RunRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    const auto num = [&](std::size_t i) { return parse_double(f[i], line, column_of(f, i)); };

    RunRecord rec;
    rec.N = num(0);
    rec.D = num(1);
    rec.E = num(2);
    rec.M = num(3);
    if (f[5] == "block") {
      rec.strategy = ScalingStrategy::Kind::block;
    } else if (f[5] == "channel") {
      rec.strategy = ScalingStrategy::Kind::channel;
    } else if (f[5] == "tensor") {
      rec.strategy = ScalingStrategy::Kind::tensor;
    } else {
      throw ParseError("strategy must be block, channel or tensor, got '" + f[5] + "'", line,
                       column_of(f, 5));
    }
    if (!blank(f[4])) {
      rec.log2B = num(4);
    } else if (rec.strategy == ScalingStrategy::Kind::channel) {
      rec.log2B = channel_equiv_log2B();
    } else if (rec.strategy == ScalingStrategy::Kind::tensor && opts.tensor_equiv) {
      rec.log2B = tensor_equiv_log2B(rec.N, rec.D, *opts.tensor_equiv);
    } else {
      throw ParseError(rec.strategy == ScalingStrategy::Kind::tensor
                           ? "blank log2B on a tensor-wise row needs tensor-equivalent parameters"
                           : "log2B is required for block-wise rows",
                       line, column_of(f, 4));
    }
    rec.loss = num(6);
    try {
      rec.validate();
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), line);
    }
    records.push_back(rec);
  }
  return records;
}

RunLog read_runlog_file(const std::filesystem::path& path, const RunLogOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open run log " + path.string());
  return RunLog{path, read_runlog(in, opts)};
}

void write_runlog(std::ostream& out, const std::vector<RunRecord>& records) {
  out << kRunLogHeader << '\n';
  for (const auto& r : records) {
    out << format_double(r.N) << ',' << format_double(r.D) << ',' << format_double(r.E) << ','
        << format_double(r.M) << ',' << format_double(r.log2B) << ',' << strategy_name(r.strategy)
        << ',' << format_double(r.loss) << '\n';
  }
}

std::vector<RunRecord> read_points(std::istream& in) {
  const CsvTable table = read_csv(in);
  static constexpr std::array<const char*, 5> required = {"N", "D", "E", "M", "log2B"};
  std::array<std::size_t, 5> idx{};
  for (std::size_t i = 0; i < required.size(); ++i) {
    const auto c = table.column(required[i]);
    if (!c) throw ParseError(std::string("missing column '") + required[i] + "'", 1);
    idx[i] = *c;
  }
  const auto loss_col = table.column("loss");

  std::vector<RunRecord> points;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    RunRecord p;
    p.N = parse_double(f[idx[0]], line, column_of(f, idx[0]));
    p.D = parse_double(f[idx[1]], line, column_of(f, idx[1]));
    p.E = parse_double(f[idx[2]], line, column_of(f, idx[2]));
    p.M = parse_double(f[idx[3]], line, column_of(f, idx[3]));
    p.log2B = parse_double(f[idx[4]], line, column_of(f, idx[4]));
    p.loss = (loss_col && !blank(f[*loss_col])) ? parse_double(f[*loss_col], line, 0) : 1.0;
    try {
      p.validate();
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), line);
    }
    points.push_back(p);
  }
  return points;
}

}  // namespace fpq

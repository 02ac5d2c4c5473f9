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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fpq/lawmodels.hpp"

namespace fpq {

/// The only accepted run-log header.
inline constexpr const char* kRunLogHeader = "N,D,E,M,log2B,strategy,loss";

struct RunLogOptions {
  /// Needed to fill blank log2B cells of tensor-wise rows.
  std::optional<TensorEquivParams> tensor_equiv;
};

struct RunLog {
  std::filesystem::path path;
  std::vector<RunRecord> records;
};

/// Parses a run log. Channel-wise rows with a blank log2B get the channel
/// equivalent; tensor-wise rows need opts.tensor_equiv. Any violation
/// throws ParseError carrying the line (and column where known).
std::vector<RunRecord> read_runlog(std::istream& in, const RunLogOptions& opts = {});
RunLog read_runlog_file(const std::filesystem::path& path, const RunLogOptions& opts = {});

void write_runlog(std::ostream& out, const std::vector<RunRecord>& records);

std::string strategy_name(ScalingStrategy::Kind kind);

/// Prediction inputs: any CSV whose header contains N, D, E, M and log2B
/// (other columns are ignored). loss is set to 1 when absent.
std::vector<RunRecord> read_points(std::istream& in);

}  // namespace fpq

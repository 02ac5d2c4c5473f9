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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fpq/errors.hpp"
#include "fpq/lawmodels.hpp"
#include "fpq/levmar.hpp"

namespace fpq {

/// Fewer distinct observations than free parameters.
class UnderdeterminedError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A staged fit needs variation the dataset does not have.
class SpanError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Law forms the fitter knows. The *_reparam forms free the
/// knowledge-intensity exponents (phi, eta) and the BF16 multiplier (iota).
enum class ModelId {
  chinchilla,
  openai,
  kumar,
  capybara,
  em_joint,
  exponent_joint,
  mantissa_joint,
  blocksize_joint,
  exponent_reparam,
  mantissa_reparam,
  blocksize_reparam,
  exponent_marginal,
  mantissa_marginal,
  blocksize_marginal,
};

struct ParamBounds {
  double lower = 0.0;
  double upper = 0.0;
};

struct LawModel {
  ModelId id;
  std::string name;
  std::vector<std::string> params;
  std::vector<ParamBounds> bounds;  // default multistart box, same order as params
  bool analytic_jacobian = false;

  double eval(const RunRecord& x, std::span<const double> p) const;
  /// dL/dp for models with analytic_jacobian; returns false otherwise.
  bool gradient(const RunRecord& x, std::span<const double> p, std::span<double> out) const;
  std::optional<std::size_t> index_of(std::string_view param) const;
};

const LawModel& law_model(ModelId id);
/// Accepts the names printed by LawModel::name (e.g. "capybara", "kumar").
ModelId parse_model_id(std::string_view name);
std::vector<ModelId> all_model_ids();

enum class ParamSpace { log, direct };

struct FreeParam {
  std::string name;
  ParamBounds bounds;
};

struct FitProblem {
  ModelId model = ModelId::capybara;
  std::vector<RunRecord> dataset;
  /// Empty means every model parameter, with the model's default bounds.
  std::vector<FreeParam> free;
  /// Values for parameters that are not free.
  std::map<std::string, double> fixed;
  /// Optional start; used as start 0 of the multistart.
  std::map<std::string, double> initial;
  LossKind loss = LossKind::squared;
  double huber_h = 1e-3;
  std::size_t starts = 32;
  std::uint64_t seed = 0;
  ParamSpace space = ParamSpace::log;
  std::size_t max_iterations = 500;
  double rel_tolerance = 1e-10;
  bool parallel = true;
};

struct FitResult {
  std::string model;
  /// Every model parameter (free and fixed) in model order.
  std::vector<std::pair<std::string, double>> params;
  std::vector<std::string> free_params;
  std::vector<double> residuals;  // prediction - observation
  double rmse = 0.0;
  double r2 = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double objective = 0.0;
  std::string loss = "squared";
  std::size_t best_start = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> start_seeds;
  std::vector<double> objective_history;  // of the winning start

  double param(std::string_view name) const;
  std::vector<double> param_values() const;
  /// Requires a model whose parameter names cover the eight law constants.
  LawConstants constants() const;
};

/// Multistart damped least squares. Throws UnderdeterminedError when the
/// dataset has fewer distinct inputs than free parameters and NumericError
/// when no start is feasible. Non-convergence is reported through the flag.
FitResult fit(const FitProblem& problem);

/// Evaluates a fitted model on new points.
std::vector<double> predict(ModelId model, std::span<const std::pair<std::string, double>> params,
                            std::span<const RunRecord> points);

struct SliceFit {
  double N = 0.0;
  double D = 0.0;
  FitResult result;
};

/// Per-stage record of a staged fit.
struct StagedFitReport {
  FitResult stage1_chinchilla;
  std::size_t stage1_rows = 0;

  // Stage 2: single-variable laws per (N, D) and joint laws with free exponents.
  std::vector<SliceFit> exponent_marginals;
  std::vector<SliceFit> mantissa_marginals;
  std::vector<SliceFit> block_marginals;
  FitResult exponent_reparam;
  FitResult mantissa_reparam;
  FitResult block_reparam;

  // phi/beta, eta/alpha and iota for each joint fit.
  struct Ratios {
    double phi_over_beta = 0.0;
    double eta_over_alpha = 0.0;
    double iota = 0.0;
  };
  Ratios exponent_ratios;
  Ratios mantissa_ratios;
  Ratios block_ratios;

  FitResult stage3_unified;
  LawConstants constants;
};

struct StagedFitOptions {
  std::size_t starts = 32;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::squared;
  double huber_h = 1e-3;
};

/// Chinchilla on the highest-precision rows, then marginal and
/// free-exponent joint fits on E/M/B slices, then the unified law seeded
/// from both. Throws SpanError when N, D, E, M or log2B has < 2 values.
StagedFitReport staged_fit(const std::vector<RunRecord>& dataset, const StagedFitOptions& opts = {});

struct ModelComparisonRow {
  std::string model;
  FitResult full_fit;
  double heldout_rmse = 0.0;
};

/// Fits every candidate with the same protocol and ranks them by held-out
/// RMSE under leave-one-N-out splits (best first).
std::vector<ModelComparisonRow> compare_models(const std::vector<RunRecord>& dataset,
                                               const std::vector<ModelId>& candidates,
                                               const StagedFitOptions& opts = {});

struct TensorEquivFit {
  TensorEquivParams params;
  double rmse = 0.0;
  bool converged = false;
};

/// Fits log2 B_tensor = N^omega / (xi D^eta_t) to (N, D, log2B) triples
/// taken from the records' N, D and log2B fields.
TensorEquivFit fit_tensor_equiv(const std::vector<RunRecord>& points, std::uint64_t seed = 0);

/// JSON object with every FitResult field.
std::string fit_report_json(const FitResult& result, int indent = 2);
/// Reads back the constants from a fit report written by fit_report_json.
LawConstants constants_from_fit_report(const std::filesystem::path& path);

}  // namespace fpq

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

// fit and predict.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>

#include "common.hpp"
#include "fpq/csv.hpp"
#include "fpq/errors.hpp"
#include "fpq/fitter.hpp"
#include "fpq/runlog.hpp"

namespace fpq::cli {

namespace {

using ojson = nlohmann::ordered_json;

struct FitArgs {
  std::string runlog;
  std::string model = "capybara";
  bool staged = false;
  std::vector<std::string> compare;
  std::string loss = "squared";
  double huber_h = 1e-3;
  std::size_t starts = 32;
  std::uint64_t seed = 0;
  std::string space = "log";
  std::size_t max_iterations = 500;
  std::vector<std::string> fix;
  std::vector<double> tensor_equiv;
  std::string out;
};

ojson report(const FitResult& r) { return ojson::parse(fit_report_json(r, -1)); }

ojson slices(const std::vector<SliceFit>& fits) {
  ojson arr = ojson::array();
  for (const auto& s : fits) {
    ojson o;
    o["N"] = s.N;
    o["D"] = s.D;
    o["fit"] = report(s.result);
    arr.push_back(o);
  }
  return arr;
}

ojson ratios(const StagedFitReport::Ratios& r) {
  ojson o;
  o["phi_over_beta"] = r.phi_over_beta;
  o["eta_over_alpha"] = r.eta_over_alpha;
  o["iota"] = r.iota;
  return o;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text << '\n';
}

std::map<std::string, double> parse_fixed(const std::vector<std::string>& items) {
  std::map<std::string, double> fixed;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--fix expects name=value, got '" + item + "'");
    try {
      fixed[item.substr(0, eq)] = parse_double(item.substr(eq + 1), 0, 0);
    } catch (const ParseError&) {
      throw ConfigError("--fix value for '" + item.substr(0, eq) + "' is not a number");
    }
  }
  return fixed;
}

int run_fit(const FitArgs& a) {
  RunLogOptions ropts;
  if (!a.tensor_equiv.empty()) {
    if (a.tensor_equiv.size() != 3) throw ConfigError("--tensor-equiv takes omega xi eta_t");
    ropts.tensor_equiv = TensorEquivParams{a.tensor_equiv[0], a.tensor_equiv[1], a.tensor_equiv[2]};
  }
  const RunLog log = read_runlog_file(a.runlog, ropts);
  const LossKind loss = a.loss == "huber" ? LossKind::huber : LossKind::squared;

  if (!a.compare.empty()) {
    std::vector<ModelId> ids;
    for (const auto& m : a.compare) ids.push_back(parse_model_id(m));
    const auto rows = compare_models(log.records, ids, {a.starts, a.seed, loss, a.huber_h});
    ojson j = ojson::array();
    std::vector<std::vector<std::string>> table;
    for (const auto& r : rows) {
      ojson o;
      o["model"] = r.model;
      o["heldout_rmse"] = r.heldout_rmse;
      o["fit"] = report(r.full_fit);
      j.push_back(o);
      table.push_back({r.model, fmt_num(r.heldout_rmse), fmt_num(r.full_fit.rmse),
                       fmt_num(r.full_fit.r2)});
    }
    print_table(std::cerr, {"model", "heldout_rmse", "rmse", "r2"}, table);
    emit(a.out, j.dump(2));
    return kOk;
  }

  if (a.staged) {
    const StagedFitReport s = staged_fit(log.records, {a.starts, a.seed, loss, a.huber_h});
    ojson j = report(s.stage3_unified);
    ojson stages;
    stages["stage1_chinchilla"] = report(s.stage1_chinchilla);
    stages["stage1_rows"] = s.stage1_rows;
    stages["exponent_marginals"] = slices(s.exponent_marginals);
    stages["mantissa_marginals"] = slices(s.mantissa_marginals);
    stages["block_marginals"] = slices(s.block_marginals);
    stages["exponent_reparam"] = report(s.exponent_reparam);
    stages["mantissa_reparam"] = report(s.mantissa_reparam);
    stages["block_reparam"] = report(s.block_reparam);
    stages["exponent_ratios"] = ratios(s.exponent_ratios);
    stages["mantissa_ratios"] = ratios(s.mantissa_ratios);
    stages["block_ratios"] = ratios(s.block_ratios);
    j["stages"] = stages;
    emit(a.out, j.dump(2));
    std::cerr << "staged fit: rmse " << fmt_num(s.stage3_unified.rmse) << ", converged "
              << (s.stage3_unified.converged ? "yes" : "no") << '\n';
    return s.stage3_unified.converged ? kOk : kNumeric;
  }

  FitProblem p;
  p.model = parse_model_id(a.model);
  p.dataset = log.records;
  p.fixed = parse_fixed(a.fix);
  p.loss = loss;
  p.huber_h = a.huber_h;
  p.starts = a.starts;
  p.seed = a.seed;
  p.space = a.space == "direct" ? ParamSpace::direct : ParamSpace::log;
  p.max_iterations = a.max_iterations;
  const FitResult r = fit(p);
  emit(a.out, fit_report_json(r));
  std::cerr << r.model << ": rmse " << fmt_num(r.rmse) << ", r2 " << fmt_num(r.r2)
            << ", iterations " << r.iterations << ", converged " << (r.converged ? "yes" : "no")
            << '\n';
  return r.converged ? kOk : kNumeric;
}

struct PredictArgs {
  ConstantsSource source;
  std::string model;
  std::string points;
  double N = 0.0;
  double D = 0.0;
  double E = -1.0;
  double M = -1.0;
  std::string fmt;
  double log2B = 0.0;
};

// Laws with no E or M input; a single point for these needs no format.
bool ignores_format(ModelId id) {
  return id == ModelId::chinchilla || id == ModelId::openai || id == ModelId::blocksize_joint ||
         id == ModelId::blocksize_reparam || id == ModelId::blocksize_marginal;
}

int run_predict(const PredictArgs& a) {
  std::string model = a.model;
  std::vector<std::pair<std::string, double>> params;
  if (!a.source.report_file.empty() && a.source.constants_file.empty() && a.source.preset.empty()) {
    ReportParams rp = read_report_params(a.source.report_file);
    if (model.empty()) model = rp.model;
    params = std::move(rp.params);
  } else {
    const LawConstants c = a.source.resolve();
    const auto v = c.as_array();
    for (std::size_t i = 0; i < v.size(); ++i) {
      params.emplace_back(std::string(LawConstants::kNames[i]), v[i]);
    }
  }
  if (model.empty()) model = "capybara";
  const ModelId id = parse_model_id(model);

  std::vector<RunRecord> pts;
  if (!a.points.empty()) {
    std::ifstream in(a.points);
    if (!in) throw Error("cannot open " + a.points);
    pts = read_points(in);
  } else {
    RunRecord r;
    r.N = a.N;
    r.D = a.D;
    r.E = a.E;
    r.M = a.M;
    if (!a.fmt.empty()) {
      const FpFormat f = FpFormat::parse(a.fmt);
      r.E = f.exponent_bits();
      r.M = f.mantissa_bits();
    }
    if (r.E < 0 || r.M < 0) {
      if (!ignores_format(id)) throw ConfigError("give --fmt or both --E and --M");
      r.E = std::max(r.E, 0.0);
      r.M = std::max(r.M, 0.0);
    }
    r.log2B = a.log2B;
    r.loss = 1.0;
    r.validate();
    pts.push_back(r);
  }

  const auto losses = predict(id, params, pts);

  std::cout << "N,D,E,M,log2B,loss\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    std::cout << format_double(p.N) << ',' << format_double(p.D) << ',' << format_double(p.E) << ','
              << format_double(p.M) << ',' << format_double(p.log2B) << ','
              << format_double(losses[i]) << '\n';
  }
  return kOk;
}

}  // namespace

Runner add_fit(CLI::App& app) {
  auto a = std::make_shared<FitArgs>();
  auto* sub = app.add_subcommand("fit", "Fit a law to a run log and write a JSON report");
  sub->add_option("--runlog", a->runlog, "CSV with header N,D,E,M,log2B,strategy,loss")->required();
  sub->add_option("--model", a->model, "Law form (capybara, chinchilla, openai, kumar, ...)");
  sub->add_flag("--staged", a->staged, "Stage-wise fit: chinchilla, slices, then unified law");
  sub->add_option("--compare", a->compare, "Rank these models by leave-one-N-out RMSE")
      ->delimiter(',');
  sub->add_option("--loss", a->loss, "Objective")->check(CLI::IsMember({"squared", "huber"}));
  sub->add_option("--huber-h", a->huber_h, "Huber threshold")->check(CLI::PositiveNumber);
  sub->add_option("--starts", a->starts, "Multistart count")->check(CLI::Range(1, 100000));
  sub->add_option("--seed", a->seed, "Multistart seed");
  sub->add_option("--space", a->space, "Parameter space")->check(CLI::IsMember({"log", "direct"}));
  sub->add_option("--max-iterations", a->max_iterations, "Iteration cap per start");
  sub->add_option("--fix", a->fix, "Hold a parameter fixed: name=value (repeatable)");
  sub->add_option("--tensor-equiv", a->tensor_equiv,
                  "omega xi eta_t used to fill blank log2B on tensor-wise rows")
      ->expected(3);
  sub->add_option("--out", a->out, "Report path (stdout when omitted)");
  return [a] { return run_fit(*a); };
}

Runner add_predict(CLI::App& app) {
  auto a = std::make_shared<PredictArgs>();
  auto* sub = app.add_subcommand("predict", "Evaluate a law at one point or a batch of points");
  a->source.add_options(sub);
  sub->add_option("--model", a->model, "Law form (default: the report's model, else capybara)");
  sub->add_option("--points", a->points, "CSV with columns N,D,E,M,log2B");
  sub->add_option("--N", a->N, "Parameters")->check(CLI::PositiveNumber);
  sub->add_option("--D", a->D, "Tokens")->check(CLI::PositiveNumber);
  sub->add_option("--E", a->E, "Exponent bits")->check(CLI::NonNegativeNumber);
  sub->add_option("--M", a->M, "Mantissa bits")->check(CLI::NonNegativeNumber);
  sub->add_option("--fmt", a->fmt, "Format such as E4M3 (instead of --E/--M)");
  sub->add_option("--log2b", a->log2B, "log2 of the block size (0 = high precision)")
      ->check(CLI::NonNegativeNumber);
  return [a] {
    if (a->points.empty() && (a->N <= 0.0 || a->D <= 0.0)) {
      throw ConfigError("predict needs --points or --N and --D");
    }
    return run_predict(*a);
  };
}

}  // namespace fpq::cli

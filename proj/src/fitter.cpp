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

#include "fpq/fitter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include <json.hpp>

namespace fpq {

namespace {

const std::vector<std::string> kChinchillaParams = {"n", "alpha", "d", "beta", "epsilon"};

std::vector<std::string> with_chinchilla(std::initializer_list<const char*> extra) {
  std::vector<std::string> out = kChinchillaParams;
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

ParamBounds default_bounds(ModelId id, const std::string& name) {
  static const std::map<std::string, ParamBounds> shared = {
      {"n", {1.0, 1e4}},       {"alpha", {0.05, 1.5}}, {"d", {10.0, 1e7}},
      {"beta", {0.05, 1.5}},   {"epsilon", {0.1, 10.0}}, {"gamma", {1.0, 1e7}},
      {"delta", {0.1, 10.0}},  {"nu", {0.1, 10.0}},   {"gamma_k", {0.05, 100.0}},
      {"kappa", {1.0, 1e12}},  {"phi", {0.05, 1.5}},  {"eta", {0.05, 1.5}},
      {"iota", {0.5, 2.0}},    {"psi", {0.1, 20.0}}};
  switch (id) {
    case ModelId::openai:
      if (name == "n" || name == "d") return {1.0, 1e18};
      break;
    case ModelId::exponent_marginal:
    case ModelId::mantissa_marginal:
      if (name == "gamma") return {1e-8, 1e3};
      if (name == "iota") return {0.1, 20.0};
      break;
    case ModelId::blocksize_marginal:
      if (name == "kappa") return {1e-10, 10.0};
      break;
    default:
      break;
  }
  return shared.at(name);
}

LawModel make_model(ModelId id, std::string name, std::vector<std::string> params,
                    bool analytic) {
  LawModel m{id, std::move(name), std::move(params), {}, analytic};
  for (const auto& p : m.params) m.bounds.push_back(default_bounds(id, p));
  return m;
}

const std::vector<LawModel>& registry() {
  static const std::vector<LawModel> models = [] {
    std::vector<LawModel> v;
    v.push_back(make_model(ModelId::chinchilla, "chinchilla", kChinchillaParams, true));
    v.push_back(make_model(ModelId::openai, "openai", kChinchillaParams, false));
    v.push_back(make_model(ModelId::kumar, "kumar", with_chinchilla({"gamma_k"}), false));
    v.push_back(make_model(ModelId::capybara, "capybara",
                           with_chinchilla({"gamma", "delta", "nu"}), true));
    v.push_back(make_model(ModelId::em_joint, "em_joint",
                           with_chinchilla({"gamma", "delta", "nu"}), true));
    v.push_back(make_model(ModelId::exponent_joint, "exponent_joint",
                           with_chinchilla({"gamma", "delta"}), false));
    v.push_back(make_model(ModelId::mantissa_joint, "mantissa_joint",
                           with_chinchilla({"gamma", "nu"}), false));
    v.push_back(make_model(ModelId::blocksize_joint, "blocksize_joint",
                           with_chinchilla({"kappa"}), false));
    v.push_back(make_model(ModelId::exponent_reparam, "exponent_reparam",
                           with_chinchilla({"gamma", "delta", "phi", "eta", "iota"}), false));
    v.push_back(make_model(ModelId::mantissa_reparam, "mantissa_reparam",
                           with_chinchilla({"gamma", "nu", "phi", "eta", "iota"}), false));
    v.push_back(make_model(ModelId::blocksize_reparam, "blocksize_reparam",
                           with_chinchilla({"kappa", "phi", "eta", "iota"}), false));
    v.push_back(make_model(ModelId::exponent_marginal, "exponent_marginal",
                           {"gamma", "delta", "iota"}, false));
    v.push_back(make_model(ModelId::mantissa_marginal, "mantissa_marginal",
                           {"gamma", "nu", "iota"}, false));
    v.push_back(make_model(ModelId::blocksize_marginal, "blocksize_marginal", {"kappa", "psi"},
                           false));
    return v;
  }();
  return models;
}

LawConstants chinchilla_part(std::span<const double> p) {
  LawConstants c;
  c.n = p[0];
  c.alpha = p[1];
  c.d = p[2];
  c.beta = p[3];
  c.epsilon = p[4];
  return c;
}

LawConstants full_constants(std::span<const double> p) {
  LawConstants c = chinchilla_part(p);
  c.gamma = p[5];
  c.delta = p[6];
  c.nu = p[7];
  return c;
}

}  // namespace

double LawModel::eval(const RunRecord& x, std::span<const double> p) const {
  switch (id) {
    case ModelId::chinchilla:
      return chinchilla_loss(x.N, x.D, chinchilla_part(p));
    case ModelId::openai:
      return openai_loss(x.N, x.D, chinchilla_part(p));
    case ModelId::kumar:
      return kumar_loss(x.N, x.D, x.E, x.M, chinchilla_part(p), p[5]);
    case ModelId::capybara:
      return capybara_loss(x.N, x.D, x.E, x.M, x.log2B, full_constants(p));
    case ModelId::em_joint:
      return em_joint(x.N, x.D, x.E, x.M, full_constants(p));
    case ModelId::exponent_joint: {
      LawConstants c = chinchilla_part(p);
      c.gamma = p[5];
      c.delta = p[6];
      return exponent_joint(x.N, x.D, x.E, c);
    }
    case ModelId::mantissa_joint: {
      LawConstants c = chinchilla_part(p);
      c.gamma = p[5];
      c.nu = p[6];
      return mantissa_joint(x.N, x.D, x.M, c);
    }
    case ModelId::blocksize_joint:
      return blocksize_joint(x.N, x.D, x.log2B, chinchilla_part(p), p[5]);
    case ModelId::exponent_reparam: {
      LawConstants c = chinchilla_part(p);
      c.gamma = p[5];
      c.delta = p[6];
      return exponent_joint_general(x.N, x.D, x.E, c, Reparam{p[7], p[8], p[9]});
    }
    case ModelId::mantissa_reparam: {
      LawConstants c = chinchilla_part(p);
      c.gamma = p[5];
      c.nu = p[6];
      return mantissa_joint_general(x.N, x.D, x.M, c, Reparam{p[7], p[8], p[9]});
    }
    case ModelId::blocksize_reparam:
      return blocksize_joint_general(x.N, x.D, x.log2B, chinchilla_part(p), p[5],
                                     Reparam{p[6], p[7], p[8]});
    case ModelId::exponent_marginal:
      return exponent_marginal(x.E, ExponentMarginal{p[0], p[1], p[2]});
    case ModelId::mantissa_marginal:
      return mantissa_marginal(x.M, MantissaMarginal{p[0], p[1], p[2]});
    case ModelId::blocksize_marginal:
      return blocksize_marginal(x.log2B, BlockMarginal{p[0], p[1]});
  }
  return std::numeric_limits<double>::quiet_NaN();
}

bool LawModel::gradient(const RunRecord& x, std::span<const double> p,
                        std::span<double> out) const {
  switch (id) {
    case ModelId::chinchilla: {
      const auto g = chinchilla_gradient(x.N, x.D, chinchilla_part(p));
      std::copy(g.begin(), g.end(), out.begin());
      return true;
    }
    case ModelId::capybara:
    case ModelId::em_joint: {
      const double log2B = id == ModelId::em_joint ? 1.0 : x.log2B;
      const auto g = capybara_gradient(x.N, x.D, x.E, x.M, log2B, full_constants(p));
      std::copy(g.begin(), g.end(), out.begin());
      return true;
    }
    default:
      return false;
  }
}

std::optional<std::size_t> LawModel::index_of(std::string_view param) const {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i] == param) return i;
  }
  return std::nullopt;
}

const LawModel& law_model(ModelId id) {
  for (const auto& m : registry()) {
    if (m.id == id) return m;
  }
  throw InvalidInput("unknown model id");
}

ModelId parse_model_id(std::string_view name) {
  for (const auto& m : registry()) {
    if (m.name == name) return m.id;
  }
  std::string known;
  for (const auto& m : registry()) known += (known.empty() ? "" : ", ") + m.name;
  throw InvalidInput("unknown model '" + std::string(name) + "' (known: " + known + ")");
}

std::vector<ModelId> all_model_ids() {
  std::vector<ModelId> ids;
  for (const auto& m : registry()) ids.push_back(m.id);
  return ids;
}

double FitResult::param(std::string_view name) const {
  for (const auto& [k, v] : params) {
    if (k == name) return v;
  }
  throw InvalidInput("fit result has no parameter '" + std::string(name) + "'");
}

std::vector<double> FitResult::param_values() const {
  std::vector<double> v;
  for (const auto& kv : params) v.push_back(kv.second);
  return v;
}

LawConstants FitResult::constants() const {
  std::array<double, 8> v{};
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = param(LawConstants::kNames[i]);
  return LawConstants::from_array(v);
}

namespace {

std::uint64_t start_seed(std::uint64_t seed, std::size_t start) {
  // splitmix64 of (seed, start)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(start) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::size_t distinct_inputs(const std::vector<RunRecord>& data) {
  std::set<std::tuple<double, double, double, double, double>> seen;
  for (const auto& r : data) seen.emplace(r.N, r.D, r.E, r.M, r.log2B);
  return seen.size();
}

struct PreparedFit {
  const LawModel* model = nullptr;
  std::vector<double> base;            // full parameter vector with fixed values filled in
  std::vector<std::size_t> free_index;  // positions in `base` that are optimized
  std::vector<ParamBounds> bounds;
  bool log_space = true;

  void expand(std::span<const double> x, std::vector<double>& p) const {
    p = base;
    for (std::size_t j = 0; j < free_index.size(); ++j) {
      p[free_index[j]] = log_space ? std::exp(x[j]) : x[j];
    }
  }
};

PreparedFit prepare(const FitProblem& problem) {
  PreparedFit prep;
  prep.model = &law_model(problem.model);
  const LawModel& model = *prep.model;
  prep.log_space = problem.space == ParamSpace::log;

  std::vector<FreeParam> free = problem.free;
  if (free.empty()) {
    for (std::size_t i = 0; i < model.params.size(); ++i) {
      if (!problem.fixed.count(model.params[i])) free.push_back({model.params[i], model.bounds[i]});
    }
  }

  prep.base.assign(model.params.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& [name, value] : problem.fixed) {
    const auto idx = model.index_of(name);
    if (!idx) throw ConfigError("model " + model.name + " has no parameter '" + name + "'");
    prep.base[*idx] = value;
  }
  for (const auto& fp : free) {
    const auto idx = model.index_of(fp.name);
    if (!idx) throw ConfigError("model " + model.name + " has no parameter '" + fp.name + "'");
    if (!(fp.bounds.lower > 0.0) || !(fp.bounds.upper > fp.bounds.lower)) {
      throw ConfigError("parameter '" + fp.name + "' needs bounds 0 < lower < upper");
    }
    if (problem.fixed.count(fp.name)) {
      throw ConfigError("parameter '" + fp.name + "' is both free and fixed");
    }
    prep.free_index.push_back(*idx);
    prep.bounds.push_back(fp.bounds);
  }
  for (std::size_t i = 0; i < prep.base.size(); ++i) {
    const bool is_free = std::find(prep.free_index.begin(), prep.free_index.end(), i) !=
                         prep.free_index.end();
    if (!is_free && !std::isfinite(prep.base[i])) {
      throw ConfigError("parameter '" + model.params[i] + "' is neither free nor fixed");
    }
  }
  if (prep.free_index.empty()) throw ConfigError("fit problem has no free parameters");
  return prep;
}

}  // namespace

FitResult fit(const FitProblem& problem) {
  if (problem.dataset.empty()) throw UnderdeterminedError("fit: empty dataset");
  const PreparedFit prep = prepare(problem);
  const LawModel& model = *prep.model;
  const std::size_t nfree = prep.free_index.size();
  const std::size_t m = problem.dataset.size();
  if (distinct_inputs(problem.dataset) < nfree) {
    throw UnderdeterminedError("fit: " + std::to_string(distinct_inputs(problem.dataset)) +
                               " distinct observations for " + std::to_string(nfree) +
                               " free parameters");
  }

  const auto& data = problem.dataset;
  ResidualFn residuals = [&](std::span<const double> x, std::span<double> r) {
    std::vector<double> p;
    prep.expand(x, p);
    for (std::size_t i = 0; i < m; ++i) r[i] = model.eval(data[i], p) - data[i].loss;
    return true;
  };
  JacobianFn jacobian;
  if (model.analytic_jacobian) {
    jacobian = [&](std::span<const double> x, std::span<double> jac) {
      std::vector<double> p;
      prep.expand(x, p);
      std::vector<double> g(p.size());
      for (std::size_t i = 0; i < m; ++i) {
        if (!model.gradient(data[i], p, g)) return false;
        for (std::size_t j = 0; j < nfree; ++j) {
          const std::size_t k = prep.free_index[j];
          jac[i * nfree + j] = prep.log_space ? g[k] * p[k] : g[k];
        }
      }
      return true;
    };
  }

  LevMarOptions lm;
  lm.max_iterations = problem.max_iterations;
  lm.rel_tolerance = problem.rel_tolerance;
  lm.loss = problem.loss;
  lm.huber_h = problem.huber_h;
  for (const auto& b : prep.bounds) {
    lm.lower.push_back(prep.log_space ? std::log(b.lower) : b.lower);
    lm.upper.push_back(prep.log_space ? std::log(b.upper) : b.upper);
  }

  const std::size_t starts = std::max<std::size_t>(1, problem.starts);
  std::vector<std::optional<LevMarResult>> runs(starts);
  std::vector<std::uint64_t> seeds(starts);
  for (std::size_t s = 0; s < starts; ++s) seeds[s] = start_seed(problem.seed, s);

  const auto run_start = [&](std::size_t s) {
    std::mt19937_64 rng(seeds[s]);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int attempt = 0; attempt < 50; ++attempt) {
      std::vector<double> x0(nfree);
      for (std::size_t j = 0; j < nfree; ++j) {
        const double lo = std::log(prep.bounds[j].lower);
        const double hi = std::log(prep.bounds[j].upper);
        double v = std::exp(lo + (hi - lo) * unit(rng));
        if (s == 0 && attempt == 0) {
          const auto it = problem.initial.find(model.params[prep.free_index[j]]);
          if (it != problem.initial.end()) v = it->second;
        }
        x0[j] = prep.log_space ? std::log(v) : v;
      }
      try {
        auto r = levenberg_marquardt(m, x0, residuals, jacobian, lm);
        if (r) {
          runs[s] = std::move(r);
          return;
        }
      } catch (...) {
        // treat as an infeasible start and resample
      }
    }
  };

  const auto nstarts = static_cast<std::int64_t>(starts);
#pragma omp parallel for schedule(dynamic) if (problem.parallel && starts > 1)
  for (std::int64_t s = 0; s < nstarts; ++s) run_start(static_cast<std::size_t>(s));

  std::optional<std::size_t> best;
  for (std::size_t s = 0; s < starts; ++s) {
    if (!runs[s]) continue;
    if (!best || runs[s]->objective < runs[*best]->objective) best = s;
  }
  if (!best) throw NumericError("fit: no feasible start for model " + model.name);
  const LevMarResult& win = *runs[*best];

  FitResult out;
  out.model = model.name;
  std::vector<double> p;
  prep.expand(win.x, p);
  for (std::size_t i = 0; i < p.size(); ++i) out.params.emplace_back(model.params[i], p[i]);
  for (auto k : prep.free_index) out.free_params.push_back(model.params[k]);
  out.residuals = win.residuals;
  out.objective = win.objective;
  out.iterations = win.iterations;
  out.converged = win.converged;
  out.loss = problem.loss == LossKind::huber ? "huber" : "squared";
  out.best_start = *best;
  out.seed = problem.seed;
  out.start_seeds = seeds;
  out.objective_history = win.history;

  double ss_res = 0.0;
  double mean = 0.0;
  for (const auto& r : data) mean += r.loss;
  mean /= static_cast<double>(m);
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    ss_res += win.residuals[i] * win.residuals[i];
    ss_tot += (data[i].loss - mean) * (data[i].loss - mean);
  }
  out.rmse = std::sqrt(ss_res / static_cast<double>(m));
  out.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return out;
}

std::vector<double> predict(ModelId id, std::span<const std::pair<std::string, double>> params,
                            std::span<const RunRecord> points) {
  const LawModel& model = law_model(id);
  std::vector<double> p(model.params.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& [name, value] : params) {
    if (const auto idx = model.index_of(name)) p[*idx] = value;
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i])) throw ConfigError("missing parameter '" + model.params[i] + "'");
  }
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& x : points) out.push_back(model.eval(x, p));
  return out;
}

// ---------------------------------------------------------------------------
// Staged fitting

namespace {

template <typename Getter>
std::vector<double> distinct(const std::vector<RunRecord>& data, Getter get) {
  std::set<double> s;
  for (const auto& r : data) s.insert(get(r));
  return {s.begin(), s.end()};
}

template <typename Pred>
std::vector<RunRecord> select(const std::vector<RunRecord>& data, Pred pred) {
  std::vector<RunRecord> out;
  std::copy_if(data.begin(), data.end(), std::back_inserter(out), pred);
  return out;
}

std::size_t distinct_nd(const std::vector<RunRecord>& data) {
  std::set<std::pair<double, double>> s;
  for (const auto& r : data) s.emplace(r.N, r.D);
  return s.size();
}

std::map<std::string, double> chinchilla_fixed(const FitResult& stage1) {
  std::map<std::string, double> fixed;
  for (const auto& name : kChinchillaParams) fixed[name] = stage1.param(name);
  return fixed;
}

FitProblem base_problem(ModelId id, std::vector<RunRecord> data, const StagedFitOptions& opts) {
  FitProblem p;
  p.model = id;
  p.dataset = std::move(data);
  p.starts = opts.starts;
  p.seed = opts.seed;
  p.loss = opts.loss;
  p.huber_h = opts.huber_h;
  return p;
}

std::vector<SliceFit> marginal_fits(const std::vector<RunRecord>& slice, ModelId id,
                                    std::size_t min_distinct, double (*key)(const RunRecord&),
                                    const StagedFitOptions& opts) {
  std::vector<SliceFit> fits;
  std::set<std::pair<double, double>> groups;
  for (const auto& r : slice) groups.emplace(r.N, r.D);
  for (const auto& [N, D] : groups) {
    auto rows = select(slice, [&](const RunRecord& r) { return r.N == N && r.D == D; });
    if (distinct(rows, key).size() < min_distinct) continue;
    FitProblem p = base_problem(id, std::move(rows), opts);
    p.starts = std::max<std::size_t>(4, opts.starts / 4);
    fits.push_back({N, D, fit(p)});
  }
  return fits;
}

StagedFitReport::Ratios ratios(const FitResult& r, const FitResult& stage1) {
  return {r.param("phi") / stage1.param("beta"), r.param("eta") / stage1.param("alpha"),
          r.param("iota")};
}

}  // namespace

StagedFitReport staged_fit(const std::vector<RunRecord>& dataset, const StagedFitOptions& opts) {
  const auto getN = [](const RunRecord& r) { return r.N; };
  const auto getD = [](const RunRecord& r) { return r.D; };
  const auto getE = [](const RunRecord& r) { return r.E; };
  const auto getM = [](const RunRecord& r) { return r.M; };
  const auto getB = [](const RunRecord& r) { return r.log2B; };

  const std::array<std::pair<const char*, std::size_t>, 5> spans = {{
      {"N", distinct(dataset, getN).size()},
      {"D", distinct(dataset, getD).size()},
      {"E", distinct(dataset, getE).size()},
      {"M", distinct(dataset, getM).size()},
      {"log2B", distinct(dataset, getB).size()},
  }};
  for (const auto& [name, count] : spans) {
    if (count < 2) {
      throw SpanError(std::string("staged fit needs at least two distinct values of ") + name);
    }
  }

  StagedFitReport report;

  // Stage 1: BF16-like rows. Prefer exact B = 1 rows, else the least lossy configuration.
  auto hp = select(dataset, [](const RunRecord& r) { return r.log2B == 0.0; });
  if (distinct_nd(hp) < 5) {
    const double maxE = distinct(dataset, getE).back();
    const double maxM = distinct(dataset, getM).back();
    const auto at_top = select(dataset, [&](const RunRecord& r) { return r.E == maxE && r.M == maxM; });
    if (at_top.empty()) throw SpanError("no rows at the highest exponent and mantissa widths");
    const double minB = distinct(at_top, getB).front();
    hp = select(at_top, [&](const RunRecord& r) { return r.log2B == minB; });
  }
  if (distinct_nd(hp) < 5) {
    throw SpanError("stage 1 needs at least five distinct (N, D) pairs at the highest precision");
  }
  report.stage1_rows = hp.size();
  report.stage1_chinchilla = fit(base_problem(ModelId::chinchilla, hp, opts));
  const auto fixed = chinchilla_fixed(report.stage1_chinchilla);

  // Stage 2 slices: vary one of E, M, B while the other two sit at their
  // most lossy setting, where the low-precision term is largest.
  const auto lossy = select(dataset, [](const RunRecord& r) { return r.log2B > 0.0; });
  const double minE = distinct(dataset, getE).front();
  const double minM = distinct(dataset, getM).front();
  const double maxB = distinct(lossy, getB).back();

  const auto e_slice =
      select(lossy, [&](const RunRecord& r) { return r.M == minM && r.log2B == maxB; });
  const auto m_slice =
      select(lossy, [&](const RunRecord& r) { return r.E == minE && r.log2B == maxB; });
  const auto b_slice = select(dataset, [&](const RunRecord& r) { return r.E == minE && r.M == minM; });
  if (distinct(e_slice, getE).size() < 2 || distinct(m_slice, getM).size() < 2 ||
      distinct(b_slice, getB).size() < 2) {
    throw SpanError("stage 2 needs E, M and log2B to vary within the low-precision slices");
  }

  report.exponent_marginals = marginal_fits(e_slice, ModelId::exponent_marginal, 3,
                                            +[](const RunRecord& r) { return r.E; }, opts);
  report.mantissa_marginals = marginal_fits(m_slice, ModelId::mantissa_marginal, 3,
                                            +[](const RunRecord& r) { return r.M; }, opts);
  report.block_marginals = marginal_fits(b_slice, ModelId::blocksize_marginal, 2,
                                         +[](const RunRecord& r) { return r.log2B; }, opts);

  auto reparam = [&](ModelId id, const std::vector<RunRecord>& slice) {
    FitProblem p = base_problem(id, slice, opts);
    p.fixed = fixed;
    return fit(p);
  };
  report.exponent_reparam = reparam(ModelId::exponent_reparam, e_slice);
  report.mantissa_reparam = reparam(ModelId::mantissa_reparam, m_slice);
  report.block_reparam = reparam(ModelId::blocksize_reparam, b_slice);
  report.exponent_ratios = ratios(report.exponent_reparam, report.stage1_chinchilla);
  report.mantissa_ratios = ratios(report.mantissa_reparam, report.stage1_chinchilla);
  report.block_ratios = ratios(report.block_reparam, report.stage1_chinchilla);

  // Stage 3: unified law. In the E slice the fitted gamma absorbs
  // log2B / (M + .5)^nu, which is undone here to seed the unified gamma.
  const double delta0 = report.exponent_reparam.param("delta");
  const double nu0 = report.mantissa_reparam.param("nu");
  const double gamma0 =
      report.exponent_reparam.param("gamma") * maxB / std::pow(minM + 0.5, nu0);

  FitProblem unified = base_problem(ModelId::capybara, dataset, opts);
  unified.initial = fixed;
  unified.initial["gamma"] = gamma0;
  unified.initial["delta"] = delta0;
  unified.initial["nu"] = nu0;
  report.stage3_unified = fit(unified);
  report.constants = report.stage3_unified.constants();
  return report;
}

std::vector<ModelComparisonRow> compare_models(const std::vector<RunRecord>& dataset,
                                               const std::vector<ModelId>& candidates,
                                               const StagedFitOptions& opts) {
  if (candidates.size() < 2) throw ConfigError("compare_models needs at least two candidates");
  const auto Ns = distinct(dataset, [](const RunRecord& r) { return r.N; });
  if (Ns.size() < 2) throw SpanError("leave-one-N-out comparison needs at least two values of N");

  std::vector<ModelComparisonRow> rows;
  for (ModelId id : candidates) {
    ModelComparisonRow row;
    row.model = law_model(id).name;
    row.full_fit = fit(base_problem(id, dataset, opts));

    double sq = 0.0;
    std::size_t count = 0;
    for (double heldN : Ns) {
      auto train = select(dataset, [&](const RunRecord& r) { return r.N != heldN; });
      auto test = select(dataset, [&](const RunRecord& r) { return r.N == heldN; });
      const FitResult fold = fit(base_problem(id, std::move(train), opts));
      const auto pred = predict(id, fold.params, test);
      for (std::size_t i = 0; i < test.size(); ++i) {
        const double e = pred[i] - test[i].loss;
        sq += e * e;
      }
      count += test.size();
    }
    row.heldout_rmse = std::sqrt(sq / static_cast<double>(count));
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.heldout_rmse < b.heldout_rmse;
  });
  return rows;
}

TensorEquivFit fit_tensor_equiv(const std::vector<RunRecord>& points, std::uint64_t seed) {
  if (distinct_inputs(points) < 3) throw UnderdeterminedError("tensor-equivalent fit needs 3 points");
  const std::size_t m = points.size();
  ResidualFn residuals = [&](std::span<const double> x, std::span<double> r) {
    const TensorEquivParams p{std::exp(x[0]), std::exp(x[1]), std::exp(x[2])};
    for (std::size_t i = 0; i < m; ++i) {
      r[i] = tensor_equiv_log2B(points[i].N, points[i].D, p) - points[i].log2B;
    }
    return true;
  };
  const std::array<ParamBounds, 3> box = {{{1e-3, 3.0}, {1e-12, 1e12}, {1e-3, 3.0}}};
  LevMarOptions lm;
  for (const auto& b : box) {
    lm.lower.push_back(std::log(b.lower));
    lm.upper.push_back(std::log(b.upper));
  }

  std::optional<LevMarResult> best;
  for (std::size_t s = 0; s < 16; ++s) {
    std::mt19937_64 rng(start_seed(seed, s));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> x0(3);
    for (std::size_t j = 0; j < 3; ++j) x0[j] = lm.lower[j] + (lm.upper[j] - lm.lower[j]) * unit(rng);
    auto r = levenberg_marquardt(m, x0, residuals, {}, lm);
    if (r && (!best || r->objective < best->objective)) best = std::move(r);
  }
  if (!best) throw NumericError("tensor-equivalent fit: no feasible start");

  TensorEquivFit out;
  out.params = {std::exp(best->x[0]), std::exp(best->x[1]), std::exp(best->x[2])};
  out.rmse = std::sqrt(best->objective / static_cast<double>(m));
  out.converged = best->converged;
  return out;
}

std::string fit_report_json(const FitResult& r, int indent) {
  nlohmann::ordered_json j;
  j["model"] = r.model;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  j["params"] = params;
  j["free_params"] = r.free_params;
  j["rmse"] = r.rmse;
  j["r2"] = r.r2;
  j["objective"] = r.objective;
  j["loss"] = r.loss;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["best_start"] = r.best_start;
  j["seed"] = r.seed;
  j["start_seeds"] = r.start_seeds;
  j["objective_history"] = r.objective_history;
  j["residuals"] = r.residuals;
  return j.dump(indent);
}

LawConstants constants_from_fit_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open fit report " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("fit report: ") + e.what());
  }
  if (!j.contains("params") || !j["params"].is_object()) {
    throw ParseError("fit report has no 'params' object");
  }
  std::array<double, 8> v{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string key(LawConstants::kNames[i]);
    if (!j["params"].contains(key) || !j["params"][key].is_number()) {
      throw ParseError("fit report lacks constant '" + key + "'");
    }
    v[i] = j["params"][key].get<double>();
  }
  return LawConstants::from_array(v);
}

}  // namespace fpq

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

// curves and implications.

#include <cmath>
#include <iostream>
#include <json.hpp>
#include <memory>

#include "common.hpp"
#include "fpq/csv.hpp"
#include "fpq/errors.hpp"
#include "fpq/implications.hpp"

namespace fpq::cli {

namespace {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

void write_series(const std::vector<Series>& series, const std::string& kind, bool json) {
  if (json) {
    nlohmann::ordered_json j;
    j["kind"] = kind;
    j["series"] = nlohmann::ordered_json::array();
    for (const auto& s : series) {
      nlohmann::ordered_json o;
      o["label"] = s.label;
      o["x"] = s.x;
      o["y"] = s.y;
      j["series"].push_back(o);
    }
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::cout << "series,x,y\n";
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      std::cout << csv_escape(s.label) << ',' << format_double(s.x[i]) << ','
                << format_double(s.y[i]) << '\n';
    }
  }
}

struct CurveArgs {
  ConstantsSource source;
  std::string kind;
  double min = 0.0;
  double max = 0.0;
  int points = 50;
  std::string scale = "log";
  double N = 1e9;
  double D = 1e11;
  std::vector<std::string> fmts = {"E8M7", "E4M3", "E2M1"};
  double log2B = 7.0;
  double k = 6.0 / 16.0;
  std::vector<int> bits = {4, 8, 16};
  std::string output = "csv";
};

std::vector<double> grid(const CurveArgs& a, double lo, double hi) {
  if (a.points < 2) throw ConfigError("a sweep needs at least 2 points");
  if (!(hi > lo)) throw ConfigError("--max must exceed --min");
  if (a.scale == "log" && !(lo > 0.0)) throw ConfigError("log sweeps need --min > 0");
  std::vector<double> g(static_cast<std::size_t>(a.points));
  for (int i = 0; i < a.points; ++i) {
    const double t = static_cast<double>(i) / (a.points - 1);
    g[static_cast<std::size_t>(i)] =
        a.scale == "log" ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                         : lo + t * (hi - lo);
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

// The sampled minimum of a loss-vs-D series must sit next to D_crit when
// D_crit lies inside the sweep.
void check_minimum(const Series& s, double dcrit) {
  if (dcrit <= s.x.front() || dcrit >= s.x.back()) return;
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.y.size(); ++i) {
    if (s.y[i] < s.y[best]) best = i;
  }
  const double lo = s.x[best == 0 ? 0 : best - 1];
  const double hi = s.x[std::min(best + 1, s.x.size() - 1)];
  if (dcrit < lo || dcrit > hi) {
    throw NumericError("series " + s.label + ": sampled minimum at D=" + fmt_num(s.x[best]) +
                       " disagrees with critical data size " + fmt_num(dcrit));
  }
}

int run_curves(const CurveArgs& a) {
  const LawConstants c = a.source.resolve();
  std::vector<Series> out;
  const auto fmts = parse_formats(a.fmts);

  if (a.kind == "loss-vs-D" || a.kind == "loss-vs-N") {
    const bool over_d = a.kind == "loss-vs-D";
    const double lo = a.min > 0 ? a.min : (over_d ? 1e9 : 1e7);
    const double hi = a.max > 0 ? a.max : (over_d ? 1e16 : 1e11);
    const auto xs = grid(a, lo, hi);
    for (const auto& f : fmts) {
      Series s{f.name(), xs, {}};
      for (double x : xs) {
        const double N = over_d ? a.N : x;
        const double D = over_d ? x : a.D;
        s.y.push_back(
            capybara_loss(N, D, f.exponent_bits(), f.mantissa_bits(), a.log2B, c));
      }
      if (over_d && a.scale == "log") {
        if (const auto dc = critical_data_size(a.N, f.exponent_bits(), f.mantissa_bits(), a.log2B, c)) {
          check_minimum(s, *dc);
        }
      }
      out.push_back(std::move(s));
    }
  } else if (a.kind == "popt-vs-C") {
    const auto xs = grid(a, a.min > 0 ? a.min : 1e21, a.max > 0 ? a.max : 1e31);
    Series s{"joint", xs, {}};
    for (double C : xs) s.y.push_back(p_opt_joint({C, a.k, 0.0}, a.log2B, c).P);
    out.push_back(std::move(s));
  } else if (a.kind == "dcrit-table") {
    for (const auto& f : fmts) {
      const auto dc = critical_data_size(a.N, f.exponent_bits(), f.mantissa_bits(), a.log2B, c);
      if (!dc) throw ConfigError("no critical data size at log2B = 0");
      out.push_back({f.name(), {a.N}, {*dc}});
    }
  } else if (a.kind == "layout-table") {
    for (int P : a.bits) {
      const FloatLayout l = optimal_layout_int(P, c);
      out.push_back({"E" + std::to_string(l.E) + "M" + std::to_string(l.M),
                     {static_cast<double>(P)},
                     {optimal_mantissa(P, c)}});
    }
  } else {
    throw ConfigError("unknown curve kind '" + a.kind + "'");
  }
  write_series(out, a.kind, a.output == "json");
  return kOk;
}

// --- implications ---------------------------------------------------------

struct LayoutArgs {
  ConstantsSource source;
  std::vector<int> bits = {4, 8, 16};
  bool csv = false;
};

int run_layout(const LayoutArgs& a) {
  const LawConstants c = a.source.resolve();
  std::vector<std::vector<std::string>> rows;
  for (int P : a.bits) {
    const FloatLayout l = optimal_layout_int(P, c);
    rows.push_back({std::to_string(P), "E" + std::to_string(l.E) + "M" + std::to_string(l.M),
                    format_double(optimal_mantissa(P, c))});
  }
  if (a.csv) {
    std::cout << "P,layout,M_opt\n";
    for (const auto& r : rows) std::cout << r[0] << ',' << r[1] << ',' << r[2] << '\n';
  } else {
    for (auto& r : rows) r[2] = fmt_num(parse_double(r[2], 0, 0), 4);
    print_table(std::cout, {"P", "layout", "M_opt"}, rows);
  }
  return kOk;
}

struct CritArgs {
  ConstantsSource source;
  std::vector<double> N = {1e9};
  std::vector<std::string> fmts = {"E8M7", "E4M3", "E2M1"};
  double log2B = 7.0;
  bool csv = false;
};

int run_crit(const CritArgs& a) {
  const LawConstants c = a.source.resolve();
  const auto fmts = parse_formats(a.fmts);
  if (a.csv) std::cout << "N,format,log2B,D_crit\n";
  std::vector<std::vector<std::string>> rows;
  for (double N : a.N) {
    for (const auto& f : fmts) {
      const auto dc = critical_data_size(N, f.exponent_bits(), f.mantissa_bits(), a.log2B, c);
      if (a.csv) {
        std::cout << format_double(N) << ',' << f.name() << ',' << format_double(a.log2B) << ','
                  << (dc ? format_double(*dc) : std::string()) << '\n';
      } else {
        rows.push_back({fmt_num(N, 4), f.name(), fmt_num(a.log2B, 4),
                        dc ? format_tokens(*dc) : "none (loss falls with D)"});
      }
    }
  }
  if (!a.csv) print_table(std::cout, {"N", "format", "log2B", "D_crit"}, rows);
  return kOk;
}

struct PrecisionArgs {
  ConstantsSource source;
  std::vector<double> budget;
  std::string mode = "joint";
  std::vector<double> N;
  std::vector<double> D;
  double log2B = 7.0;
  double k = 6.0 / 16.0;
  bool check = false;
  bool csv = false;
};

int run_precision(const PrecisionArgs& a) {
  const LawConstants c = a.source.resolve();
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  if (a.mode == "fixed-d") {
    if (a.D.empty()) throw ConfigError("fixed-d needs --D");
    header = {"D", "P_opt"};
    if (a.check) header.push_back("P_numeric");
    for (double D : a.D) {
      std::vector<double> r = {D, p_opt_fixed_d(D, a.log2B, c)};
      if (a.check) {
        const double C = a.budget.empty() ? 1e24 : a.budget.front();
        r.push_back(numeric_p_opt_fixed_d(D, {C, a.k, 0.0}, a.log2B, c));
      }
      rows.push_back(r);
    }
  } else {
    if (a.budget.empty()) throw ConfigError(a.mode + " needs --budget");
    if (a.mode == "fixed-n") {
      if (a.N.empty()) throw ConfigError("fixed-n needs --N");
      header = {"C", "N", "P_opt", "exchange_rate"};
      if (a.check) header.push_back("P_numeric");
      for (double C : a.budget) {
        for (double N : a.N) {
          const double P = p_opt_fixed_n(N, {C, a.k, 0.0}, a.log2B, c);
          std::vector<double> r = {C, N, P, exchange_rate_constant(N, P, c)};
          if (a.check) r.push_back(numeric_p_opt_fixed_n(N, {C, a.k, 0.0}, a.log2B, c));
          rows.push_back(r);
        }
      }
    } else if (a.mode == "joint") {
      header = {"C", "P_opt", "N_opt", "D_opt"};
      if (a.check) header.push_back("P_numeric");
      for (double C : a.budget) {
        const JointOptimum o = p_opt_joint({C, a.k, 0.0}, a.log2B, c);
        std::vector<double> r = {C, o.P, o.N, o.D};
        if (a.check) r.push_back(numeric_p_opt_joint({C, a.k, 0.0}, a.log2B, c).P);
        rows.push_back(r);
      }
    } else {
      throw ConfigError("unknown mode '" + a.mode + "'");
    }
  }

  if (a.csv) {
    for (std::size_t i = 0; i < header.size(); ++i) std::cout << (i ? "," : "") << header[i];
    std::cout << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) std::cout << (i ? "," : "") << format_double(r[i]);
      std::cout << '\n';
    }
  } else {
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows) {
      std::vector<std::string> line;
      for (std::size_t i = 0; i < r.size(); ++i) {
        line.push_back(header[i].rfind('D', 0) == 0 ? format_tokens(r[i]) : fmt_num(r[i], 5));
      }
      cells.push_back(line);
    }
    print_table(std::cout, header, cells);
  }
  return kOk;
}

}  // namespace

Runner add_curves(CLI::App& app) {
  auto a = std::make_shared<CurveArgs>();
  auto* sub = app.add_subcommand("curves", "Emit plot-ready data series");
  a->source.add_options(sub);
  sub->add_option("--kind", a->kind, "Series kind")
      ->required()
      ->check(CLI::IsMember({"loss-vs-D", "loss-vs-N", "popt-vs-C", "dcrit-table", "layout-table"}));
  sub->add_option("--min", a->min, "Sweep start");
  sub->add_option("--max", a->max, "Sweep end");
  sub->add_option("--points", a->points, "Sweep points (>= 2)");
  sub->add_option("--scale", a->scale, "Sweep spacing")->check(CLI::IsMember({"log", "linear"}));
  sub->add_option("--N", a->N, "Parameters (loss-vs-D, dcrit-table)")->check(CLI::PositiveNumber);
  sub->add_option("--D", a->D, "Tokens (loss-vs-N)")->check(CLI::PositiveNumber);
  sub->add_option("--fmt", a->fmts, "Formats, e.g. E4M3,E2M1")->delimiter(',');
  sub->add_option("--log2b", a->log2B, "log2 of the block size")->check(CLI::NonNegativeNumber);
  sub->add_option("--k", a->k, "Compute constant in C = k P N D")->check(CLI::PositiveNumber);
  sub->add_option("--bits", a->bits, "Total bits (layout-table)")->delimiter(',');
  sub->add_option("--output", a->output, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  return [a] { return run_curves(*a); };
}

Runner add_implications(CLI::App& app) {
  auto* sub = app.add_subcommand("implications", "Closed-form optima of the unified law");
  sub->require_subcommand(1);

  auto layout = std::make_shared<LayoutArgs>();
  auto* l = sub->add_subcommand("optimal-layout", "Best ExMy split for P total bits");
  layout->source.add_options(l);
  l->add_option("--bits", layout->bits, "Total bits, sign included")->delimiter(',');
  l->add_flag("--csv", layout->csv, "CSV instead of a table");

  auto crit = std::make_shared<CritArgs>();
  auto* d = sub->add_subcommand("critical-data", "Token count beyond which loss rises");
  crit->source.add_options(d);
  d->add_option("--n,--N", crit->N, "Parameters")->delimiter(',');
  d->add_option("--fmt", crit->fmts, "Formats")->delimiter(',');
  d->add_option("--log2b", crit->log2B, "log2 of the block size")->check(CLI::NonNegativeNumber);
  d->add_flag("--csv", crit->csv, "CSV instead of a table");

  auto prec = std::make_shared<PrecisionArgs>();
  auto* p = sub->add_subcommand("optimal-precision", "Cost-optimal precision under a budget");
  prec->source.add_options(p);
  p->add_option("--budget", prec->budget, "Compute budgets C in FLOPs")->delimiter(',');
  p->add_option("--mode", prec->mode, "fixed-d, fixed-n or joint")
      ->check(CLI::IsMember({"fixed-d", "fixed-n", "joint"}));
  p->add_option("--N", prec->N, "Model sizes (fixed-n)")->delimiter(',');
  p->add_option("--D", prec->D, "Token counts (fixed-d)")->delimiter(',');
  p->add_option("--log2b", prec->log2B, "log2 of the block size")->check(CLI::PositiveNumber);
  p->add_option("--k", prec->k, "Compute constant in C = k P N D")->check(CLI::PositiveNumber);
  p->add_flag("--check", prec->check, "Also report the numeric-minimization answer");
  p->add_flag("--csv", prec->csv, "CSV instead of a table");

  return [=] {
    if (l->parsed()) return run_layout(*layout);
    if (d->parsed()) return run_crit(*crit);
    return run_precision(*prec);
  };
}

}  // namespace fpq::cli

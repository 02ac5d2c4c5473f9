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

// Acceptance suite: one [PASS]/[FAIL] line per criterion. Tolerances and
// time limits are pinned below. Exit status is non-zero if any line fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fpq/blockquant.hpp"
#include "fpq/fitter.hpp"
#include "fpq/fpformat.hpp"
#include "fpq/implications.hpp"
#include "fpq/lawmodels.hpp"
#include "fpq/qlinear.hpp"
#include "fpq/toy_training.hpp"
#include "support.hpp"

namespace {

using namespace fpq;
using fpq::testing::rel_err;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// --- limits --------------------------------------------------------------

constexpr double kDcritTolE8M7 = 0.03;
constexpr double kDcritTolE4M3 = 0.05;
constexpr double kDcritTolE2M1 = 0.15;
constexpr double kDcritSeconds = 1e-3;
constexpr double kLayoutSeconds = 1e-3;
constexpr double kPoptLow = 3.5;
constexpr double kPoptHigh = 8.5;
constexpr double kPoptOracleTol = 0.02;
constexpr double kPoptSeconds = 10.0;
constexpr std::size_t kOracleSamples = 100000;
constexpr double kOracleSeconds = 30.0;
constexpr std::size_t kUlpSamples = 10000;
constexpr double kUlpLimit = 4.0;
constexpr double kNoiselessTol = 0.01;
constexpr double kNoiseSigma = 0.002;
constexpr double kExponentTol = 0.10;
constexpr double kFitSeconds = 300.0;
constexpr double kCompareSeconds = 300.0;
constexpr double kGradTol = 1e-4;
constexpr int kToySeeds = 10;
constexpr int kToyRequired = 7;
constexpr double kToySeconds = 600.0;

// 1 -----------------------------------------------------------------------

Outcome critical_data() {
  const LawConstants c = LawConstants::capybara_paper();
  struct Case {
    int E, M;
    double want, tol;
  };
  const Case cases[] = {{8, 7, 1730e12, kDcritTolE8M7},
                        {4, 3, 27e12, kDcritTolE4M3},
                        {2, 1, 0.4e12, kDcritTolE2M1}};
  Outcome o{true, ""};
  std::ostringstream d;
  for (const auto& k : cases) {
    const auto t0 = Clock::now();
    const auto got = critical_data_size(1e9, k.E, k.M, 7.0, c);
    const double dt = seconds_since(t0);
    const bool ok = got && rel_err(*got, k.want) <= k.tol && dt < kDcritSeconds;
    o.pass = o.pass && ok;
    d << "E" << k.E << "M" << k.M << "=" << (got ? *got / 1e12 : -1) << "T ";
  }
  o.detail = d.str();
  return o;
}

// 2 -----------------------------------------------------------------------

Outcome optimal_layout() {
  const LawConstants c = LawConstants::capybara_paper();
  const auto t0 = Clock::now();
  const FloatLayout l4 = optimal_layout_int(4, c);
  const FloatLayout l8 = optimal_layout_int(8, c);
  const FloatLayout l16 = optimal_layout_int(16, c);
  const double dt = seconds_since(t0);
  const bool ok = l4.E == 2 && l4.M == 1 && l8.E == 4 && l8.M == 3 && l16.E == 8 && l16.M == 7;
  char buf[160];
  std::snprintf(buf, sizeof buf, "P4=E%dM%d P8=E%dM%d P16=E%dM%d in %.1f us", l4.E, l4.M, l8.E,
                l8.M, l16.E, l16.M, dt * 1e6);
  return {ok && dt < kLayoutSeconds, buf};
}

// 3 -----------------------------------------------------------------------

Outcome compute_optimal_precision() {
  const LawConstants c = LawConstants::capybara_paper();
  const auto t0 = Clock::now();
  bool ok = true;
  double prev = 0.0;
  double lo = 1e9;
  double hi = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double C = std::pow(10.0, 21.0 + 10.0 * i / 100.0);
    const double P = p_opt_joint({C, 6.0 / 16.0, 0.0}, 7.0, c).P;
    ok = ok && P > prev && P >= kPoptLow && P <= kPoptHigh;
    prev = P;
    lo = std::min(lo, P);
    hi = std::max(hi, P);
  }
  double worst = 0.0;
  for (double C : {1e22, 1e26, 1e30}) {
    const double closed = p_opt_joint({C, 6.0 / 16.0, 0.0}, 7.0, c).P;
    const double numeric = numeric_p_opt_joint({C, 6.0 / 16.0, 0.0}, 7.0, c).P;
    worst = std::max(worst, rel_err(closed, numeric));
  }
  const double dt = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof buf, "P_opt in [%.3f, %.3f], monotone=%s, oracle rel err %.2e, %.2f s",
                lo, hi, ok ? "yes" : "no", worst, dt);
  return {ok && worst <= kPoptOracleTol && dt < kPoptSeconds, buf};
}

// 4 -----------------------------------------------------------------------

Outcome quantizer_oracle() {
  const auto t0 = Clock::now();
  std::size_t formats = 0;
  std::size_t mismatches = 0;
  for (int E = 1; E <= 9; ++E) {
    for (int M = 0; 1 + E + M <= 10; ++M) {
      ++formats;
      const FpFormat fmt(E, M);
      const fpq::testing::ReferenceFormat ref(E, M);
      const auto& mags = ref.magnitudes();
      std::mt19937_64 rng(1000 + 31 * E + M);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::uniform_int_distribution<std::size_t> pick(0, mags.size() - 2);
      const double lo = std::log(static_cast<double>(mags[1]) / 8.0);
      const double hi = std::log(static_cast<double>(ref.max()) * 4.0);
      for (std::size_t i = 0; i < kOracleSamples; ++i) {
        double x;
        switch (i % 4) {
          case 0:  // exact midpoint between neighbours
          {
            const std::size_t k = pick(rng);
            x = static_cast<double>((mags[k] + mags[k + 1]) / 2.0L);
            break;
          }
          case 1:  // representable value
            x = static_cast<double>(mags[pick(rng) + 1]);
            break;
          default:  // log-uniform magnitude
            x = std::exp(lo + (hi - lo) * u(rng));
        }
        if (u(rng) < 0.5) x = -x;
        const double got = quantize_scalar(x, fmt);
        const double want = ref.nearest(x);
        if (got != want || std::signbit(got) != std::signbit(want)) ++mismatches;
      }
    }
  }
  const auto e43 = enumerate_values(FpFormat(4, 3));
  const auto e21 = enumerate_values(FpFormat(2, 1));
  const bool maxima = e43.back() == 480.0 && e21.back() == 6.0 && fp_max(FpFormat(4, 3)) == 480.0 &&
                      fp_max(FpFormat(2, 1)) == 6.0;
  const double dt = seconds_since(t0);
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu formats x %zu inputs, %zu mismatches, max E4M3=%g E2M1=%g, %.2f s",
                formats, kOracleSamples, mismatches, e43.back(), e21.back(), dt);
  return {formats == 45 && mismatches == 0 && maxima && dt < kOracleSeconds, buf};
}

// 5 -----------------------------------------------------------------------

Outcome block_scaling() {
  const FpFormat e2m1(2, 1);
  const Tensor2D small(1, 3, std::vector<double>{1.0, 2.0, 4.0});
  const auto q = quantize_dequantize(small, e2m1, ScalingStrategy::block(3));
  const bool exact = q.dequantized == small;

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mant(0.5, 1.0);
  std::uniform_int_distribution<int> expo(-30, 30);
  Tensor2D t(100, kUlpSamples / 100);
  for (double& v : t.values()) v = std::ldexp(mant(rng), expo(rng)) * (mant(rng) < 0.75 ? -1 : 1);
  double worst_ulps = 0.0;
  for (const char* f : {"E4M3", "E2M1", "E5M2", "E1M0"}) {
    const auto r = quantize_dequantize(t, FpFormat::parse(f), ScalingStrategy::block(1));
    for (std::size_t i = 0; i < t.values().size(); ++i) {
      const double x = t.values()[i];
      const double ulp = std::nextafter(std::fabs(x), INFINITY) - std::fabs(x);
      worst_ulps = std::max(worst_ulps, std::fabs(r.dequantized.values()[i] - x) / ulp);
    }
  }

  const LawConstants c = LawConstants::capybara_paper();
  bool reduces = true;
  for (double N : {4.1e7, 1e9, 7e10}) {
    for (double D : {1e10, 1e12}) {
      for (double E : {1.0, 4.0}) {
        for (double M : {0.0, 3.0}) {
          reduces = reduces && rho(N, D, E, M, 0.0, c) == 0.0 &&
                    capybara_loss(N, D, E, M, 0.0, c) == chinchilla_loss(N, D, c);
        }
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "E2M1 {1,2,4} exact=%s, B=1 worst %.2f ulp, log2B=0 reduces=%s",
                exact ? "yes" : "no", worst_ulps, reduces ? "yes" : "no");
  return {exact && worst_ulps <= kUlpLimit && reduces, buf};
}

// 6 -----------------------------------------------------------------------

Outcome fit_recovery() {
  const auto t0 = Clock::now();
  const LawConstants truth = LawConstants::capybara_paper();
  const fpq::testing::Grid grid;

  FitProblem clean;
  clean.model = ModelId::capybara;
  clean.dataset = fpq::testing::synthetic_runs(truth, grid, 0.0, 0);
  clean.seed = 1;
  const FitResult r = fit(clean);
  double worst = 0.0;
  const auto want = truth.as_array();
  const auto got = r.constants().as_array();
  for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, rel_err(got[i], want[i]));

  // Held-out points sit between the training grid values.
  fpq::testing::Grid held;
  held.N = {6e7, 3e8};
  held.D = {1.5e10, 7e10};
  held.E = {3, 5};
  held.M = {2, 5};
  held.log2B = {5, 8};

  bool noisy_ok = true;
  double worst_exp = 0.0;
  double worst_rmse = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    FitProblem p = clean;
    p.dataset = fpq::testing::synthetic_runs(truth, grid, kNoiseSigma, seed);
    p.seed = seed;
    const FitResult n = fit(p);
    const double ea = rel_err(n.param("alpha"), truth.alpha);
    const double eb = rel_err(n.param("beta"), truth.beta);
    const auto test = fpq::testing::synthetic_runs(truth, held, kNoiseSigma, 100 + seed);
    const auto pred = predict(ModelId::capybara, n.params, test);
    double sq = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) sq += (pred[i] - test[i].loss) * (pred[i] - test[i].loss);
    const double rmse = std::sqrt(sq / static_cast<double>(test.size()));
    worst_exp = std::max({worst_exp, ea, eb});
    worst_rmse = std::max(worst_rmse, rmse);
    noisy_ok = noisy_ok && ea <= kExponentTol && eb <= kExponentTol && rmse <= 2.0 * kNoiseSigma;
  }
  const double dt = seconds_since(t0);
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "noiseless worst rel err %.2e; noisy worst alpha/beta err %.3f, held-out RMSE %.4f "
                "(limit %.4f); %.1f s",
                worst, worst_exp, worst_rmse, 2.0 * kNoiseSigma, dt);
  return {worst <= kNoiselessTol && noisy_ok && dt < kFitSeconds, buf};
}

// 7 -----------------------------------------------------------------------

Outcome model_comparison() {
  const auto t0 = Clock::now();
  const LawConstants truth = LawConstants::capybara_paper();

  fpq::testing::Grid low;
  low.E = {1, 2, 4};
  low.M = {0, 1, 3};
  low.log2B = {4, 7, 9};
  const auto quant = fpq::testing::synthetic_runs(truth, low, 0.0, 0);
  const auto ranked_q = compare_models(quant, {ModelId::kumar, ModelId::capybara}, {16, 7});

  fpq::testing::Grid hp;
  hp.N = {4.1e7, 8.5e7, 1.54e8, 3e8, 6.79e8};
  hp.D = {1e10, 2e10, 5e10, 1e11, 2e11};
  hp.E = {8};
  hp.M = {7};
  hp.log2B = {0};
  const auto classical = fpq::testing::synthetic_runs(truth, hp, 0.0, 0);
  const auto ranked_c = compare_models(classical, {ModelId::openai, ModelId::chinchilla}, {16, 7});
  const double dt = seconds_since(t0);

  const bool ok = ranked_q.front().model == "capybara" && ranked_c.front().model == "chinchilla";
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "low-precision: %s %.2e < %s %.2e; classical: %s %.2e < %s %.2e; %.1f s",
                ranked_q[0].model.c_str(), ranked_q[0].heldout_rmse, ranked_q[1].model.c_str(),
                ranked_q[1].heldout_rmse, ranked_c[0].model.c_str(), ranked_c[0].heldout_rmse,
                ranked_c[1].model.c_str(), ranked_c[1].heldout_rmse, dt);
  return {ok && dt < kCompareSeconds, buf};
}

// 8 -----------------------------------------------------------------------

bool operand_oracle() {
  std::mt19937_64 rng(8);
  const Tensor2D X = fpq::testing::random_tensor(32, 64, rng);
  const Tensor2D W = fpq::testing::random_tensor(48, 64, rng);
  const Tensor2D dY = fpq::testing::random_tensor(32, 48, rng);
  QLinearConfig cfg;
  cfg.fmt = FpFormat(2, 1);
  cfg.strat = ScalingStrategy::block(16);
  const double fpmax = fp_max(cfg.fmt);
  const auto q = [&](double v) { return quantize_scalar(v, cfg.fmt); };
  const auto Q = [&](const Tensor2D& t, Target target) {
    return cfg.targets.contains(target) ? fpq::testing::reference_block_quantize(t, 16, fpmax, q) : t;
  };
  bool ok = true;
  for (const TargetSet& targets :
       {TargetSet::all(), TargetSet::defaults(), TargetSet{Target::P4}, TargetSet::none()}) {
    cfg.targets = targets;
    const Tensor2D Y = qlinear_forward(X, W, cfg);
    const LinearGrads g = qlinear_backward(dY, X, W, cfg);
    ok = ok && Y == fpq::testing::reference_gemm_nt(Q(X, Target::P1), Q(W, Target::P2));
    ok = ok && g.dX == fpq::testing::reference_gemm_nt(Q(dY, Target::P3),
                                                       Q(W.transposed(), Target::P4));
    ok = ok && g.dW == fpq::testing::reference_gemm_nt(Q(dY.transposed(), Target::P5),
                                                       Q(X.transposed(), Target::P6));
  }
  return ok;
}

double gradient_check() {
  std::mt19937_64 rng(9);
  ToyNetwork net({8, 16, 12, 6}, rng);
  const Tensor2D X = fpq::testing::random_tensor(10, 8, rng);
  const Tensor2D T = fpq::testing::random_tensor(10, 6, rng, 0.5);
  QLinearConfig cfg;
  cfg.targets = TargetSet::none();
  std::vector<Tensor2D> grads;
  net.loss_and_grad(X, T, cfg, &grads);
  double worst = 0.0;
  for (std::size_t l = 0; l < net.weights().size(); ++l) {
    auto w = net.weights()[l].values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double keep = w[i];
      const double h = 1e-6;
      w[i] = keep + h;
      const double up = net.loss_and_grad(X, T, cfg, nullptr);
      w[i] = keep - h;
      const double down = net.loss_and_grad(X, T, cfg, nullptr);
      w[i] = keep;
      const double fd = (up - down) / (2 * h);
      const double an = grads[l].values()[i];
      worst = std::max(worst, std::fabs(fd - an) / std::max(std::fabs(fd), 1e-3));
    }
  }
  return worst;
}

// A diverged quantized run is the worst possible outcome.
double effective_gap(const ToyTrainingResult& r) {
  if (r.baseline.diverged()) return std::numeric_limits<double>::quiet_NaN();
  if (r.quantized.diverged()) return std::numeric_limits<double>::infinity();
  return r.gap;
}

// Ordering a <= b holds when both are defined and not both infinite.
bool ordered(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return false;
  if (std::isinf(a) && std::isinf(b)) return false;
  return a <= b;
}

Outcome qlinear_properties() {
  const auto t0 = Clock::now();
  const bool oracle = operand_oracle();
  const double grad_err = gradient_check();

  int format_order = 0;
  int target_order = 0;
  for (int seed = 0; seed < kToySeeds; ++seed) {
    ToyTrainingOptions opts;
    opts.seed = static_cast<std::uint64_t>(seed);
    QLinearConfig cfg;
    cfg.strat = ScalingStrategy::block(32);

    cfg.fmt = FpFormat(8, 7);
    const double g87 = effective_gap(run_toy_training(opts, cfg));
    cfg.fmt = FpFormat(1, 1);
    const double g11 = effective_gap(run_toy_training(opts, cfg));
    cfg.targets = TargetSet::all();
    const double g11_all = effective_gap(run_toy_training(opts, cfg));
    format_order += ordered(g87, g11);
    target_order += ordered(g11, g11_all);
  }
  const double dt = seconds_since(t0);
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "oracle exact=%s, grad rel err %.1e, gap(E8M7)<=gap(E1M1) %d/%d, "
                "gap(all)>=gap(P2,P4,P6) %d/%d, %.1f s",
                oracle ? "yes" : "no", grad_err, format_order, kToySeeds, target_order, kToySeeds, dt);
  return {oracle && grad_err <= kGradTol && format_order >= kToyRequired &&
              target_order >= kToyRequired && dt < kToySeconds,
          buf};
}

}  // namespace

int main() {
  struct Row {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Row> rows = {
      {1, "critical data size at N=1e9, log2B=7", critical_data},
      {2, "optimal integer layouts for 4/8/16 bits", optimal_layout},
      {3, "compute-optimal precision over C in [1e21, 1e31]", compute_optimal_precision},
      {4, "quantizer vs brute-force nearest, all formats of width <= 10", quantizer_oracle},
      {5, "block-scaling contracts", block_scaling},
      {6, "fit recovery on synthetic data", fit_recovery},
      {7, "model comparison by held-out RMSE", model_comparison},
      {8, "quantized linear layer properties", qlinear_properties},
  };

  bool all = true;
  for (const auto& row : rows) {
    Outcome o;
    try {
      o = row.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", row.id, row.name, o.detail.c_str());
    std::fflush(stdout);
  }
  // Criterion 9 is a scope statement: the LLM-scale runs are not
  // reproduced here; criteria 1-8 stand in for them and must all hold.
  std::printf("[%s] 9 LLM-scale results not reproduced at desk scale; covered by substitutes "
              "1-8: %s\n",
              all ? "PASS" : "FAIL", all ? "all substitutes pass" : "a substitute failed");
  return all ? 0 : 1;
}

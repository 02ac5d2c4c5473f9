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

#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>
#include <cstring>
#include <random>

#include "fpq/errors.hpp"
#include "fpq/qlinear.hpp"
#include "fpq/toy_training.hpp"
#include "support.hpp"

namespace fpq {
namespace {

using testing::random_tensor;
using testing::reference_gemm_nt;

// Operand oracle: the library's block quantizer on the operand laid out
// with its contraction dimension last, or the operand itself.
Tensor2D oracle_operand(const Tensor2D& op, bool on, const QLinearConfig& cfg) {
  return on ? quantize_dequantize(op, cfg.fmt, cfg.strat, Exec::serial).dequantized : op;
}

QLinearConfig config(TargetSet targets, std::size_t block = 8) {
  QLinearConfig cfg;
  cfg.fmt = FpFormat(2, 1);
  cfg.strat = ScalingStrategy::block(block);
  cfg.targets = targets;
  return cfg;
}

TEST(TargetSet, ParseAndPrint) {
  EXPECT_EQ(TargetSet::parse("P2,P4,P6"), TargetSet::defaults());
  EXPECT_EQ(TargetSet::parse(" p6 , P2,P4"), TargetSet::defaults());
  EXPECT_EQ(TargetSet::parse("all"), TargetSet::all());
  EXPECT_EQ(TargetSet::parse("none"), TargetSet::none());
  EXPECT_EQ(TargetSet::parse(""), TargetSet::none());
  EXPECT_EQ(TargetSet::defaults().to_string(), "P2,P4,P6");
  EXPECT_THROW(TargetSet::parse("P7"), InvalidInput);
  EXPECT_THROW(TargetSet::parse("P2,,P4"), InvalidInput);
  EXPECT_TRUE(QLinearConfig{}.targets == TargetSet::defaults());
}

TEST(QLinear, NoTargetsIsExactMatmul) {
  std::mt19937_64 rng(21);
  const Tensor2D X = random_tensor(16, 24, rng);
  const Tensor2D W = random_tensor(8, 24, rng);
  const Tensor2D dY = random_tensor(16, 8, rng);
  const auto cfg = config(TargetSet::none());
  EXPECT_EQ(qlinear_forward(X, W, cfg), reference_gemm_nt(X, W));
  const auto g = qlinear_backward(dY, X, W, cfg);
  EXPECT_EQ(g.dX, reference_gemm_nt(dY, W.transposed()));
  EXPECT_EQ(g.dW, reference_gemm_nt(dY.transposed(), X.transposed()));
}

TEST(QLinear, EveryTargetSubsetMatchesOperandOracle) {
  omp_set_num_threads(3);
  std::mt19937_64 rng(22);
  const Tensor2D X = random_tensor(16, 24, rng);
  const Tensor2D W = random_tensor(8, 24, rng, 0.3);
  const Tensor2D dY = random_tensor(16, 8, rng, 1e-3);
  for (unsigned mask = 0; mask < 64; ++mask) {
    TargetSet ts;
    for (int p = 0; p < 6; ++p)
      if (mask & (1u << p)) ts.insert(static_cast<Target>(p));
    const auto cfg = config(ts);
    auto on = [&](Target t) { return ts.contains(t); };

    const Tensor2D Y = qlinear_forward(X, W, cfg);
    EXPECT_EQ(Y, reference_gemm_nt(oracle_operand(X, on(Target::P1), cfg),
                                   oracle_operand(W, on(Target::P2), cfg)))
        << ts.to_string();

    const auto g = qlinear_backward(dY, X, W, cfg);
    EXPECT_EQ(g.dX, reference_gemm_nt(oracle_operand(dY, on(Target::P3), cfg),
                                      oracle_operand(W.transposed(), on(Target::P4), cfg)))
        << ts.to_string();
    EXPECT_EQ(g.dW, reference_gemm_nt(oracle_operand(dY.transposed(), on(Target::P5), cfg),
                                      oracle_operand(X.transposed(), on(Target::P6), cfg)))
        << ts.to_string();
  }
}

TEST(QLinear, WeightOnlyBackwardLeavesWeightGradientAlone) {
  std::mt19937_64 rng(23);
  const Tensor2D X = random_tensor(16, 24, rng);
  const Tensor2D W = random_tensor(8, 24, rng);
  const Tensor2D dY = random_tensor(16, 8, rng);
  const auto exact = qlinear_backward(dY, X, W, config(TargetSet::none()));
  const auto g = qlinear_backward(dY, X, W, config({Target::P4}));
  EXPECT_EQ(g.dW, exact.dW);
  EXPECT_NE(g.dX, exact.dX);
}

TEST(QLinear, ZeroUpstreamGradientGivesZeroGradients) {
  std::mt19937_64 rng(24);
  const Tensor2D X = random_tensor(16, 24, rng);
  const Tensor2D W = random_tensor(8, 24, rng);
  const auto g = qlinear_backward(Tensor2D(16, 8), X, W, config(TargetSet::all()));
  EXPECT_EQ(g.dX, Tensor2D(16, 24));
  EXPECT_EQ(g.dW, Tensor2D(8, 24));
}

TEST(QLinear, OneHotRowSelectsWeightRow) {
  std::mt19937_64 rng(25);
  const Tensor2D W = random_tensor(8, 16, rng);
  Tensor2D X(8, 16);
  for (std::size_t i = 0; i < 8; ++i) X(i, 2 * i) = 1.0;
  const auto cfg = config({Target::P2}, 16);
  const Tensor2D Y = qlinear_forward(X, W, cfg);
  const Tensor2D Wq = oracle_operand(W, true, cfg);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t o = 0; o < 8; ++o) EXPECT_EQ(Y(i, o), Wq(o, 2 * i));
}

TEST(QLinear, ShapeErrors) {
  const auto cfg = config(TargetSet::none());
  EXPECT_THROW(qlinear_forward(Tensor2D(4, 8), Tensor2D(3, 7), cfg), ShapeError);
  EXPECT_THROW(qlinear_backward(Tensor2D(4, 2), Tensor2D(4, 8), Tensor2D(3, 8), cfg), ShapeError);
  EXPECT_THROW(qlinear_backward(Tensor2D(5, 3), Tensor2D(4, 8), Tensor2D(3, 8), cfg), ShapeError);
}

TEST(Bf16, RoundsToEightSignificantBits) {
  // bfloat16 keeps the top 16 bits of a float32; built here from the bit pattern.
  auto via_bits = [](double x) {
    const float f = static_cast<float>(x);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    const std::uint32_t lsb = (u >> 16) & 1u;
    u = (u + 0x7FFFu + lsb) & 0xFFFF0000u;
    float r;
    std::memcpy(&r, &u, 4);
    return static_cast<double>(r);
  };
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> m(-1.0, 1.0);
  std::uniform_int_distribution<int> e(-60, 60);
  for (int i = 0; i < 20000; ++i) {
    // float32-exact inputs so the float cast in the oracle does not round twice
    const double x = static_cast<float>(std::ldexp(m(rng), e(rng)));
    ASSERT_EQ(round_to_bf16(x), via_bits(x)) << x;
  }
  EXPECT_EQ(round_to_bf16(1.0 + std::ldexp(1.0, -8)), 1.0);  // tie to even
  EXPECT_EQ(round_to_bf16(1.0 + 3 * std::ldexp(1.0, -8)), 1.0 + std::ldexp(1.0, -6));
  EXPECT_EQ(round_to_bf16(0.0), 0.0);
}

TEST(QLinear, Bf16OutputCastAppliesToEveryGemm) {
  std::mt19937_64 rng(27);
  const Tensor2D X = random_tensor(8, 16, rng);
  const Tensor2D W = random_tensor(4, 16, rng);
  auto cfg = config(TargetSet::none());
  cfg.bf16_output = true;
  const Tensor2D Y = qlinear_forward(X, W, cfg);
  const Tensor2D ref = reference_gemm_nt(X, W);
  for (std::size_t i = 0; i < Y.size(); ++i)
    EXPECT_EQ(Y.values()[i], round_to_bf16(ref.values()[i]));
}

TEST(ToyTraining, BaselineGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(28);
  const ToyNetwork net({6, 10, 5}, rng);
  const Tensor2D X = random_tensor(12, 6, rng);
  const Tensor2D T = random_tensor(12, 5, rng, 0.5);
  const auto cfg = config(TargetSet::none());
  std::vector<Tensor2D> grads;
  net.loss_and_grad(X, T, cfg, &grads);
  ASSERT_EQ(grads.size(), 2u);
  for (std::size_t l = 0; l < 2; ++l) {
    for (std::size_t i = 0; i < grads[l].size(); ++i) {
      ToyNetwork plus = net, minus = net;
      const double h = 1e-6;
      plus.weights()[l].values()[i] += h;
      minus.weights()[l].values()[i] -= h;
      const double fd =
          (plus.loss_and_grad(X, T, cfg, nullptr) - minus.loss_and_grad(X, T, cfg, nullptr)) /
          (2 * h);
      const double g = grads[l].values()[i];
      EXPECT_LE(std::fabs(g - fd), 1e-4 * std::max(std::fabs(fd), 1e-3)) << l << ',' << i;
    }
  }
}

TEST(ToyTraining, EmptyTargetsGiveZeroGapBitwise) {
  ToyTrainingOptions opts;
  opts.widths = {8, 16, 8};
  opts.steps = 40;
  opts.batch = 8;
  opts.eval_examples = 32;
  const auto r = run_toy_training(opts, config(TargetSet::none()));
  EXPECT_EQ(r.gap, 0.0);
  EXPECT_EQ(r.quantized.losses, r.baseline.losses);
}

TEST(ToyTraining, DeterministicGivenSeed) {
  omp_set_num_threads(2);
  ToyTrainingOptions opts;
  opts.widths = {8, 16, 8};
  opts.steps = 40;
  opts.batch = 8;
  opts.eval_examples = 32;
  opts.seed = 5;
  const auto cfg = config(TargetSet::defaults());
  const auto a = run_toy_training(opts, cfg);
  const auto b = run_toy_training(opts, cfg);
  EXPECT_EQ(a.quantized.losses, b.quantized.losses);
  EXPECT_EQ(a.baseline.losses, b.baseline.losses);
  EXPECT_EQ(a.gap, b.gap);
  opts.seed = 6;
  EXPECT_NE(run_toy_training(opts, cfg).quantized.losses, a.quantized.losses);
}

TEST(ToyTraining, LearningRateSchedule) {
  AdamWOptions o;
  o.lr = 1.0;
  EXPECT_GT(o.learning_rate(0, 100), 0.0);
  EXPECT_LE(o.learning_rate(0, 100), 0.1 + 1e-15);
  EXPECT_NEAR(o.learning_rate(10, 100), 1.0, 1e-12);
  EXPECT_NEAR(o.learning_rate(100, 100), 0.0, 1e-12);
  for (std::size_t s = 10; s < 100; ++s) EXPECT_GE(o.learning_rate(s, 100), o.learning_rate(s + 1, 100));
}

}  // namespace
}  // namespace fpq

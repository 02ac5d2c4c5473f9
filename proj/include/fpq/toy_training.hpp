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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "fpq/qlinear.hpp"
#include "fpq/tensor.hpp"

namespace fpq {

/// AdamW with gradient-norm clipping, linear warmup and cosine decay.
/// Defaults follow the LLM recipe (betas 0.9/0.95, eps 1e-8, weight decay
/// 0.1, clip 1.0, decay to 0); the peak rate is raised for toy-sized models.
struct AdamWOptions {
  double lr = 1e-2;
  double min_lr = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double weight_decay = 0.1;
  double clip_norm = 1.0;
  /// Warmup length as a fraction of the run.
  double warmup_fraction = 0.1;

  double learning_rate(std::size_t step, std::size_t total_steps) const;
};

/// Bias-free tanh MLP whose linear layers run through the quantized GEMMs.
class ToyNetwork {
 public:
  /// widths = {d_in, hidden..., d_out}; weights ~ N(0, 1/fan_in).
  ToyNetwork(const std::vector<std::size_t>& widths, std::mt19937_64& rng);

  const std::vector<std::size_t>& widths() const { return widths_; }
  std::vector<Tensor2D>& weights() { return weights_; }
  const std::vector<Tensor2D>& weights() const { return weights_; }

  Tensor2D forward(const Tensor2D& X, const QLinearConfig& cfg) const;

  /// Mean squared error against `target` and its gradient per weight matrix.
  double loss_and_grad(const Tensor2D& X, const Tensor2D& target, const QLinearConfig& cfg,
                       std::vector<Tensor2D>* grads) const;

 private:
  std::vector<std::size_t> widths_;
  std::vector<Tensor2D> weights_;
};

double mse_loss(const Tensor2D& prediction, const Tensor2D& target);

struct ToyTrainingOptions {
  std::uint64_t seed = 0;
  std::vector<std::size_t> widths = {32, 64, 64, 32};
  std::size_t steps = 400;
  std::size_t batch = 32;
  std::size_t eval_examples = 256;
  AdamWOptions optimizer;
};

struct ToyRun {
  std::vector<double> losses;  // training loss per step
  double final_loss = 0.0;     // held-out loss under the run's own forward config
  std::optional<std::size_t> diverged_at;

  bool diverged() const { return diverged_at.has_value(); }
};

struct ToyTrainingResult {
  ToyRun quantized;
  ToyRun baseline;
  /// quantized.final_loss - baseline.final_loss; NaN if either run diverged.
  double gap = 0.0;
};

/// Trains a student MLP to imitate a fixed random teacher, once with `cfg`
/// and once with no quantization targets. Both runs share the
/// initialization and the exact batch sequence, so an empty target set
/// yields bitwise-identical runs.
ToyTrainingResult run_toy_training(const ToyTrainingOptions& opts, const QLinearConfig& cfg);

}  // namespace fpq

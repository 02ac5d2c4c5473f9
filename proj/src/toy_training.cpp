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

#include "fpq/toy_training.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fpq/errors.hpp"

namespace fpq {

double AdamWOptions::learning_rate(std::size_t step, std::size_t total_steps) const {
  const auto warmup = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(warmup_fraction * static_cast<double>(total_steps))));
  if (step < warmup) return lr * static_cast<double>(step + 1) / static_cast<double>(warmup);
  const double span = static_cast<double>(std::max<std::size_t>(1, total_steps - warmup));
  const double progress = std::min(1.0, static_cast<double>(step - warmup) / span);
  return min_lr + 0.5 * (lr - min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

namespace {

Tensor2D gaussian(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor2D t(rows, cols);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

}  // namespace

ToyNetwork::ToyNetwork(const std::vector<std::size_t>& widths, std::mt19937_64& rng)
    : widths_(widths) {
  if (widths.size() < 2) throw ConfigError("toy network needs at least an input and output width");
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const double fan_in = static_cast<double>(widths[l]);
    weights_.push_back(gaussian(widths[l + 1], widths[l], 1.0 / std::sqrt(fan_in), rng));
  }
}

Tensor2D ToyNetwork::forward(const Tensor2D& X, const QLinearConfig& cfg) const {
  Tensor2D h = X;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = qlinear_forward(h, weights_[l], cfg);
    if (l + 1 < weights_.size()) {
      for (double& v : h.values()) v = std::tanh(v);
    }
  }
  return h;
}

double mse_loss(const Tensor2D& prediction, const Tensor2D& target) {
  if (!prediction.same_shape(target)) throw ShapeError("mse_loss: shape mismatch");
  double sum = 0.0;
  const auto p = prediction.values();
  const auto t = target.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double e = p[i] - t[i];
    sum += e * e;
  }
  return sum / static_cast<double>(p.size());
}

double ToyNetwork::loss_and_grad(const Tensor2D& X, const Tensor2D& target,
                                 const QLinearConfig& cfg, std::vector<Tensor2D>* grads) const {
  // inputs[l] is the input of layer l (post-tanh for l > 0).
  std::vector<Tensor2D> inputs;
  inputs.reserve(weights_.size());
  Tensor2D h = X;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    inputs.push_back(h);
    h = qlinear_forward(h, weights_[l], cfg);
    if (l + 1 < weights_.size()) {
      for (double& v : h.values()) v = std::tanh(v);
    }
  }
  const double loss = mse_loss(h, target);
  if (grads == nullptr) return loss;

  Tensor2D dZ(h.rows(), h.cols());
  const double norm = 2.0 / static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    dZ.values()[i] = norm * (h.values()[i] - target.values()[i]);
  }

  grads->assign(weights_.size(), Tensor2D{});
  for (std::size_t l = weights_.size(); l-- > 0;) {
    LinearGrads g = qlinear_backward(dZ, inputs[l], weights_[l], cfg);
    (*grads)[l] = std::move(g.dW);
    if (l == 0) break;
    const auto act = inputs[l].values();
    for (std::size_t i = 0; i < act.size(); ++i) {
      g.dX.values()[i] *= 1.0 - act[i] * act[i];
    }
    dZ = std::move(g.dX);
  }
  return loss;
}

namespace {

class AdamW {
 public:
  AdamW(const ToyNetwork& net, const AdamWOptions& opts) : opts_(opts) {
    for (const auto& w : net.weights()) {
      m_.emplace_back(w.rows(), w.cols());
      v_.emplace_back(w.rows(), w.cols());
    }
  }

  void step(ToyNetwork& net, std::vector<Tensor2D>& grads, double lr) {
    double sq = 0.0;
    for (const auto& g : grads)
      for (double v : g.values()) sq += v * v;
    const double norm = std::sqrt(sq);
    const double clip = (opts_.clip_norm > 0.0 && norm > opts_.clip_norm) ? opts_.clip_norm / norm : 1.0;

    ++t_;
    const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
    for (std::size_t l = 0; l < grads.size(); ++l) {
      auto w = net.weights()[l].values();
      auto m = m_[l].values();
      auto v = v_[l].values();
      const auto g = grads[l].values();
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = g[i] * clip;
        m[i] = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * gi;
        v[i] = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * gi * gi;
        const double update = (m[i] / bc1) / (std::sqrt(v[i] / bc2) + opts_.eps);
        w[i] -= lr * (update + opts_.weight_decay * w[i]);
      }
    }
  }

 private:
  AdamWOptions opts_;
  std::vector<Tensor2D> m_;
  std::vector<Tensor2D> v_;
  std::size_t t_ = 0;
};

struct Trainee {
  ToyNetwork net;
  AdamW optim;
  QLinearConfig cfg;
  ToyRun run;
  std::vector<Tensor2D> grads;

  void step(const Tensor2D& X, const Tensor2D& T, double lr, std::size_t index) {
    if (run.diverged()) return;
    const double loss = net.loss_and_grad(X, T, cfg, &grads);
    bool finite = std::isfinite(loss);
    for (const auto& g : grads)
      for (double v : g.values()) finite = finite && std::isfinite(v);
    run.losses.push_back(loss);
    if (!finite) {
      run.diverged_at = index;
      return;
    }
    optim.step(net, grads, lr);
  }
};

}  // namespace

ToyTrainingResult run_toy_training(const ToyTrainingOptions& opts, const QLinearConfig& cfg) {
  if (opts.widths.size() < 2) throw ConfigError("toy training needs at least two layer widths");
  for (auto w : opts.widths) {
    if (w == 0 || w > 256) throw ConfigError("toy layer widths must be in [1, 256]");
  }
  if (opts.steps == 0 || opts.steps > 10000) throw ConfigError("toy steps must be in [1, 10000]");
  if (opts.batch == 0 || opts.batch > 4096) throw ConfigError("toy batch must be in [1, 4096]");
  if (opts.eval_examples == 0) throw ConfigError("toy eval set must be non-empty");

  auto teacher_rng = stream(opts.seed, 1);
  const ToyNetwork teacher(opts.widths, teacher_rng);
  QLinearConfig exact = cfg;
  exact.targets = TargetSet::none();
  exact.bf16_output = false;

  auto init_rng = stream(opts.seed, 2);
  const ToyNetwork init(opts.widths, init_rng);

  Trainee quant{init, AdamW(init, opts.optimizer), cfg, {}, {}};
  QLinearConfig base_cfg = cfg;
  base_cfg.targets = TargetSet::none();
  Trainee base{init, AdamW(init, opts.optimizer), base_cfg, {}, {}};

  auto data_rng = stream(opts.seed, 3);
  const std::size_t d_in = opts.widths.front();
  for (std::size_t s = 0; s < opts.steps; ++s) {
    const Tensor2D X = gaussian(opts.batch, d_in, 1.0, data_rng);
    const Tensor2D T = teacher.forward(X, exact);
    const double lr = opts.optimizer.learning_rate(s, opts.steps);
    quant.step(X, T, lr, s);
    base.step(X, T, lr, s);
  }

  auto eval_rng = stream(opts.seed, 4);
  const Tensor2D eval_X = gaussian(opts.eval_examples, d_in, 1.0, eval_rng);
  const Tensor2D eval_T = teacher.forward(eval_X, exact);

  ToyTrainingResult result;
  for (Trainee* t : {&quant, &base}) {
    t->run.final_loss = t->run.diverged() ? std::numeric_limits<double>::quiet_NaN()
                                          : mse_loss(t->net.forward(eval_X, t->cfg), eval_T);
  }
  result.quantized = std::move(quant.run);
  result.baseline = std::move(base.run);
  result.gap = result.quantized.final_loss - result.baseline.final_loss;
  return result;
}

}  // namespace fpq

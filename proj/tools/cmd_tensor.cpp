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

// quantize, enumerate and simulate.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>

#include "common.hpp"
#include "fpq/blockquant.hpp"
#include "fpq/csv.hpp"
#include "fpq/errors.hpp"
#include "fpq/tensor_io.hpp"
#include "fpq/toy_training.hpp"

namespace fpq::cli {

namespace {

TensorFileFormat tensor_format(const std::string& choice, const std::string& path) {
  if (choice == "text") return TensorFileFormat::text;
  if (choice == "binary") return TensorFileFormat::binary;
  return guess_tensor_format(path);
}

struct QuantizeArgs {
  std::string input;
  std::string output;
  std::string input_format = "auto";
  std::string output_format = "auto";
  std::string scales;
  std::string fmt = "E4M3";
  std::string strategy = "block";
  std::size_t block = 32;
  bool serial = false;
};

int run_quantize(const QuantizeArgs& a) {
  const FpFormat fmt = FpFormat::parse(a.fmt);
  const ScalingStrategy strat = ScalingStrategy::parse(a.strategy, a.block);
  const Tensor2D t = read_tensor(a.input, tensor_format(a.input_format, a.input));
  const QuantResult q =
      quantize_dequantize(t, fmt, strat, a.serial ? Exec::serial : Exec::parallel);
  write_tensor(a.output, q.dequantized, tensor_format(a.output_format, a.output));

  if (!a.scales.empty()) {
    std::ofstream out(a.scales);
    if (!out) throw Error("cannot write " + a.scales);
    out << "block,scale\n";
    for (std::size_t i = 0; i < q.scales.size(); ++i) {
      out << i << ',' << format_double(q.scales[i]) << '\n';
    }
  }

  double max_err = 0.0;
  bool all_zero = true;
  for (std::size_t i = 0; i < t.values().size(); ++i) {
    max_err = std::max(max_err, std::fabs(t.values()[i] - q.dequantized.values()[i]));
    all_zero = all_zero && t.values()[i] == 0.0;
  }
  const auto [smin, smax] = std::minmax_element(q.scales.begin(), q.scales.end());
  const double smean =
      std::accumulate(q.scales.begin(), q.scales.end(), 0.0) / static_cast<double>(q.scales.size());

  std::cout << "format: " << fmt.name() << '\n'
            << "strategy: " << strat.name() << '\n'
            << "shape: " << t.rows() << 'x' << t.cols() << '\n'
            << "blocks: " << q.scales.size() << '\n'
            << "log2B: " << fmt_num(q.effective_log2_B) << '\n'
            << "sqnr_db: " << (all_zero ? std::string("n/a (zero input)") : fmt_num(measure_sqnr(t, q.dequantized)))
            << '\n'
            << "max_abs_error: " << fmt_num(max_err) << '\n'
            << "scale_min: " << fmt_num(*smin) << '\n'
            << "scale_max: " << fmt_num(*smax) << '\n'
            << "scale_mean: " << fmt_num(smean) << '\n';
  return kOk;
}

struct EnumerateArgs {
  std::string fmt = "E2M1";
  bool info = false;
};

int run_enumerate(const EnumerateArgs& a) {
  const FpFormat fmt = FpFormat::parse(a.fmt);
  if (a.info) {
    std::cout << "format: " << fmt.name() << '\n'
              << "width: " << fmt.width() << '\n'
              << "bias: " << fmt.bias() << '\n'
              << "fp_max: " << format_double(fp_max(fmt)) << '\n'
              << "min_subnormal: " << format_double(fp_min_subnormal(fmt)) << '\n';
    return kOk;
  }
  if (fmt.width() > 16) throw ConfigError("enumerate is limited to formats of at most 16 bits");
  std::cout << "sign,exponent_field,mantissa_field,value\n";
  const unsigned exps = 1u << fmt.exponent_bits();
  const unsigned mants = 1u << fmt.mantissa_bits();
  for (unsigned s = 0; s < 2; ++s) {
    for (unsigned e = 0; e < exps; ++e) {
      for (unsigned m = 0; m < mants; ++m) {
        const FpCode code{s, e, m};
        std::cout << s << ',' << e << ',' << m << ',' << format_double(decode(code, fmt)) << '\n';
      }
    }
  }
  return kOk;
}

struct SimulateArgs {
  std::string fmt = "E4M3";
  std::string strategy = "block";
  std::size_t block = 32;
  std::string targets = "P2,P4,P6";
  std::uint64_t seed = 0;
  std::size_t steps = 400;
  std::size_t batch = 32;
  std::vector<std::size_t> widths = {32, 64, 64, 32};
  double lr = 1e-2;
  bool bf16_output = false;
  std::string output;
};

int run_simulate(const SimulateArgs& a) {
  QLinearConfig cfg;
  cfg.fmt = FpFormat::parse(a.fmt);
  cfg.strat = ScalingStrategy::parse(a.strategy, a.block);
  cfg.targets = TargetSet::parse(a.targets);
  cfg.bf16_output = a.bf16_output;

  ToyTrainingOptions opts;
  opts.seed = a.seed;
  opts.steps = a.steps;
  opts.batch = a.batch;
  opts.widths = a.widths;
  opts.optimizer.lr = a.lr;
  const ToyTrainingResult r = run_toy_training(opts, cfg);

  std::ofstream file;
  if (!a.output.empty()) {
    file.open(a.output);
    if (!file) throw Error("cannot write " + a.output);
  }
  std::ostream& out = a.output.empty() ? std::cout : file;
  out << "step,loss_quant,loss_baseline\n";
  for (std::size_t i = 0; i < r.quantized.losses.size(); ++i) {
    out << i << ',' << format_double(r.quantized.losses[i]) << ','
        << format_double(r.baseline.losses[i]) << '\n';
  }
  std::cerr << "final eval loss: quantized " << fmt_num(r.quantized.final_loss) << ", baseline "
            << fmt_num(r.baseline.final_loss) << ", gap " << fmt_num(r.gap) << '\n';
  if (r.quantized.diverged()) {
    std::cerr << "quantized run diverged at step " << *r.quantized.diverged_at << '\n';
    return kNumeric;
  }
  return kOk;
}

}  // namespace

Runner add_quantize(CLI::App& app) {
  auto a = std::make_shared<QuantizeArgs>();
  auto* sub = app.add_subcommand("quantize", "Block-scaled quantize-dequantize of a tensor file");
  sub->add_option("--input", a->input, "Tensor file")->required();
  sub->add_option("--output", a->output, "Dequantized tensor file")->required();
  sub->add_option("--input-format", a->input_format, "text, binary or auto (by extension)")
      ->check(CLI::IsMember({"text", "binary", "auto"}));
  sub->add_option("--output-format", a->output_format, "text, binary or auto (by extension)")
      ->check(CLI::IsMember({"text", "binary", "auto"}));
  sub->add_option("--scales", a->scales, "Write per-block scales as CSV");
  sub->add_option("--fmt", a->fmt, "Format such as E4M3");
  sub->add_option("--strategy", a->strategy, "block, channel or tensor")
      ->check(CLI::IsMember({"block", "channel", "tensor"}));
  sub->add_option("--block", a->block, "Block size for block-wise scaling");
  sub->add_flag("--serial", a->serial, "Use the single-threaded kernels");
  return [a] { return run_quantize(*a); };
}

Runner add_enumerate(CLI::App& app) {
  auto a = std::make_shared<EnumerateArgs>();
  auto* sub = app.add_subcommand("enumerate", "List every code of a format");
  sub->add_option("--fmt", a->fmt, "Format such as E2M1");
  sub->add_flag("--info", a->info, "Print bias, fp_max and the smallest subnormal only");
  return [a] { return run_enumerate(*a); };
}

Runner add_simulate(CLI::App& app) {
  auto a = std::make_shared<SimulateArgs>();
  auto* sub = app.add_subcommand("simulate", "Toy quantized training against a full-precision twin");
  sub->add_option("--fmt", a->fmt, "Format such as E4M3");
  sub->add_option("--strategy", a->strategy, "block, channel or tensor")
      ->check(CLI::IsMember({"block", "channel", "tensor"}));
  sub->add_option("--block", a->block, "Block size for block-wise scaling");
  sub->add_option("--targets", a->targets, "Quantized operands, e.g. P2,P4,P6 or all/none");
  sub->add_option("--seed", a->seed, "Seed for teacher, init and data");
  sub->add_option("--steps", a->steps, "Optimizer steps")->check(CLI::Range(1, 10000));
  sub->add_option("--batch", a->batch, "Batch size")->check(CLI::Range(1, 4096));
  sub->add_option("--widths", a->widths, "Layer widths, e.g. 32,64,64,32")->delimiter(',');
  sub->add_option("--lr", a->lr, "Peak learning rate")->check(CLI::PositiveNumber);
  sub->add_flag("--bf16-output", a->bf16_output, "Round GEMM outputs to bfloat16");
  sub->add_option("--output", a->output, "Trajectory CSV (stdout when omitted)");
  return [a] { return run_simulate(*a); };
}

}  // namespace fpq::cli

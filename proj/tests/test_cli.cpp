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

// Runs the fpq binary as a subprocess and checks its output and exit codes.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "fpq/blockquant.hpp"
#include "fpq/csv.hpp"
#include "fpq/fitter.hpp"
#include "fpq/runlog.hpp"
#include "fpq/tensor_io.hpp"
#include "support.hpp"

namespace fpq {
namespace {

namespace fs = std::filesystem;

struct ToolRun {
  int code = -1;
  std::string out;
};

ToolRun fpq_run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + FPQ_TOOL_PATH + " " + args + " 2>/dev/null";
  ToolRun r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  return read_csv(in);
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fpq_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  fs::path dir_;
};

const LawConstants kPreset = LawConstants::capybara_paper();

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(fpq_run("--help").code, 0);
  EXPECT_EQ(fpq_run("").code, 2);
  EXPECT_EQ(fpq_run("predict --no-such-flag").code, 2);
  EXPECT_EQ(fpq_run("curves --kind bogus").code, 2);
  EXPECT_EQ(fpq_run("curves --kind loss-vs-D --N 1e9 --fmt E4M3 --points 1").code, 2);
  EXPECT_EQ(fpq_run("predict --N 1e9 --D 1e11 --fmt E4M3 --preset capybara-paper --constants x").code, 2);
  EXPECT_EQ(fpq_run("enumerate --fmt E0M3").code, 2);
}

TEST_F(Cli, MalformedHeaderIsAParseErrorOnLineOne) {
  const auto log = write("bad.csv", "N,D,E,M,B,strategy,loss\n1e8,1e10,4,3,7,block,3\n");
  const std::string cmd = std::string(FPQ_TOOL_PATH) + " fit --runlog " + log + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  std::string text;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) text += buf;
  const int status = ::pclose(pipe);
  EXPECT_EQ(WEXITSTATUS(status), 3);
  EXPECT_NE(text.find("line 1"), std::string::npos) << text;
}

TEST_F(Cli, UnderdeterminedFitExitsFour) {
  const auto log = write("one.csv", "N,D,E,M,log2B,strategy,loss\n1e8,1e10,4,3,7,block,3\n");
  EXPECT_EQ(fpq_run("fit --runlog " + log).code, 4);
  testing::Grid g;
  g.log2B = {7};
  std::ostringstream ss;
  write_runlog(ss, testing::synthetic_runs(kPreset, g, 0.0, 0));
  const auto flat = write("flat.csv", ss.str());
  EXPECT_EQ(fpq_run("fit --staged --runlog " + flat).code, 4);
}

TEST_F(Cli, FitRecoversGeneratorConstants) {
  std::ostringstream ss;
  write_runlog(ss, testing::synthetic_runs(kPreset, testing::Grid{}, 0.0, 0));
  const auto log = write("runs.csv", ss.str());
  const ToolRun r = fpq_run("fit --runlog " + log + " --starts 8 --seed 3 --out " + path("rep.json"));
  ASSERT_EQ(r.code, 0);
  const LawConstants got = constants_from_fit_report(path("rep.json"));
  const auto g = got.as_array(), w = kPreset.as_array();
  for (std::size_t k = 0; k < 8; ++k) EXPECT_LT(testing::rel_err(g[k], w[k]), 0.01) << k;

  // predict --report uses the fitted constants.
  const ToolRun p = fpq_run("predict --report " + path("rep.json") + " --N 1e9 --D 1e11 --fmt E4M3 --log2b 7");
  ASSERT_EQ(p.code, 0);
  const auto t = parse_csv(p.out);
  EXPECT_EQ(parse_double(t.rows[0][5], 0, 0), capybara_loss(1e9, 1e11, 4, 3, 7, got));
}

TEST_F(Cli, ChinchillaModelUsesOnlyNDAndLoss) {
  const auto runs = testing::synthetic_runs(kPreset, testing::Grid{}, 0.001, 4);
  std::ostringstream ss;
  write_runlog(ss, runs);
  const auto log = write("runs.csv", ss.str());
  const ToolRun r = fpq_run("fit --runlog " + log + " --model chinchilla --starts 4 --seed 2 --out " +
                        path("rep.json"));
  ASSERT_EQ(r.code, 0);

  FitProblem prob;
  prob.model = ModelId::chinchilla;
  prob.dataset = runs;
  prob.starts = 4;
  prob.seed = 2;
  const FitResult lib = fit(prob);
  std::ifstream in(path("rep.json"));
  std::stringstream body;
  body << in.rdbuf();
  EXPECT_EQ(body.str().substr(0, body.str().find("\"residuals\"")),
            fit_report_json(lib).substr(0, fit_report_json(lib).find("\"residuals\"")));
}

TEST_F(Cli, PredictMatchesLibraryBitwise) {
  const ToolRun hp = fpq_run("predict --N 1e9 --D 1e11 --E 4 --M 3 --log2b 0");
  const ToolRun ch = fpq_run("predict --model chinchilla --N 1e9 --D 1e11");
  ASSERT_EQ(hp.code, 0);
  ASSERT_EQ(ch.code, 0);
  const double a = parse_double(parse_csv(hp.out).rows[0][5], 0, 0);
  const double b = parse_double(parse_csv(ch.out).rows[0][5], 0, 0);
  EXPECT_EQ(a, b);
  EXPECT_EQ(b, chinchilla_loss(1e9, 1e11, kPreset));

  const ToolRun s = fpq_run("predict --N 3.3e8 --D 7.7e10 --fmt E3M2 --log2b 5");
  EXPECT_EQ(parse_double(parse_csv(s.out).rows[0][5], 0, 0),
            capybara_loss(3.3e8, 7.7e10, 3, 2, 5, kPreset));
}

TEST_F(Cli, BatchPredictKeepsInputOrder) {
  const auto pts = write("pts.csv", "N,D,E,M,log2B\n1e9,1e11,4,3,7\n1e8,1e10,2,1,5\n5e9,3e12,8,7,9\n");
  const ToolRun r = fpq_run("predict --points " + pts);
  ASSERT_EQ(r.code, 0);
  const auto t = parse_csv(r.out);
  ASSERT_EQ(t.rows.size(), 3u);
  const double want[3] = {capybara_loss(1e9, 1e11, 4, 3, 7, kPreset),
                          capybara_loss(1e8, 1e10, 2, 1, 5, kPreset),
                          capybara_loss(5e9, 3e12, 8, 7, 9, kPreset)};
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(parse_double(t.rows[i][5], 0, 0), want[i]);
  EXPECT_EQ(fpq_run("predict --points " + write("bad.csv", "N,D,E\n1,2,3\n")).code, 3);
}

TEST_F(Cli, CriticalDataTable) {
  const ToolRun r = fpq_run("curves --kind dcrit-table --N 1e9 --fmt E8M7,E4M3,E2M1 --log2b 7");
  ASSERT_EQ(r.code, 0);
  const auto t = parse_csv(r.out);
  ASSERT_EQ(t.rows.size(), 3u);
  const double want[3] = {1730e12, 27e12, 0.4e12};
  const double tol[3] = {0.03, 0.05, 0.15};
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_LT(testing::rel_err(parse_double(t.rows[i][2], 0, 0), want[i]), tol[i]) << i;
}

TEST_F(Cli, PrecisionCurveAndDegenerateGrid) {
  const ToolRun r = fpq_run("curves --kind popt-vs-C --min 1e21 --max 1e31 --points 11");
  ASSERT_EQ(r.code, 0);
  const auto t = parse_csv(r.out);
  ASSERT_EQ(t.rows.size(), 11u);
  double prev = 0.0;
  for (const auto& row : t.rows) {
    const double p = parse_double(row[2], 0, 0);
    EXPECT_GE(p, 3.5);
    EXPECT_LE(p, 8.5);
    EXPECT_GT(p, prev);
    prev = p;
  }
  const ToolRun two = fpq_run("curves --kind loss-vs-D --N 1e9 --fmt E4M3 --min 1e10 --max 1e14 --points 2");
  ASSERT_EQ(two.code, 0);
  EXPECT_EQ(parse_csv(two.out).rows.size(), 2u);
  const ToolRun js = fpq_run("curves --kind loss-vs-N --D 1e11 --fmt E4M3 --min 1e8 --max 1e10 --points 3 --output json");
  EXPECT_EQ(js.code, 0);
  EXPECT_NE(js.out.find('{'), std::string::npos);
}

TEST_F(Cli, ImplicationsSubcommands) {
  const ToolRun l = fpq_run("implications optimal-layout --bits 4,8,16 --csv");
  ASSERT_EQ(l.code, 0);
  const auto t = parse_csv(l.out);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0][1], "E2M1");
  EXPECT_EQ(t.rows[1][1], "E4M3");
  EXPECT_EQ(t.rows[2][1], "E8M7");

  const ToolRun p = fpq_run("implications optimal-precision --budget 1e22,1e26 --mode joint --check --csv");
  ASSERT_EQ(p.code, 0);
  for (const auto& row : parse_csv(p.out).rows) {
    EXPECT_LT(testing::rel_err(parse_double(row[4], 0, 0), parse_double(row[1], 0, 0)), 0.02);
  }
  const ToolRun none = fpq_run("implications critical-data --n 1e9 --fmt E4M3 --log2b 0");
  EXPECT_EQ(none.code, 0);
  EXPECT_NE(none.out.find("none"), std::string::npos);
}

TEST_F(Cli, JsonConfigMirrorsFlags) {
  const auto cfg = write("cfg.json", R"({"predict": {"N": 1e9, "D": 1e11, "fmt": "E4M3", "log2b": 7}})");
  const ToolRun a = fpq_run("--config " + cfg + " predict");
  const ToolRun b = fpq_run("predict --N 1e9 --D 1e11 --fmt E4M3 --log2b 7");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto bad = write("bad.json", R"({"predict": {"bogus": 1}})");
  EXPECT_EQ(fpq_run("--config " + bad + " predict").code, 2);
}

TEST_F(Cli, PresetDirectoryOverride) {
  LawConstants c = kPreset;
  c.epsilon = 2.0;
  std::ofstream(path("mine.txt")) << "n = 69.2343\nalpha = 0.2368\nd = 68973.0621\nbeta = 0.5162\n"
                                     "epsilon = 2\ngamma = 11334.5197\ndelta = 3.1926\nnu = 2.9543\n";
  const ToolRun r = fpq_run("predict --preset mine --N 1e9 --D 1e11 --fmt E4M3 --log2b 7",
                        "FPQ_PRESET_DIR=" + dir_.string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(parse_double(parse_csv(r.out).rows[0][5], 0, 0), capybara_loss(1e9, 1e11, 4, 3, 7, c));
}

TEST_F(Cli, QuantizeContracts) {
  // E2M1 {1, 2, 4}: exact.
  write("t.txt", "1 3\n1 2 4\n");
  ASSERT_EQ(fpq_run("quantize --input " + path("t.txt") + " --output " + path("o.txt") +
                    " --fmt E2M1 --block 3").code,
            0);
  EXPECT_EQ(read_tensor(path("o.txt"), TensorFileFormat::text),
            read_tensor(path("t.txt"), TensorFileFormat::text));

  // All-zero tensor: zero output, one scale of 1 per block.
  write("z.txt", "2 4\n0 0 0 0\n0 0 0 0\n");
  ASSERT_EQ(fpq_run("quantize --input " + path("z.txt") + " --output " + path("zo.txt") +
                    " --block 2 --scales " + path("s.csv")).code,
            0);
  EXPECT_EQ(read_tensor(path("zo.txt"), TensorFileFormat::text), Tensor2D(2, 4));
  std::ifstream sin(path("s.csv"));
  const auto scales = read_csv(sin);
  ASSERT_EQ(scales.rows.size(), 4u);
  for (const auto& row : scales.rows) EXPECT_EQ(row[1], "1");

  // B = 1 on random doubles: SQNR of at least 120 dB.
  std::mt19937_64 rng(51);
  write_tensor(path("r.txt"), testing::random_tensor(8, 64, rng), TensorFileFormat::text);
  const ToolRun q = fpq_run("quantize --input " + path("r.txt") + " --output " + path("ro.txt") +
                        " --fmt E2M1 --block 1");
  ASSERT_EQ(q.code, 0);
  const Tensor2D in = read_tensor(path("r.txt"), TensorFileFormat::text);
  const Tensor2D out = read_tensor(path("ro.txt"), TensorFileFormat::text);
  EXPECT_GE(measure_sqnr(in, out), 120.0);

  // Binary output by extension, and the serial path gives the same bytes.
  ASSERT_EQ(fpq_run("quantize --input " + path("r.txt") + " --output " + path("a.bin")).code, 0);
  ASSERT_EQ(fpq_run("quantize --serial --input " + path("r.txt") + " --output " + path("b.bin")).code, 0);
  std::ifstream fa(path("a.bin"), std::ios::binary), fb(path("b.bin"), std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str().size(), 8u + 8u * 64u * 4u);

  EXPECT_EQ(fpq_run("quantize --input " + path("r.txt") + " --output " + path("x.txt") +
                    " --block 48").code,
            2);
  write("junk.txt", "2 2\n1 2\n3\n");
  EXPECT_EQ(fpq_run("quantize --input " + path("junk.txt") + " --output " + path("x.txt")).code, 3);
}

TEST_F(Cli, EnumerateListsEveryCode) {
  const ToolRun r = fpq_run("enumerate --fmt E2M1");
  ASSERT_EQ(r.code, 0);
  const auto t = parse_csv(r.out);
  ASSERT_EQ(t.rows.size(), 16u);
  EXPECT_EQ(t.rows[7][3], "6");
  EXPECT_EQ(fpq_run("enumerate --fmt E8M8").code, 2);
}

TEST_F(Cli, SimulateIsDeterministic) {
  const std::string args =
      "simulate --fmt E4M3 --block 8 --widths 8,16,8 --steps 30 --batch 8 --seed 4";
  const ToolRun a = fpq_run(args);
  const ToolRun b = fpq_run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto t = parse_csv(a.out);
  EXPECT_EQ(t.header, (std::vector<std::string>{"step", "loss_quant", "loss_baseline"}));
  EXPECT_EQ(t.rows.size(), 30u);
  const ToolRun none = fpq_run("simulate --targets none --block 8 --widths 8,16,8 --steps 10 --batch 8");
  for (const auto& row : parse_csv(none.out).rows) EXPECT_EQ(row[1], row[2]);
}

}  // namespace
}  // namespace fpq

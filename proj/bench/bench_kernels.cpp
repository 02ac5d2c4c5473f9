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

// Serial reference kernels against their OpenMP twins.
//
//   bench_kernels --benchmark_counters_tabular=true
//
// Thread count follows OMP_NUM_THREADS. Rates are wall-clock.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>
#include <vector>

#include "fpq/kernels.hpp"

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

template <fpq::Exec kExec>
void BM_BlockQuantize(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::size_t group = 32;
  const fpq::FpFormat fmt(4, 3);
  const auto x = gaussian(n, 1);
  std::vector<double> scales(n / group), out(n);
  for (auto _ : state) {
    fpq::kernels::block_scales(kExec, x, group, fmt, scales);
    fpq::kernels::block_quantize(kExec, x, group, fmt, scales, out);
    benchmark::DoNotOptimize(out.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
  state.counters["threads"] = kExec == fpq::Exec::parallel ? omp_get_max_threads() : 1;
}

template <fpq::Exec kExec>
void BM_GemmNt(benchmark::State& state) {
  const std::size_t m = static_cast<std::size_t>(state.range(0));
  const auto a = gaussian(m * m, 2);
  const auto b = gaussian(m * m, 3);
  std::vector<double> c(m * m);
  for (auto _ : state) {
    fpq::kernels::gemm_nt(kExec, a, b, c, m, m, m);
    benchmark::DoNotOptimize(c.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * m * m * m));
  state.counters["threads"] = kExec == fpq::Exec::parallel ? omp_get_max_threads() : 1;
}

BENCHMARK(BM_BlockQuantize<fpq::Exec::serial>)->RangeMultiplier(8)->Range(1 << 12, 1 << 21)->UseRealTime();
BENCHMARK(BM_BlockQuantize<fpq::Exec::parallel>)->RangeMultiplier(8)->Range(1 << 12, 1 << 21)->UseRealTime();
BENCHMARK(BM_GemmNt<fpq::Exec::serial>)->Arg(64)->Arg(256)->Arg(512)->UseRealTime();
BENCHMARK(BM_GemmNt<fpq::Exec::parallel>)->Arg(64)->Arg(256)->Arg(512)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();

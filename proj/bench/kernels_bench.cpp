// Serial versus OpenMP kernel comparison. Register pairs at a few sizes
// around the dispatch grain so the crossover is visible in one run:
//   ./rkan_bench --benchmark_filter=gemm
#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "rkan/kernels.hpp"
#include "rkan/rng.hpp"

namespace {

using namespace rkan;

std::vector<double> random_vec(long n, std::uint64_t seed) {
  Rng rng(seed, Stream::TrainData);
  std::vector<double> v(static_cast<size_t>(n));
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

template <bool Parallel>
void bm_ew_tanh(benchmark::State& state) {
  const long n = state.range(0);
  const std::vector<double> a = random_vec(n, 1);
  std::vector<double> out(static_cast<size_t>(n));
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::par::ew_tanh(kernels::full(a.data()), out.data(), n);
    else
      kernels::serial::ew_tanh(kernels::full(a.data()), out.data(), n);
    benchmark::DoNotOptimize(out.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * n);
}

template <bool Parallel>
void bm_ew_mul(benchmark::State& state) {
  const long n = state.range(0);
  const std::vector<double> a = random_vec(n, 1);
  const std::vector<double> b = random_vec(n, 2);
  std::vector<double> out(static_cast<size_t>(n));
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::par::ew_mul(kernels::full(a.data()), kernels::full(b.data()),
                           out.data(), n);
    else
      kernels::serial::ew_mul(kernels::full(a.data()), kernels::full(b.data()),
                              out.data(), n);
    benchmark::DoNotOptimize(out.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * n);
}

template <bool Parallel>
void bm_reduce_sum(benchmark::State& state) {
  const long n = state.range(0);
  const std::vector<double> a = random_vec(n, 3);
  for (auto _ : state) {
    double s;
    if constexpr (Parallel)
      s = kernels::par::reduce_sum(kernels::full(a.data()), n);
    else
      s = kernels::serial::reduce_sum(kernels::full(a.data()), n);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

template <bool Parallel>
void bm_gemm(benchmark::State& state) {
  const long m = state.range(0);
  const std::vector<double> a = random_vec(m * m, 4);
  const std::vector<double> b = random_vec(m * m, 5);
  std::vector<double> c(static_cast<size_t>(m * m));
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::par::gemm(false, false, m, m, m, a.data(), m, b.data(), m,
                         c.data(), m, false);
    else
      kernels::serial::gemm(false, false, m, m, m, a.data(), m, b.data(), m,
                            c.data(), m, false);
    benchmark::DoNotOptimize(c.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * m * m * m);
}

}  // namespace

BENCHMARK(bm_ew_tanh<false>)->Name("ew_tanh/serial")->Arg(4096)->Arg(65536)->Arg(1 << 20);
BENCHMARK(bm_ew_tanh<true>)->Name("ew_tanh/par")->Arg(4096)->Arg(65536)->Arg(1 << 20);
BENCHMARK(bm_ew_mul<false>)->Name("ew_mul/serial")->Arg(4096)->Arg(65536)->Arg(1 << 20);
BENCHMARK(bm_ew_mul<true>)->Name("ew_mul/par")->Arg(4096)->Arg(65536)->Arg(1 << 20);
BENCHMARK(bm_reduce_sum<false>)->Name("reduce_sum/serial")->Arg(65536)->Arg(1 << 20);
BENCHMARK(bm_reduce_sum<true>)->Name("reduce_sum/par")->Arg(65536)->Arg(1 << 20);
BENCHMARK(bm_gemm<false>)->Name("gemm/serial")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(bm_gemm<true>)->Name("gemm/par")->Arg(64)->Arg(256)->Arg(512);

BENCHMARK_MAIN();

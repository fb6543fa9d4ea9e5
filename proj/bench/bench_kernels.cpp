// Serial reference kernels against their OpenMP counterparts, at the shapes
// the model uses (node count x 128 features).

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "newsgraph/numerics/kernels.hpp"

namespace k = newsgraph::kernels;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

template <auto Kernel>
void bm_gemm_nn(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 128;
  const auto a = random_values(m * d, 1), b = random_values(d * d, 2);
  std::vector<double> c(m * d);
  for (auto _ : state) {
    Kernel(m, d, d, a.data(), b.data(), c.data());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * d * d));
}

template <auto Kernel>
void bm_gemm_tn(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 128;
  const auto a = random_values(m * d, 1), g = random_values(m * d, 2);
  std::vector<double> c(d * d);
  for (auto _ : state) {
    Kernel(m, d, d, a.data(), g.data(), c.data());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * d * d));
}

template <auto Kernel>
void bm_gemm_nt(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 128;
  const auto g = random_values(m * d, 1), b = random_values(d * d, 2);
  std::vector<double> c(m * d);
  for (auto _ : state) {
    Kernel(m, d, d, g.data(), b.data(), c.data());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * d * d));
}

// Each destination averages 8 random source rows.
template <auto Kernel>
void bm_segment_mean(benchmark::State& state) {
  const auto segments = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 128, fan_in = 8, sources = 4 * segments;
  const auto src = random_values(sources * d, 3);
  std::mt19937_64 rng(4);
  std::vector<std::size_t> offsets{0}, indices;
  for (std::size_t s = 0; s < segments; ++s) {
    for (std::size_t j = 0; j < fan_in; ++j) indices.push_back(rng() % sources);
    offsets.push_back(indices.size());
  }
  std::vector<double> dst(segments * d);
  for (auto _ : state) {
    Kernel(k::Segments{offsets, indices}, d, src.data(), dst.data(), true);
    benchmark::DoNotOptimize(dst.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * indices.size() * d));
}

}  // namespace

BENCHMARK(bm_gemm_nn<k::serial::gemm_nn>)->Name("gemm_nn/serial")->Arg(64)->Arg(512)->Arg(4096);
BENCHMARK(bm_gemm_nn<k::parallel::gemm_nn>)->Name("gemm_nn/parallel")->Arg(64)->Arg(512)->Arg(4096);
BENCHMARK(bm_gemm_tn<k::serial::gemm_tn>)->Name("gemm_tn/serial")->Arg(64)->Arg(512)->Arg(4096);
BENCHMARK(bm_gemm_tn<k::parallel::gemm_tn>)->Name("gemm_tn/parallel")->Arg(64)->Arg(512)->Arg(4096);
BENCHMARK(bm_gemm_nt<k::serial::gemm_nt>)->Name("gemm_nt/serial")->Arg(64)->Arg(512)->Arg(4096);
BENCHMARK(bm_gemm_nt<k::parallel::gemm_nt>)->Name("gemm_nt/parallel")->Arg(64)->Arg(512)->Arg(4096);
BENCHMARK(bm_segment_mean<k::serial::segment_reduce>)->Name("segment_mean/serial")->Arg(256)->Arg(4096);
BENCHMARK(bm_segment_mean<k::parallel::segment_reduce>)->Name("segment_mean/parallel")->Arg(256)->Arg(4096);

BENCHMARK_MAIN();

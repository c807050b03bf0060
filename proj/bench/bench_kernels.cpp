#include <benchmark/benchmark.h>

#include "cacl/kernels.hpp"
#include "cacl/rng.hpp"

namespace {

cacl::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  cacl::Rng rng(seed);
  cacl::Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

template <auto Fn>
void BM_pairwise(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, 32, 1);
  const auto b = random_matrix(n, 32, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

template <auto Fn>
void BM_gaussian(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, 32, 3);
  const auto b = random_matrix(n, 32, 4);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b, 4.0));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

template <auto Fn>
void BM_radius(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_matrix(n, 32, 5);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, 7.0));
}

template <auto Fn>
void BM_affine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_matrix(n, 64, 6);
  const auto w = random_matrix(64, 64, 7);
  std::vector<double> bias(64, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, w, bias));
}

}  // namespace

BENCHMARK(BM_pairwise<cacl::kernels::serial::pairwise_sq_dists>)->Name("pairwise/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_pairwise<cacl::kernels::omp::pairwise_sq_dists>)->Name("pairwise/omp")->Arg(256)->Arg(1024);
BENCHMARK(BM_gaussian<cacl::kernels::serial::gaussian_block_sum>)->Name("gaussian/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_gaussian<cacl::kernels::omp::gaussian_block_sum>)->Name("gaussian/omp")->Arg(256)->Arg(1024);
BENCHMARK(BM_radius<cacl::kernels::serial::radius_neighbors>)->Name("radius/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_radius<cacl::kernels::omp::radius_neighbors>)->Name("radius/omp")->Arg(256)->Arg(1024);
BENCHMARK(BM_affine<cacl::kernels::serial::affine>)->Name("affine/serial")->Arg(256)->Arg(2048);
BENCHMARK(BM_affine<cacl::kernels::omp::affine>)->Name("affine/omp")->Arg(256)->Arg(2048);

BENCHMARK_MAIN();

// OpenMP kernels against their serial references.

#include "deblur/convolution.hpp"
#include "deblur/metrics.hpp"
#include "deblur/psf.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace deblur;

namespace {

Grid noise_grid(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Grid g(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) g(i, j) = u(rng);
  return g;
}

const Psf& kernel() {
  static const Psf k = gaussian_psf(9, 2.0, 2.0, 0.0);
  return k;
}

template <Grid (*F)(const Grid&, const Psf&, BoundaryCondition)>
void bm_convolve(benchmark::State& state) {
  const Grid x = noise_grid(state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(F(x, kernel(), BoundaryCondition::reflexive));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <Grid (*F)(const Grid&, const Grid&, Index, BoundaryCondition)>
void bm_psf_gradient(benchmark::State& state) {
  const Grid x = noise_grid(state.range(0), 2);
  const Grid r = noise_grid(state.range(0), 3);
  for (auto _ : state) benchmark::DoNotOptimize(F(x, r, 9, BoundaryCondition::reflexive));
}

template <double (*F)(const Grid&, const Grid&, const SsimOptions&)>
void bm_ssim(benchmark::State& state) {
  const Grid x = noise_grid(state.range(0), 4);
  const Grid y = noise_grid(state.range(0), 5);
  for (auto _ : state) benchmark::DoNotOptimize(F(x, y, SsimOptions{}));
}

}  // namespace

BENCHMARK(bm_convolve<convolve2d>)->Name("convolve2d/omp")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(bm_convolve<serial::convolve2d>)->Name("convolve2d/serial")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(bm_convolve<convolve2d_adjoint>)->Name("convolve2d_adjoint/omp")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(bm_convolve<serial::convolve2d_adjoint>)->Name("convolve2d_adjoint/serial")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(bm_psf_gradient<psf_gradient>)->Name("psf_gradient/omp")->RangeMultiplier(2)->Range(64, 256);
BENCHMARK(bm_psf_gradient<serial::psf_gradient>)->Name("psf_gradient/serial")->RangeMultiplier(2)->Range(64, 256);
BENCHMARK(bm_ssim<ssim>)->Name("ssim/omp")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(bm_ssim<serial::ssim>)->Name("ssim/serial")->RangeMultiplier(2)->Range(64, 512);

BENCHMARK_MAIN();

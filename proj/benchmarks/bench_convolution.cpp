#include <benchmark/benchmark.h>

#include "pnpcdft/convolution.hpp"
#include "pnpcdft/kernels.hpp"

using namespace pnpcdft;

namespace {

GridSpec probe_grid(int n) {
  return GridSpec(2 * n + 1, 10 * n + 1, 5 * n + 1, 2 * 1.053, 10 * 0.612, 5 * 0.493);
}

void BM_BallConvolution(benchmark::State& state) {
  const GridSpec grid = probe_grid(static_cast<int>(state.range(0)));
  ConvolutionPlan plan = plan_kernel(grid, ball_kernel(grid, 0.1));
  ScalarField f(grid, 1.0);
  for (auto _ : state) {
    ScalarField g = plan.apply(f);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(grid.size()));
}

void BM_CoulombConvolution(benchmark::State& state) {
  const GridSpec grid = probe_grid(static_cast<int>(state.range(0)));
  ConvolutionPlan plan = plan_kernel(grid, coulomb_kernel(grid));
  ScalarField f(grid, 1.0);
  for (auto _ : state) {
    ScalarField g = plan.apply(f);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(grid.size()));
}

}  // namespace

BENCHMARK(BM_BallConvolution)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoulombConvolution)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

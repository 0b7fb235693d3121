#include <benchmark/benchmark.h>

#include <cmath>

#include "pnpcdft/shell_quadrature.hpp"

using namespace pnpcdft;

namespace {

void BM_ShellIntegral(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const GridSpec grid(17, 33, 17, 1.0, 2.0, 1.0);
  SphereRule rule = make_sphere_rule(order, order);

  ScalarField f(grid);
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j)
      for (int k = 0; k < grid.nz; ++k) f(i, j, k) = std::exp(-grid.y(j)) + grid.x(i);

  for (auto _ : state) {
    ScalarField g = shell_integral(f, 0.1, rule);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(grid.size()) *
                          static_cast<int64_t>(rule.points.size()));
}

}  // namespace

BENCHMARK(BM_ShellIntegral)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <cmath>

#include "pnpcdft/multigrid.hpp"
#include "pnpcdft/stencil.hpp"

using namespace pnpcdft;

namespace {

// Poisson solve with a smooth source on a unit-ish box; measures cycles to
// the default tolerance at several refinements.
void BM_MgPoisson(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec grid(n, n, n, 1.0, 1.0, 1.0);
  ScalarField kappa(grid, 1.0);
  MgSolver solver(grid, kappa, MgSettings{});

  ScalarField f(grid);
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j)
      for (int k = 0; k < grid.nz; ++k)
        f(i, j, k) = std::sin(3.0 * grid.x(i)) * std::cos(2.0 * grid.y(j)) + grid.z(k);

  const std::size_t plane = static_cast<std::size_t>(grid.nx) * grid.nz;
  const std::vector<double> bc(plane, 0.0);
  const std::vector<double> b = assemble_rhs(grid, f, bc, bc);

  int cycles = 0;
  for (auto _ : state) {
    std::vector<double> x(grid.size(), 0.0);
    SolveStats stats = solver.solve(x, b);
    cycles = stats.cycles;
    benchmark::DoNotOptimize(x.data());
  }
  state.counters["cycles"] = cycles;
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(grid.size()));
}

}  // namespace

BENCHMARK(BM_MgPoisson)->Arg(17)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

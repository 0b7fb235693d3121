#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pnpcdft/cdft.hpp"
#include "pnpcdft/config.hpp"
#include "pnpcdft/field.hpp"
#include "pnpcdft/grid.hpp"
#include "pnpcdft/gummel.hpp"
#include "pnpcdft/report.hpp"
#include "pnpcdft/sites.hpp"
#include "pnpcdft/transport.hpp"

namespace pnpcdft {

// Concrete objects built from a validated configuration, ready to feed the
// functional engine and the outer iteration.
struct Assembly {
  GridSpec grid;
  Thermo thermo;
  std::vector<SpeciesSpec> species;
  std::vector<SquareWellSpec> wells;
  std::vector<Site> sites;
  std::vector<std::pair<std::string, ScalarField>> stationary;
  ScalarField fixed_charge;
};

Assembly assemble(const SimulationConfig& cfg);

struct RunOptions {
  // Directory for checkpoints and abort dumps; empty disables both.
  std::string output_dir;
  // Checkpoint directory to restart from; empty starts fresh.
  std::string resume_dir;
  int checkpoint_every = 0;
  std::ostream* log = nullptr;  // per-iteration progress lines
};

struct RunResult {
  SolveReport report;
  SystemState state;
  bool converged = false;
  std::vector<std::pair<std::string, ScalarField>> stationary;
  ScalarField fixed_charge;
};

// Full solve: equilibrium relaxation followed by the biased outer iteration,
// then the transport observables. A run that exhausts its iteration budget
// returns converged = false with the partial history in the report; a
// non-finite abort dumps the last good state under output_dir and rethrows.
RunResult run_once(const SimulationConfig& cfg, const RunOptions& options);

// Re-solves the configuration at each temperature [K].
std::vector<SweepPoint> sweep_temperature(const SimulationConfig& cfg,
                                          const std::vector<double>& temperatures_K,
                                          std::ostream* log = nullptr);

// Re-solves the configuration at each domain length, given in lattice cells
// along the transport axis.
std::vector<SweepPoint> sweep_size(const SimulationConfig& cfg, const std::vector<int>& cells_y,
                                   std::ostream* log = nullptr);

// Uniform grid refinements of the configured box at fixed physics. Each
// refinement runs a capped number of outer iterations from the bulk seed and
// records the functional-evaluation FFT time and multigrid cycle counts.
std::vector<ComplexityPoint> complexity_probe(const SimulationConfig& cfg,
                                              const std::vector<int>& nodes_per_cell,
                                              int iterations, std::ostream* log = nullptr);

}  // namespace pnpcdft

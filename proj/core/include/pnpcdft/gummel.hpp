#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "pnpcdft/cdft.hpp"
#include "pnpcdft/field.hpp"
#include "pnpcdft/multigrid.hpp"
#include "pnpcdft/thermo.hpp"

namespace pnpcdft {

struct GummelSettings {
  double tol_u = 1e-6;    // max |change| of the dimensionless potential
  double tol_rho = 1e-5;  // max |change| / bulk density, per species
  double lambda_u = 0.2;
  double lambda_rho = 1.0;
  int max_iterations = 200;
  double exp_clamp = 500.0;
  // Zero-bias relaxation phase; smaller density steps keep the functional
  // evaluations inside the packing limit while layers form.
  double eq_lambda_u = 0.2;
  double eq_lambda_rho = 0.1;
  int eq_max_iterations = 2000;
  // Per-node bound on |ln(target/current)| in the zero-bias map. Inactive at
  // the fixed point; keeps exponential targets from outrunning screening.
  double eq_max_log_step = 2.0;
  int threads = 1;
};

struct IterationRecord {
  int iteration = 0;
  double delta_u = 0.0;
  double delta_rho = 0.0;
  double max_packing = 0.0;
  int poisson_cycles = 0;
  std::vector<int> np_cycles;  // empty during the zero-bias phase
  double seconds = 0.0;
};

struct SystemState {
  ScalarField u;                 // dimensionless potential e phi / kT
  std::vector<ScalarField> rho;  // mobile densities, engine order
};

// A stage produced a non-finite value; the solve cannot continue. The state
// held by the caller is the last fully finite one (stages are scanned before
// any relaxation is applied), so it can be dumped for inspection. node is the
// flat index of the first bad entry and (i, j, k) its decoded coordinates.
class NumericsError : public std::runtime_error {
 public:
  NumericsError(std::string stage, int iteration, std::ptrdiff_t node, int i, int j, int k);
  std::string stage;
  int iteration;
  std::ptrdiff_t node;
  int i, j, k;
};

// The iteration budget ran out before the tolerances were met. Carries the
// per-iteration history so a partial report can still be written.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::string what, int iterations, double delta_u, double delta_rho,
                   std::vector<IterationRecord> history);
  int iterations;
  double delta_u;
  double delta_rho;
  std::vector<IterationRecord> history;
};

// Decoupled outer iteration: Poisson solve for the potential, functional
// evaluation for the chemical potentials, then one transformed diffusion
// solve per species, with under-relaxation between stages.
class GummelDriver {
 public:
  // The engine is borrowed and must outlive the driver. fixed_charge is a
  // number density field of +e charges entering the Poisson source only.
  GummelDriver(const Thermo& thermo, ChemicalPotentialEngine& engine, ScalarField fixed_charge,
               double applied_voltage_V, GummelSettings settings, MgSettings mg);
  ~GummelDriver();

  SystemState initial_state() const;  // zero potential, uniform bulk densities

  // Zero-bias relaxation toward the self-consistent reservoir equilibrium.
  // Both faces are grounded; densities follow the constant-chemical-potential
  // fixed-point map instead of a transport solve.
  std::vector<IterationRecord> equilibrate(
      SystemState& state,
      const std::function<void(const IterationRecord&, const SystemState&)>& observer = {});

  // Biased outer iteration to the given tolerances. The optional callback is
  // invoked after every iteration with the current state.
  std::vector<IterationRecord> run(
      SystemState& state,
      const std::function<void(const IterationRecord&, const SystemState&)>& observer = {});

  // Transformed-system views of the last transport iteration, used to report
  // fluxes with exactly the solved coefficients.
  const ScalarField& exponent(int m) const;
  const ScalarField& transformed_density(int m) const;
  const ScalarField& transformed_diffusivity(int m) const;
  const MgSolver& species_solver(int m) const;

  double applied_bias_u() const;  // Dirichlet value at the far y face
  double solver_seconds() const;  // accumulated linear-solve wall time

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pnpcdft

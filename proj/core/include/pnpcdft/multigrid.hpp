#pragma once

#include <memory>
#include <vector>

#include "pnpcdft/field.hpp"
#include "pnpcdft/grid.hpp"
#include "pnpcdft/stencil.hpp"

namespace pnpcdft {

struct MgSettings {
  int nu_pre = 2;
  int nu_post = 2;
  double jacobi_weight = 0.8;
  double tolerance = 1e-10;  // on ||r||/||b||; absolute when b is all zero
  int max_cycles = 200;
  int coarsest_max_nodes = 150;  // stop building levels at or below this
  int threads = 1;
  // Recompute b - A x before declaring convergence. Right for well-scaled
  // systems; systems whose coefficients span many decades sit on a roundoff
  // floor far above `tolerance` in that norm, so their solves disable this
  // and trust the recurrence residual.
  bool verify_true_residual = true;
};

struct SolveStats {
  int cycles = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

// Conjugate gradients preconditioned by one geometric multigrid V-cycle.
// The hierarchy halves every axis whose interval count is even (axes with odd
// counts pass through unchanged), so non-power-of-two grids still coarsen as
// far as their factors allow. The coefficient field is restricted by
// boundary-renormalized averaging and re-meaned harmonically by the coarse
// stencil; the coarsest level is factored densely once at construction and
// reused across solves.
class MgSolver {
 public:
  MgSolver(const GridSpec& grid, const ScalarField& kappa, MgSettings settings = {});
  ~MgSolver();
  MgSolver(MgSolver&&) noexcept;
  MgSolver& operator=(MgSolver&&) noexcept;

  // Solves A x = b from the initial guess in x. Dirichlet rows of x are
  // overwritten with the boundary values carried in b before iterating.
  SolveStats solve(std::vector<double>& x, const std::vector<double>& b) const;

  const StencilOperator& finest() const;
  int level_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pnpcdft

#pragma once

#include <vector>

#include "pnpcdft/field.hpp"
#include "pnpcdft/grid.hpp"

namespace pnpcdft {

// Face coefficient rule shared by the operator assembly and the flux report.
double harmonic_mean(double a, double b);

// Seven-point control-volume discretization of -div(kappa grad x) on the
// node-centered grid, with Dirichlet rows on both y faces and zero-flux
// closure on the x and z faces. Every equation is scaled by its node's
// trapezoid control-volume fraction, so the face coefficient between two
// nodes is the same seen from either side:
//   c_face = harmonic(kappa_0, kappa_1) * w_perp / delta_axis^2
// with w_perp the product of the boundary halving factors of the two axes
// perpendicular to the face. The interior block is therefore symmetric
// positive definite and safe under conjugate gradients.
class StencilOperator {
 public:
  StencilOperator() = default;
  StencilOperator(const GridSpec& grid, const ScalarField& kappa, int threads = 1);

  const GridSpec& grid() const { return grid_; }

  bool is_dirichlet(int j) const { return j == 0 || j == grid_.ny - 1; }

  // y = A x; Dirichlet rows are identities.
  void apply(const std::vector<double>& x, std::vector<double>& y) const;

  // r = b - A x
  void residual(const std::vector<double>& x, const std::vector<double>& b,
                std::vector<double>& r) const;

  // One damped Jacobi sweep: x += omega * D^{-1} (b - A x).
  void jacobi(std::vector<double>& x, const std::vector<double>& b, double omega,
              std::vector<double>& scratch) const;

  const std::vector<double>& diagonal() const { return diag_; }

  // Face conductance between (i,j,k) and (i,j+1,k); used by the flux report
  // so transported currents match the solved equations coefficient for
  // coefficient.
  double face_y(int i, int j, int k) const {
    return cy_[(static_cast<std::size_t>(i) * (grid_.ny - 1) + j) * grid_.nz + k];
  }

  // Face conductances along the other two axes, indexed from the lower node.
  double face_x(int i, int j, int k) const {
    return cx_[(static_cast<std::size_t>(i) * grid_.ny + j) * grid_.nz + k];
  }
  double face_z(int i, int j, int k) const {
    return cz_[(static_cast<std::size_t>(i) * grid_.ny + j) * (grid_.nz - 1) + k];
  }

 private:
  GridSpec grid_;
  int threads_ = 1;
  std::vector<double> cx_, cy_, cz_;  // face coefficients per axis
  std::vector<double> diag_;
};

// RHS assembly for the control-volume scaling: interior rows carry
// w(node) * f(node), Dirichlet rows carry the boundary value itself.
std::vector<double> assemble_rhs(const GridSpec& grid, const ScalarField& f,
                                 const std::vector<double>& dirichlet_lo,
                                 const std::vector<double>& dirichlet_hi);

}  // namespace pnpcdft

#include "pnpcdft/stencil.hpp"

#include <cmath>
#include <stdexcept>

#include "pnpcdft/parallel.hpp"

namespace pnpcdft {

namespace {

double axis_weight(int idx, int n) { return (idx == 0 || idx == n - 1) ? 0.5 : 1.0; }

}  // namespace

double harmonic_mean(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("stencil coefficients must be positive");
  }
  return 2.0 * a * b / (a + b);
}

StencilOperator::StencilOperator(const GridSpec& grid, const ScalarField& kappa, int threads)
    : grid_(grid), threads_(threads) {
  if (!kappa.grid().same_shape(grid)) {
    throw std::invalid_argument("kappa field is on a different grid");
  }
  int nx = grid.nx, ny = grid.ny, nz = grid.nz;
  double idx2 = 1.0 / (grid.dx() * grid.dx());
  double idy2 = 1.0 / (grid.dy() * grid.dy());
  double idz2 = 1.0 / (grid.dz() * grid.dz());

  cx_.assign(static_cast<std::size_t>(nx - 1) * ny * nz, 0.0);
  cy_.assign(static_cast<std::size_t>(nx) * (ny - 1) * nz, 0.0);
  cz_.assign(static_cast<std::size_t>(nx) * ny * (nz - 1), 0.0);

  for (int i = 0; i + 1 < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      double wy = axis_weight(j, ny);
      for (int k = 0; k < nz; ++k) {
        double w = wy * axis_weight(k, nz);
        cx_[(static_cast<std::size_t>(i) * ny + j) * nz + k] =
            harmonic_mean(kappa(i, j, k), kappa(i + 1, j, k)) * w * idx2;
      }
    }
  }
  for (int i = 0; i < nx; ++i) {
    double wx = axis_weight(i, nx);
    for (int j = 0; j + 1 < ny; ++j) {
      for (int k = 0; k < nz; ++k) {
        double w = wx * axis_weight(k, nz);
        cy_[(static_cast<std::size_t>(i) * (ny - 1) + j) * nz + k] =
            harmonic_mean(kappa(i, j, k), kappa(i, j + 1, k)) * w * idy2;
      }
    }
  }
  for (int i = 0; i < nx; ++i) {
    double wx = axis_weight(i, nx);
    for (int j = 0; j < ny; ++j) {
      double w = wx * axis_weight(j, ny);
      for (int k = 0; k + 1 < nz; ++k) {
        cz_[(static_cast<std::size_t>(i) * ny + j) * (nz - 1) + k] =
            harmonic_mean(kappa(i, j, k), kappa(i, j, k + 1)) * w * idz2;
      }
    }
  }

  diag_.assign(grid.size(), 0.0);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      for (int k = 0; k < nz; ++k) {
        std::size_t n = grid.index(i, j, k);
        if (is_dirichlet(j)) {
          diag_[n] = 1.0;
          continue;
        }
        double d = 0.0;
        if (i > 0) d += cx_[(static_cast<std::size_t>(i - 1) * ny + j) * nz + k];
        if (i + 1 < nx) d += cx_[(static_cast<std::size_t>(i) * ny + j) * nz + k];
        d += cy_[(static_cast<std::size_t>(i) * (ny - 1) + j - 1) * nz + k];
        d += cy_[(static_cast<std::size_t>(i) * (ny - 1) + j) * nz + k];
        if (k > 0) d += cz_[(static_cast<std::size_t>(i) * ny + j) * (nz - 1) + k - 1];
        if (k + 1 < nz) d += cz_[(static_cast<std::size_t>(i) * ny + j) * (nz - 1) + k];
        diag_[n] = d;
      }
    }
  }
}

void StencilOperator::apply(const std::vector<double>& x, std::vector<double>& y) const {
  if (x.size() != grid_.size()) throw std::invalid_argument("apply: wrong vector length");
  y.resize(x.size());
  int nx = grid_.nx, ny = grid_.ny, nz = grid_.nz;
  parallel_for(0, static_cast<std::size_t>(nx), threads_, [&](std::size_t ilo, std::size_t ihi) {
    for (int i = static_cast<int>(ilo); i < static_cast<int>(ihi); ++i) {
      for (int j = 0; j < ny; ++j) {
        for (int k = 0; k < nz; ++k) {
          std::size_t n = grid_.index(i, j, k);
          if (is_dirichlet(j)) {
            y[n] = x[n];
            continue;
          }
          double acc = 0.0;
          double xc = x[n];
          if (i > 0) {
            double c = cx_[(static_cast<std::size_t>(i - 1) * ny + j) * nz + k];
            acc += c * (xc - x[grid_.index(i - 1, j, k)]);
          }
          if (i + 1 < nx) {
            double c = cx_[(static_cast<std::size_t>(i) * ny + j) * nz + k];
            acc += c * (xc - x[grid_.index(i + 1, j, k)]);
          }
          {
            double c = cy_[(static_cast<std::size_t>(i) * (ny - 1) + j - 1) * nz + k];
            acc += c * (xc - x[grid_.index(i, j - 1, k)]);
            c = cy_[(static_cast<std::size_t>(i) * (ny - 1) + j) * nz + k];
            acc += c * (xc - x[grid_.index(i, j + 1, k)]);
          }
          if (k > 0) {
            double c = cz_[(static_cast<std::size_t>(i) * ny + j) * (nz - 1) + k - 1];
            acc += c * (xc - x[grid_.index(i, j, k - 1)]);
          }
          if (k + 1 < nz) {
            double c = cz_[(static_cast<std::size_t>(i) * ny + j) * (nz - 1) + k];
            acc += c * (xc - x[grid_.index(i, j, k + 1)]);
          }
          y[n] = acc;
        }
      }
    }
  });
}

void StencilOperator::residual(const std::vector<double>& x, const std::vector<double>& b,
                               std::vector<double>& r) const {
  apply(x, r);
  for (std::size_t n = 0; n < r.size(); ++n) r[n] = b[n] - r[n];
}

void StencilOperator::jacobi(std::vector<double>& x, const std::vector<double>& b, double omega,
                             std::vector<double>& scratch) const {
  residual(x, b, scratch);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] += omega * scratch[n] / diag_[n];
}

std::vector<double> assemble_rhs(const GridSpec& grid, const ScalarField& f,
                                 const std::vector<double>& dirichlet_lo,
                                 const std::vector<double>& dirichlet_hi) {
  std::size_t plane = static_cast<std::size_t>(grid.nx) * grid.nz;
  if (dirichlet_lo.size() != plane || dirichlet_hi.size() != plane) {
    throw std::invalid_argument("assemble_rhs: boundary plane size mismatch");
  }
  std::vector<double> b(grid.size());
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      for (int k = 0; k < grid.nz; ++k) {
        std::size_t n = grid.index(i, j, k);
        if (j == 0) {
          b[n] = dirichlet_lo[static_cast<std::size_t>(i) * grid.nz + k];
        } else if (j == grid.ny - 1) {
          b[n] = dirichlet_hi[static_cast<std::size_t>(i) * grid.nz + k];
        } else {
          b[n] = grid.trapezoid_weight(i, j, k) * f(i, j, k);
        }
      }
    }
  }
  return b;
}

}  // namespace pnpcdft

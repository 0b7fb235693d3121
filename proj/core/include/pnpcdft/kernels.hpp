#pragma once

#include "pnpcdft/convolution.hpp"
#include "pnpcdft/grid.hpp"

namespace pnpcdft {

// Radius of the sphere with the volume of one grid cell; the singular kernels
// are averaged over this sphere at the zero offset so the lattice sum keeps
// the kernel's integral over the central cell.
double equivalent_cell_radius(const GridSpec& grid);

// 1/|s| Coulomb kernel; value at s=0 is the cell average 3/(2 r_eq).
KernelFn coulomb_kernel(const GridSpec& grid);

// Indicator of the ball |s| <= R, evaluated as the exact overlap fraction of
// the grid cell centered at the offset with the ball. Summed against the cell
// volume this reproduces the ball volume exactly, so uniform-density weighted
// densities are exact and smooth fields see an O(h^2) quadrature error.
KernelFn ball_kernel(const GridSpec& grid, double R);

// Attractive square well: -eps for sigma <= |s| <= gamma*sigma, zero outside
// (the hard-core branch is excluded volume and lives in the hs functional).
KernelFn square_well_kernel(double sigma, double gamma, double eps_eV);

// MSA two-particle direct correlation for a charged pair inside its contact
// diameter:  C(s) = -prefactor * (2B/sigma - (B/sigma)^2 s - 1/s),  s <= sigma
// with prefactor = q_i q_j l_B [nm]. The zero offset takes the cell average of
// the full composite expression over the equivalent sphere.
KernelFn msa_kernel(const GridSpec& grid, double sigma, double B, double prefactor);

// B(xi) = [xi + 1 - sqrt(1 + 2 xi)]/xi with the xi->0 series xi/2 - xi^2/2
// taking over below 1e-6 where the closed form loses digits.
double msa_b_parameter(double xi);

// Exact volume of the intersection of the sphere |r| <= R with the box
// [x0,x1]x[y0,y1]x[z0,z1]. Used to build the ball kernel and exposed for its
// tests.
double sphere_box_overlap(double R, double x0, double x1, double y0, double y1, double z0,
                          double z1);

}  // namespace pnpcdft

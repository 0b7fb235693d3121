#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pnpcdft/field.hpp"
#include "pnpcdft/grid.hpp"

namespace pnpcdft {

// Total number current of one species through each y-face plane [1/s].
// Face j sits between node rows j and j+1; the y flux density at a face is
//   -harmonic_mean(dbar_j, dbar_j+1) * (rhobar_j+1 - rhobar_j) / dy
// and the plane integral applies the trapezoid weights of the transverse
// axes. In a converged steady state all planes carry the same current.
std::vector<double> plane_currents(const ScalarField& dbar, const ScalarField& rhobar);

// Largest relative deviation of the plane currents from their mean;
// the steady-state conservation measure.
double plane_current_spread(const std::vector<double>& currents);

// Conductivity from the per-species plane currents [S/cm]. The mean charge
// current density is divided by the applied field -V/L_y; with both carrier
// signs contributing a transport current the result is positive for a
// positive applied voltage.
double conductivity_S_cm(const GridSpec& grid, const std::vector<double>& valence,
                         const std::vector<std::vector<double>>& currents,
                         double applied_voltage_V);

// One row of a parameter sweep.
struct SweepPoint {
  double axis = 0.0;
  double sigma_S_cm = 0.0;
  double F_sh_eV = 0.0;
  int iterations = 0;
  double seconds = 0.0;
};

void write_sweep_csv(const std::string& path, const std::vector<SweepPoint>& points);

// Companion plot script: plots column 2 of the CSV against column 1.
void write_sweep_gnuplot(const std::string& path, const std::string& csv_name,
                         const std::string& xlabel);

// Least-squares slope of log(y) against log(x); the scaling exponent check.
double fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

// One grid refinement of the scaling probe: accumulated FFT and quadrature
// wall time over a fixed number of functional evaluations, plus the
// multigrid cycle counts of the last outer iteration.
struct ComplexityPoint {
  int nodes_per_cell = 0;
  std::size_t nodes = 0;
  int evaluations = 0;
  double fft_seconds = 0.0;
  double quadrature_seconds = 0.0;
  double solve_seconds = 0.0;
  int poisson_cycles = 0;
  int np_cycles_max = 0;
};

void write_complexity_csv(const std::string& path, const std::vector<ComplexityPoint>& points);

// Slope of log(fft time per evaluation) against log(node count).
double fft_scaling_slope(const std::vector<ComplexityPoint>& points);

}  // namespace pnpcdft

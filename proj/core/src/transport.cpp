#include "pnpcdft/transport.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "pnpcdft/constants.hpp"
#include "pnpcdft/stencil.hpp"

namespace pnpcdft {

std::vector<double> plane_currents(const ScalarField& dbar, const ScalarField& rhobar) {
  const GridSpec& g = dbar.grid();
  if (!g.same_shape(rhobar.grid())) {
    throw std::invalid_argument("plane_currents: grids differ");
  }
  double dy = g.dy();
  double face_area = g.dx() * g.dz();
  std::vector<double> F(static_cast<std::size_t>(g.ny) - 1, 0.0);
  for (int j = 0; j + 1 < g.ny; ++j) {
    double acc = 0.0;
    for (int i = 0; i < g.nx; ++i) {
      double wx = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
      for (int k = 0; k < g.nz; ++k) {
        double wz = (k == 0 || k == g.nz - 1) ? 0.5 : 1.0;
        double kf = harmonic_mean(dbar(i, j, k), dbar(i, j + 1, k));
        double flux = -kf * (rhobar(i, j + 1, k) - rhobar(i, j, k)) / dy;
        acc += wx * wz * face_area * flux;
      }
    }
    F[j] = acc;
  }
  return F;
}

double plane_current_spread(const std::vector<double>& currents) {
  if (currents.empty()) return 0.0;
  double mean = 0.0;
  for (double c : currents) mean += c;
  mean /= static_cast<double>(currents.size());
  double denom = std::abs(mean);
  if (denom == 0.0) {
    // All-zero currents are perfectly uniform; otherwise report absolutely.
    double worst = 0.0;
    for (double c : currents) worst = std::max(worst, std::abs(c));
    return worst;
  }
  double worst = 0.0;
  for (double c : currents) worst = std::max(worst, std::abs(c - mean));
  return worst / denom;
}

double conductivity_S_cm(const GridSpec& grid, const std::vector<double>& valence,
                         const std::vector<std::vector<double>>& currents,
                         double applied_voltage_V) {
  if (valence.size() != currents.size()) {
    throw std::invalid_argument("conductivity: species count mismatch");
  }
  if (applied_voltage_V == 0.0) {
    throw std::invalid_argument("conductivity: applied voltage is zero");
  }
  std::size_t nfaces = static_cast<std::size_t>(grid.ny) - 1;
  double dy = grid.dy();
  double area = grid.lx * grid.lz;  // nm^2

  // y-averaged charge current density [A/nm^2]
  double avg = 0.0;
  for (std::size_t j = 0; j < nfaces; ++j) {
    double I = 0.0;  // [e/s]
    for (std::size_t m = 0; m < valence.size(); ++m) {
      if (currents[m].size() != nfaces) {
        throw std::invalid_argument("conductivity: face count mismatch");
      }
      I += valence[m] * currents[m][j];
    }
    avg += I * dy;
  }
  avg *= constants::elementary_charge_C / (grid.ly * area);

  double field = -applied_voltage_V / grid.ly;  // V/nm
  return avg / field * constants::nm_per_cm;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepPoint>& points) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "axis, sigma_S_per_cm, F_sh_eV, iterations, seconds\n";
  char buf[256];
  for (const SweepPoint& p : points) {
    std::snprintf(buf, sizeof(buf), "%.17g, %.17g, %.17g, %d, %.3f\n", p.axis, p.sigma_S_cm,
                  p.F_sh_eV, p.iterations, p.seconds);
    out << buf;
  }
}

void write_sweep_gnuplot(const std::string& path, const std::string& csv_name,
                         const std::string& xlabel) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "set datafile separator ','\n"
      << "set xlabel '" << xlabel << "'\n"
      << "set ylabel 'sigma [S/cm]'\n"
      << "set logscale y\n"
      << "set grid\n"
      << "plot '" << csv_name << "' using 1:2 with linespoints title 'conductivity'\n";
}

double fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) {
    throw std::invalid_argument("slope fit needs at least two points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) {
      throw std::invalid_argument("slope fit needs positive coordinates");
    }
    double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double n = static_cast<double>(points.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_complexity_csv(const std::string& path, const std::vector<ComplexityPoint>& points) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "nodes_per_cell, nodes, evaluations, fft_seconds, quadrature_seconds, solve_seconds, "
         "poisson_cycles, np_cycles_max\n";
  char buf[256];
  for (const ComplexityPoint& p : points) {
    std::snprintf(buf, sizeof(buf), "%d, %zu, %d, %.6f, %.6f, %.6f, %d, %d\n", p.nodes_per_cell,
                  p.nodes, p.evaluations, p.fft_seconds, p.quadrature_seconds, p.solve_seconds,
                  p.poisson_cycles, p.np_cycles_max);
    out << buf;
  }
}

double fft_scaling_slope(const std::vector<ComplexityPoint>& points) {
  std::vector<std::pair<double, double>> xy;
  for (const ComplexityPoint& p : points) {
    const int evals = p.evaluations > 0 ? p.evaluations : 1;
    xy.emplace_back(static_cast<double>(p.nodes), p.fft_seconds / evals);
  }
  return fit_loglog_slope(xy);
}

}  // namespace pnpcdft

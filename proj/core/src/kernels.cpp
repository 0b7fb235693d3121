#include "pnpcdft/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pnpcdft/constants.hpp"
#include "pnpcdft/shell_quadrature.hpp"

namespace pnpcdft {

namespace {

// Antiderivative piece of the circular segment: integral of sqrt(rho^2 - x^2).
double circle_area_integral(double rho, double a, double b) {
  auto prim = [rho](double x) {
    double t = std::clamp(x / rho, -1.0, 1.0);
    double c = std::sqrt(std::max(0.0, rho * rho - x * x));
    return 0.5 * (x * c + rho * rho * std::asin(t));
  };
  return prim(b) - prim(a);
}

// Area of the disc x^2 + y^2 <= rho^2 intersected with [x0,x1] x [y0,y1].
// The vertical extent min(y1, c) - max(y0, -c) with c = sqrt(rho^2 - x^2)
// changes branch only where c crosses |y0| or |y1|, so splitting at those
// abscissae leaves pieces with a fixed branch that integrate in closed form.
double disc_rect_area(double rho, double x0, double x1, double y0, double y1) {
  if (rho <= 0.0) return 0.0;
  double xa = std::max(x0, -rho);
  double xb = std::min(x1, rho);
  if (xa >= xb) return 0.0;

  double cuts[6];
  int ncuts = 0;
  cuts[ncuts++] = xa;
  cuts[ncuts++] = xb;
  for (double y : {y0, y1}) {
    if (std::abs(y) < rho) {
      double xc = std::sqrt(rho * rho - y * y);
      if (-xc > xa && -xc < xb) cuts[ncuts++] = -xc;
      if (xc > xa && xc < xb) cuts[ncuts++] = xc;
    }
  }
  std::sort(cuts, cuts + ncuts);

  double area = 0.0;
  for (int p = 0; p + 1 < ncuts; ++p) {
    double a = cuts[p];
    double b = cuts[p + 1];
    if (b - a <= 0.0) continue;
    double xm = 0.5 * (a + b);
    double cm = std::sqrt(std::max(0.0, rho * rho - xm * xm));
    bool top_curve = cm < y1;
    bool bot_curve = -cm > y0;
    double top_m = top_curve ? cm : y1;
    double bot_m = bot_curve ? -cm : y0;
    if (top_m <= bot_m) continue;

    double piece = 0.0;
    if (top_curve) {
      piece += circle_area_integral(rho, a, b);
    } else {
      piece += y1 * (b - a);
    }
    if (bot_curve) {
      piece += circle_area_integral(rho, a, b);
    } else {
      piece -= y0 * (b - a);
    }
    area += piece;
  }
  return area;
}

}  // namespace

double sphere_box_overlap(double R, double x0, double x1, double y0, double y1, double z0,
                          double z1) {
  if (R <= 0.0) return 0.0;
  double zlo = std::max(z0, -R);
  double zhi = std::min(z1, R);
  if (zlo >= zhi) return 0.0;

  // The cross-section area is analytic in z except where the disc radius
  // crosses a distance at which its contact with the rectangle changes:
  // the edge offsets and the corner distances.
  std::vector<double> crit = {std::abs(x0), std::abs(x1), std::abs(y0), std::abs(y1)};
  for (double cx : {x0, x1}) {
    for (double cy : {y0, y1}) {
      crit.push_back(std::hypot(cx, cy));
    }
  }
  std::vector<double> cuts = {zlo, zhi};
  for (double rc : crit) {
    if (rc < R) {
      double zc = std::sqrt(R * R - rc * rc);
      for (double z : {-zc, zc}) {
        if (z > zlo && z < zhi) cuts.push_back(z);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());

  static const std::vector<std::pair<double, double>> gl = gauss_legendre(24);

  double volume = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    double a = cuts[p];
    double b = cuts[p + 1];
    if (b - a <= 1e-15 * R) continue;
    double mid = 0.5 * (a + b);
    double half = 0.5 * (b - a);
    double piece = 0.0;
    for (const auto& [node, weight] : gl) {
      double z = mid + half * node;
      double rho = std::sqrt(std::max(0.0, R * R - z * z));
      piece += weight * disc_rect_area(rho, x0, x1, y0, y1);
    }
    volume += half * piece;
  }
  return volume;
}

double equivalent_cell_radius(const GridSpec& grid) {
  return std::cbrt(3.0 * grid.cell_volume() / (4.0 * constants::pi));
}

KernelFn coulomb_kernel(const GridSpec& grid) {
  double r_eq = equivalent_cell_radius(grid);
  double center = 1.5 / r_eq;
  return [center](double sx, double sy, double sz) {
    double r = std::sqrt(sx * sx + sy * sy + sz * sz);
    if (r < 1e-300) return center;
    return 1.0 / r;
  };
}

KernelFn ball_kernel(const GridSpec& grid, double R) {
  double hx = 0.5 * grid.dx();
  double hy = 0.5 * grid.dy();
  double hz = 0.5 * grid.dz();
  double inv_cell = 1.0 / grid.cell_volume();
  return [=](double sx, double sy, double sz) {
    double ax = std::abs(sx);
    double ay = std::abs(sy);
    double az = std::abs(sz);
    double nx = std::max(0.0, ax - hx);
    double ny = std::max(0.0, ay - hy);
    double nz = std::max(0.0, az - hz);
    if (nx * nx + ny * ny + nz * nz >= R * R) return 0.0;
    double fx = ax + hx;
    double fy = ay + hy;
    double fz = az + hz;
    if (fx * fx + fy * fy + fz * fz <= R * R) return 1.0;
    return sphere_box_overlap(R, sx - hx, sx + hx, sy - hy, sy + hy, sz - hz, sz + hz) *
           inv_cell;
  };
}

KernelFn square_well_kernel(double sigma, double gamma, double eps_eV) {
  double outer = gamma * sigma;
  return [sigma, outer, eps_eV](double sx, double sy, double sz) {
    double r = std::sqrt(sx * sx + sy * sy + sz * sz);
    if (r >= sigma && r <= outer) return -eps_eV;
    return 0.0;
  };
}

double msa_b_parameter(double xi) {
  if (xi < 1e-6) return 0.5 * xi - 0.5 * xi * xi;
  return (xi + 1.0 - std::sqrt(1.0 + 2.0 * xi)) / xi;
}

KernelFn msa_kernel(const GridSpec& grid, double sigma, double B, double prefactor) {
  double r_eq = equivalent_cell_radius(grid);
  double m = std::min(r_eq, sigma);
  // Cell average of the composite over the equivalent sphere: integrating
  // (2B/sigma - (B/sigma)^2 r - 1/r) r^2 against 3/r_eq^3.
  double center = -prefactor *
                  (2.0 * B * m * m * m / sigma - 0.75 * B * B * m * m * m * m / (sigma * sigma) -
                   1.5 * m * m) /
                  (r_eq * r_eq * r_eq);
  return [sigma, B, prefactor, center](double sx, double sy, double sz) {
    double r = std::sqrt(sx * sx + sy * sy + sz * sz);
    if (r < 1e-300) return center;
    if (r > sigma) return 0.0;
    return -prefactor * (2.0 * B / sigma - (B / sigma) * (B / sigma) * r - 1.0 / r);
  };
}

}  // namespace pnpcdft

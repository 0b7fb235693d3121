#include "pnpcdft/fmt_functional.hpp"

#include <cmath>
#include <stdexcept>

#include "pnpcdft/constants.hpp"

namespace pnpcdft {

namespace {

double dot(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

constexpr double kSeriesEdge = 0.01;

// 36 pi f1 = sum_{m>=0} [(m+2) - 1/(m+2)] x^m; ten terms are converged to
// machine precision inside the series window.
double f1_series(double x) {
  double s = 0.0;
  double xm = 1.0;
  for (int m = 0; m <= 10; ++m) {
    double c = (m + 2.0) - 1.0 / (m + 2.0);
    s += c * xm;
    xm *= x;
  }
  return s / (36.0 * constants::pi);
}

double f1_prime_series(double x) {
  double s = 0.0;
  double xm = 1.0;
  for (int m = 1; m <= 11; ++m) {
    double c = (m + 2.0) - 1.0 / (m + 2.0);
    s += m * c * xm;
    xm *= x;
  }
  return s / (36.0 * constants::pi);
}

}  // namespace

double mfmt_f1(double n3) {
  if (std::abs(n3) < kSeriesEdge) return f1_series(n3);
  double om = 1.0 - n3;
  return (std::log(om) / (n3 * n3) + 1.0 / (n3 * om * om)) / (36.0 * constants::pi);
}

double mfmt_f1_prime(double n3) {
  if (std::abs(n3) < kSeriesEdge) return f1_prime_series(n3);
  double om = 1.0 - n3;
  double x2 = n3 * n3;
  double x3 = x2 * n3;
  return (-1.0 / (x2 * om) - 2.0 * std::log(om) / x3 - 1.0 / (x2 * om * om) +
          2.0 / (n3 * om * om * om)) /
         (36.0 * constants::pi);
}

double phi_hs(const WeightedDensities& n, HsFunctional variant) {
  double om = 1.0 - n.n3;
  if (!(om > 0.0)) throw std::domain_error("hard-sphere packing n3 >= 1");
  double third = n.n2 * n.n2 * n.n2 - 3.0 * n.n2 * dot(n.nv2, n.nv2);
  double coef = variant == HsFunctional::fmt
                    ? 1.0 / (24.0 * constants::pi * om * om)
                    : mfmt_f1(n.n3);
  return -n.n0 * std::log(om) + (n.n1 * n.n2 - dot(n.nv1, n.nv2)) / om + coef * third;
}

HsPartials phi_hs_partials(const WeightedDensities& n, HsFunctional variant) {
  double om = 1.0 - n.n3;
  if (!(om > 0.0)) throw std::domain_error("hard-sphere packing n3 >= 1");
  double v2sq = dot(n.nv2, n.nv2);
  double third = n.n2 * n.n2 * n.n2 - 3.0 * n.n2 * v2sq;

  HsPartials d;
  d.d0 = -std::log(om);
  d.d1 = n.n2 / om;
  d.d3 = n.n0 / om + (n.n1 * n.n2 - dot(n.nv1, n.nv2)) / (om * om);

  double coef;
  double coef_d3;
  if (variant == HsFunctional::fmt) {
    coef = 1.0 / (24.0 * constants::pi * om * om);
    coef_d3 = 2.0 / (24.0 * constants::pi * om * om * om);
  } else {
    coef = mfmt_f1(n.n3);
    coef_d3 = mfmt_f1_prime(n.n3);
  }
  d.d2 = n.n1 / om + coef * 3.0 * (n.n2 * n.n2 - v2sq);
  d.d3 += coef_d3 * third;
  for (int c = 0; c < 3; ++c) {
    d.dv1[c] = -n.nv2[c] / om;
    d.dv2[c] = -n.nv1[c] / om - coef * 6.0 * n.n2 * n.nv2[c];
  }
  return d;
}

}  // namespace pnpcdft

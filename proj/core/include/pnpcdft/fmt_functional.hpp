#pragma once

#include <array>

namespace pnpcdft {

// Scalar and vector weighted densities at one point. Units: n0 [nm^-3],
// n1 [nm^-2], n2 [nm^-1], n3 [1]; vector components match n1/n2.
struct WeightedDensities {
  double n0 = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
  double n3 = 0.0;
  std::array<double, 3> nv1{0.0, 0.0, 0.0};
  std::array<double, 3> nv2{0.0, 0.0, 0.0};
};

struct HsPartials {
  double d0 = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  std::array<double, 3> dv1{0.0, 0.0, 0.0};
  std::array<double, 3> dv2{0.0, 0.0, 0.0};
};

enum class HsFunctional {
  fmt,   // original form, third term with 1/(24 pi (1-n3)^2)
  mfmt,  // modified form, third term with f1(n3)
};

// Free energy density Phi in units of kT per nm^3.
double phi_hs(const WeightedDensities& n, HsFunctional variant);

// Analytic partial derivatives of Phi with respect to each weighted density.
HsPartials phi_hs_partials(const WeightedDensities& n, HsFunctional variant);

// f1 coefficient of the modified functional and its derivative, with a series
// branch below |n3| = 0.01 where the closed form cancels catastrophically.
// f1(0) = 1/(24 pi) recovers the original functional's coefficient.
double mfmt_f1(double n3);
double mfmt_f1_prime(double n3);

}  // namespace pnpcdft

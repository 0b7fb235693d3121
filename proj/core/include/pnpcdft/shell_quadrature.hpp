#pragma once

#include <utility>
#include <vector>

#include "pnpcdft/field.hpp"

namespace pnpcdft {

// Gauss-Legendre nodes and weights on [-1,1]. Computed by Newton iteration on
// the Legendre recurrence; deterministic to machine precision.
std::vector<std::pair<double, double>> gauss_legendre(int n);

// Product quadrature on the unit sphere: uniform trapezoid in the azimuth
// (exact for trigonometric polynomials below the point count) times
// Gauss-Legendre in the cosine of the polar angle. Weights sum to 4*pi
// exactly, so spherical integrals of constants are exact.
struct SphereRule {
  struct Point {
    double sx, sy, sz;  // unit direction
    double w;           // combined solid-angle weight
  };
  int n_theta = 0, n_phi = 0;
  std::vector<Point> points;
};

SphereRule make_sphere_rule(int n_theta, int n_phi);

// Surface integral over the sphere of radius R centered at every node:
//   out(r) = R^2 * sum_q w_q f(r + R*s_q)
// f is sampled by trilinear interpolation; samples outside the box contribute
// zero, consistent with integrals that extend over the box only.
ScalarField shell_integral(const ScalarField& f, double R, const SphereRule& rule,
                           int threads = 1);

// Fused scalar + direction-weighted shell integrals of the same field:
//   s(r) = R^2 sum w f(r+Rs),  v(r) = R^2 sum w f(r+Rs) * s
// The direction factor is the unit vector from r to the sample point, which
// is the density-weighting orientation; potential-weighting flips its sign.
void shell_scalar_and_vector(const ScalarField& f, double R, const SphereRule& rule,
                             ScalarField& scalar_out, VectorField& vector_out, int threads = 1);

// Direction-projected shell integral of a vector field:
//   out(r) = R^2 sum w [F(r+Rs) . s] * dir_sign
// dir_sign=+1 samples the density orientation, -1 the potential orientation.
ScalarField shell_dot_direction(const VectorField& F, double R, const SphereRule& rule,
                                double dir_sign, int threads = 1);

}  // namespace pnpcdft

#include "pnpcdft/thermo.hpp"

#include <cmath>
#include <stdexcept>

namespace pnpcdft {

Thermo::Thermo(double T, double eps_r) : temperature_K(T), relative_permittivity(eps_r) {
  if (!(T > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (!(eps_r > 0.0)) throw std::invalid_argument("relative permittivity must be positive");
}

double Thermo::dh_A() const {
  return 1.82e6 * std::pow(relative_permittivity * temperature_K, -1.5);
}

double Thermo::dh_B() const {
  return 50.3 * std::pow(relative_permittivity * temperature_K, -0.5);
}

double Thermo::kappa_squared(const double* rho_bulk, const double* valence, int n) const {
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    s += rho_bulk[i] * valence[i] * valence[i];
  }
  return 4.0 * constants::pi * bjerrum_nm() * s;
}

}  // namespace pnpcdft

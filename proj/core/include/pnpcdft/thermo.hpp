#pragma once

#include "pnpcdft/constants.hpp"

namespace pnpcdft {

// Temperature/permittivity-derived scalars used throughout the model.
// Lengths in nm, energies in eV.
struct Thermo {
  double temperature_K;
  double relative_permittivity;

  Thermo(double T, double eps_r);

  double kT() const { return constants::k_boltzmann_eV_K * temperature_K; }
  double beta() const { return 1.0 / kT(); }

  // Bjerrum length: separation at which the pair Coulomb energy equals kT.
  double bjerrum_nm() const {
    return constants::coulomb_eV_nm / (relative_permittivity * kT());
  }

  // Debye-Hueckel limiting-law coefficients in the printed parametrization.
  // A multiplies q^2 sqrt(I); B multiplies the ion-size term a sqrt(I) with
  // a in Angstrom.
  double dh_A() const;
  double dh_B() const;

  // Inverse screening length squared for a set of bulk charge densities:
  // kappa^2 = 4 pi l_B sum rho_i q_i^2, densities in nm^-3.
  double kappa_squared(const double* rho_bulk, const double* valence, int n) const;
};

}  // namespace pnpcdft

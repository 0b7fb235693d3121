#pragma once

// Physical constants (CODATA 2018) in the unit system used throughout:
// lengths in nm, energies in eV, temperatures in K, number densities in nm^-3.
// Everything downstream derives from this one table; SI creeps in only at the
// conductivity conversion in transport_analysis.

namespace pnpcdft::constants {

// Boltzmann constant [eV/K]
inline constexpr double k_boltzmann_eV_K = 8.617333262e-5;

// Elementary charge [C], used only when converting charge flux to amperes.
inline constexpr double elementary_charge_C = 1.602176634e-19;

// e^2/(4 pi eps0) [eV nm]: Coulomb energy of two unit charges 1 nm apart.
inline constexpr double coulomb_eV_nm = 1.4399645478425668;

// nm^2 per cm^2, for diffusion coefficients supplied in cm^2/s.
inline constexpr double nm2_per_cm2 = 1.0e14;

// nm per cm, for the final S/nm -> S/cm conversion.
inline constexpr double nm_per_cm = 1.0e7;

inline constexpr double pi = 3.14159265358979323846;

}  // namespace pnpcdft::constants

#pragma once

#include <string>
#include <vector>

namespace pnpcdft {

// One particle species. Mobile species carry a diffusion coefficient and a
// reservoir density; stationary species are represented by a fixed density
// field built from site positions and participate only through the
// functionals.
struct SpeciesSpec {
  std::string name;
  double valence = 0.0;
  double diameter_nm = 0.0;
  double diffusion_cm2_s = 0.0;
  double bulk_nm3 = 0.0;
  // Debye-Hueckel size parameter in Angstrom; 0 means "use 10 * diameter_nm".
  double dh_size_A = 0.0;
  bool mobile = true;

  double radius_nm() const { return 0.5 * diameter_nm; }
  double dh_size_or_default() const {
    return dh_size_A > 0.0 ? dh_size_A : 10.0 * diameter_nm;
  }
};

// Attractive square well between a mobile species and a stationary one.
// Depth is positive; the kernel carries the sign.
struct SquareWellSpec {
  std::string mobile;
  std::string stationary;
  double depth_eV = 0.0;
};

int find_species(const std::vector<SpeciesSpec>& all, const std::string& name);

}  // namespace pnpcdft

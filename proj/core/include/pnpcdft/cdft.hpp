#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pnpcdft/convolution.hpp"
#include "pnpcdft/field.hpp"
#include "pnpcdft/fmt_functional.hpp"
#include "pnpcdft/grid.hpp"
#include "pnpcdft/species.hpp"
#include "pnpcdft/thermo.hpp"

namespace pnpcdft {

struct CdftSettings {
  HsFunctional functional = HsFunctional::fmt;
  // Multiplies kT ln(gamma rho / rho_bulk) in the ideal term; the model is
  // stated with -1, the conventional dilute-solution form is +1.
  int ideal_mu_sign = -1;
  int quad_theta = 16;
  int quad_phi = 16;
  double rho_floor = 1e-30;  // densities are clamped to this inside logarithms
  double well_gamma = 1.2;   // square-well outer radius in units of contact sigma
  double packing_limit = 0.999;
  int threads = 1;
};

// Raised when the local packing fraction reaches the functional's pole.
class PackingError : public std::runtime_error {
 public:
  PackingError(int i, int j, int k, double n3);
  int i, j, k;
  double n3;
};

// Evaluates the ideal and excess chemical potential fields of the mobile
// species for a given set of mobile densities, holding the stationary species
// densities and every convolution plan fixed.
//
// Excess parts, all in eV:
//   hard sphere    - weighted-density functional derivative
//   short range    - square-well attraction to stationary species (static)
//   coulomb        - mean-field 1/r convolution of the mobile charge density
//   electrostatic  - residual MSA correlation of density deviations from bulk
class ChemicalPotentialEngine {
 public:
  ChemicalPotentialEngine(const GridSpec& grid, const Thermo& thermo,
                          std::vector<SpeciesSpec> species, std::vector<SquareWellSpec> wells,
                          std::vector<std::pair<std::string, ScalarField>> stationary_density,
                          CdftSettings settings);
  ~ChemicalPotentialEngine();
  ChemicalPotentialEngine(ChemicalPotentialEngine&&) noexcept;
  ChemicalPotentialEngine& operator=(ChemicalPotentialEngine&&) noexcept;

  int mobile_count() const;
  const SpeciesSpec& mobile(int m) const;
  const GridSpec& grid() const;
  const CdftSettings& settings() const;

  // Recomputes all potential fields from the given mobile densities, ordered
  // like the mobile subset of the constructor's species list.
  void evaluate(const std::vector<ScalarField>& rho);

  const ScalarField& mu_ideal(int m) const;
  const ScalarField& ln_gamma(int m) const;  // Debye-Hueckel activity, from the last evaluate
  const ScalarField& mu_excess(int m) const;
  const ScalarField& mu_hard_sphere(int m) const;
  const ScalarField& mu_short_range(int m) const;  // static, valid from construction
  const ScalarField& mu_coulomb(int m) const;
  const ScalarField& mu_electrostatic(int m) const;

  // Excess chemical potential of the uniform bulk mobile mixture with no
  // sites and no net charge; only the hard-sphere part survives there.
  double mu_excess_bulk(int m) const;

  // Debye-Hueckel activity at the bulk composition. Face nodes pinned to the
  // bulk densities see exactly this value.
  double ln_gamma_bulk(int m) const;

  // Ideal part evaluated for a single node's densities; used for boundary
  // rows where the mobile densities are pinned to bulk.
  double mu_ideal_at(int m, const std::vector<double>& rho_node) const;

  // Square-well attraction free energy of the ordered mobile/stationary pair
  // sum, in eV. Non-positive for purely attractive wells.
  double short_range_free_energy(const std::vector<ScalarField>& rho) const;

  double max_packing() const;
  const ScalarField& packing() const;  // n3 from the last evaluate

  struct Timing {
    double fft_seconds = 0.0;
    double quadrature_seconds = 0.0;
  };
  const Timing& timing() const;
  void reset_timing();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pnpcdft

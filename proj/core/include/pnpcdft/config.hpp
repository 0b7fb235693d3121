#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pnpcdft/cdft.hpp"
#include "pnpcdft/field.hpp"
#include "pnpcdft/grid.hpp"
#include "pnpcdft/gummel.hpp"
#include "pnpcdft/multigrid.hpp"
#include "pnpcdft/sites.hpp"
#include "pnpcdft/species.hpp"
#include "pnpcdft/thermo.hpp"

namespace pnpcdft {

// Raised for malformed input, unknown or duplicate keys, values outside
// their admissible range, and missing required keys. The message names the
// offending key.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value configuration. Every physical parameter of the reference
// system has a key with its reference value as default; the three site
// fractional coordinate triplets have no physical default and are required
// unless an explicit site file is named.
struct SimulationConfig {
  double temperature_K = 223.0;
  double relative_permittivity = 16.6;

  double lattice_a_nm = 1.053;
  double lattice_b_nm = 0.612;
  double lattice_c_nm = 0.493;
  int cells_x = 2;
  int cells_y = 150;
  int cells_z = 5;
  int nodes_per_cell = 8;

  double applied_voltage_V = 0.01;
  double fixed_charge_per_nm2 = 0.1;

  std::string functional = "fmt";  // "fmt" or "mfmt"
  int ideal_mu_sign = -1;
  int quad_theta = 16;
  int quad_phi = 16;
  int threads = 1;

  double li_valence = 1.0;
  double li_diameter_nm = 0.06;
  double li_diffusion_cm2_s = 1e-6;
  double li_bulk_nm3 = 6.02e-5;
  double li_dh_size_A = 0.0;  // 0 = ten times the diameter in nm

  double e_valence = -1.0;
  double e_diameter_nm = 0.001;
  double e_diffusion_cm2_s = 1e-6;
  double e_bulk_nm3 = 6.02e-5;
  double e_dh_size_A = 0.0;

  double site_diameter_nm = 0.2;
  double site_gaussian_sigma_nm = 0.05;
  std::string site_file;  // when set, replaces the generated motif

  // Fractional positions of the three site types inside one lattice cell.
  // Required (no physical default) when no site file is given.
  double s1_frac[3] = {-1.0, -1.0, -1.0};
  double s2_frac[3] = {-1.0, -1.0, -1.0};
  double s3_frac[3] = {-1.0, -1.0, -1.0};

  double well_li_s1_eV = 0.21;
  double well_li_s2_eV = 0.17;
  double well_li_s3_eV = 0.17;
  double well_gamma = 1.2;

  double gummel_tol_u = 1e-6;
  double gummel_tol_rho = 1e-5;
  double gummel_lambda_u = 0.2;
  double gummel_lambda_rho = 1.0;
  int gummel_max_iterations = 200;
  double gummel_exp_clamp = 500.0;
  int checkpoint_every = 0;  // iterations between checkpoints; 0 disables

  double eq_lambda_u = 0.2;
  double eq_lambda_rho = 0.1;
  int eq_max_iterations = 2000;
  double eq_max_log_step = 2.0;
  // Zero-bias state is first converged at this resolution and interpolated up
  // as the fine-grid seed. 0 disables; no effect when >= nodes_per_cell.
  int eq_seed_nodes_per_cell = 4;

  double mg_tolerance = 1e-10;
  int mg_max_cycles = 200;
  int mg_nu_pre = 2;
  int mg_nu_post = 2;
  double mg_jacobi_weight = 0.8;
  int mg_coarsest_max_nodes = 150;

  double rho_floor = 1e-30;
  double packing_limit = 0.999;

  // Keys that appeared in parsed input; used for the required-key check.
  std::vector<std::string> seen_keys;

  // Derived builders.
  GridSpec make_grid() const;
  Thermo make_thermo() const;
  std::vector<SpeciesSpec> make_species() const;
  std::vector<SquareWellSpec> make_wells() const;
  std::vector<Site> make_sites() const;
  ScalarField make_fixed_charge(const GridSpec& grid) const;
  CdftSettings make_cdft_settings() const;
  GummelSettings make_gummel_settings() const;
  MgSettings make_mg_settings() const;
};

// Applies key=value lines from the stream onto cfg. Unknown keys, duplicate
// keys, and malformed lines are hard errors.
void parse_config_stream(std::istream& in, SimulationConfig& cfg);

// One "key=value" fragment, as given on a command line.
void apply_config_override(SimulationConfig& cfg, const std::string& assignment);

// Defaults + file + validation.
SimulationConfig load_config(const std::string& path);

// Range checks and the required-key check; throws naming the offending key.
void validate_config(const SimulationConfig& cfg);

// All keys with their resolved values, sorted by key. Parsing the echo back
// reproduces the identical configuration.
std::vector<std::pair<std::string, std::string>> echo_config(const SimulationConfig& cfg);

}  // namespace pnpcdft

#include "pnpcdft/config.hpp"

#include <algorithm>
#include <cerrno>
#include <climits>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

namespace pnpcdft {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double_value(const std::string& raw, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError("config key `" + key + "`: `" + raw + "` is not a number");
  }
  return v;
}

int parse_int_value(const std::string& raw, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0' || errno == ERANGE || v < INT_MIN || v > INT_MAX) {
    throw ConfigError("config key `" + key + "`: `" + raw + "` is not an integer");
  }
  return static_cast<int>(v);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Entry {
  std::function<void(SimulationConfig&, const std::string& raw, const std::string& key)> set;
  std::function<std::string(const SimulationConfig&)> get;
};

using Registry = std::map<std::string, Entry>;

void add_double(Registry& r, const std::string& key, double SimulationConfig::*member) {
  r[key] = Entry{
      [member](SimulationConfig& c, const std::string& raw, const std::string& k) {
        c.*member = parse_double_value(raw, k);
      },
      [member](const SimulationConfig& c) { return format_double(c.*member); }};
}

void add_int(Registry& r, const std::string& key, int SimulationConfig::*member) {
  r[key] = Entry{
      [member](SimulationConfig& c, const std::string& raw, const std::string& k) {
        c.*member = parse_int_value(raw, k);
      },
      [member](const SimulationConfig& c) { return std::to_string(c.*member); }};
}

void add_string(Registry& r, const std::string& key, std::string SimulationConfig::*member) {
  r[key] = Entry{
      [member](SimulationConfig& c, const std::string& raw, const std::string&) {
        c.*member = raw;
      },
      [member](const SimulationConfig& c) { return c.*member; }};
}

void add_frac(Registry& r, const std::string& key, double (SimulationConfig::*member)[3], int axis) {
  r[key] = Entry{
      [member, axis](SimulationConfig& c, const std::string& raw, const std::string& k) {
        (c.*member)[axis] = parse_double_value(raw, k);
      },
      [member, axis](const SimulationConfig& c) { return format_double((c.*member)[axis]); }};
}

const Registry& registry() {
  static const Registry r = [] {
    Registry m;
    add_double(m, "temperature_K", &SimulationConfig::temperature_K);
    add_double(m, "relative_permittivity", &SimulationConfig::relative_permittivity);
    add_double(m, "lattice_a_nm", &SimulationConfig::lattice_a_nm);
    add_double(m, "lattice_b_nm", &SimulationConfig::lattice_b_nm);
    add_double(m, "lattice_c_nm", &SimulationConfig::lattice_c_nm);
    add_int(m, "cells_x", &SimulationConfig::cells_x);
    add_int(m, "cells_y", &SimulationConfig::cells_y);
    add_int(m, "cells_z", &SimulationConfig::cells_z);
    add_int(m, "nodes_per_cell", &SimulationConfig::nodes_per_cell);
    add_double(m, "applied_voltage_V", &SimulationConfig::applied_voltage_V);
    add_double(m, "fixed_charge_per_nm2", &SimulationConfig::fixed_charge_per_nm2);
    add_string(m, "functional", &SimulationConfig::functional);
    add_int(m, "ideal_mu_sign", &SimulationConfig::ideal_mu_sign);
    add_int(m, "quad_theta", &SimulationConfig::quad_theta);
    add_int(m, "quad_phi", &SimulationConfig::quad_phi);
    add_int(m, "threads", &SimulationConfig::threads);

    add_double(m, "li.valence", &SimulationConfig::li_valence);
    add_double(m, "li.diameter_nm", &SimulationConfig::li_diameter_nm);
    add_double(m, "li.diffusion_cm2_s", &SimulationConfig::li_diffusion_cm2_s);
    add_double(m, "li.bulk_nm3", &SimulationConfig::li_bulk_nm3);
    add_double(m, "li.dh_size_A", &SimulationConfig::li_dh_size_A);

    add_double(m, "e.valence", &SimulationConfig::e_valence);
    add_double(m, "e.diameter_nm", &SimulationConfig::e_diameter_nm);
    add_double(m, "e.diffusion_cm2_s", &SimulationConfig::e_diffusion_cm2_s);
    add_double(m, "e.bulk_nm3", &SimulationConfig::e_bulk_nm3);
    add_double(m, "e.dh_size_A", &SimulationConfig::e_dh_size_A);

    add_double(m, "site.diameter_nm", &SimulationConfig::site_diameter_nm);
    add_double(m, "site.gaussian_sigma_nm", &SimulationConfig::site_gaussian_sigma_nm);
    add_string(m, "site_file", &SimulationConfig::site_file);

    add_frac(m, "s1.frac_x", &SimulationConfig::s1_frac, 0);
    add_frac(m, "s1.frac_y", &SimulationConfig::s1_frac, 1);
    add_frac(m, "s1.frac_z", &SimulationConfig::s1_frac, 2);
    add_frac(m, "s2.frac_x", &SimulationConfig::s2_frac, 0);
    add_frac(m, "s2.frac_y", &SimulationConfig::s2_frac, 1);
    add_frac(m, "s2.frac_z", &SimulationConfig::s2_frac, 2);
    add_frac(m, "s3.frac_x", &SimulationConfig::s3_frac, 0);
    add_frac(m, "s3.frac_y", &SimulationConfig::s3_frac, 1);
    add_frac(m, "s3.frac_z", &SimulationConfig::s3_frac, 2);

    add_double(m, "well.li.s1_eV", &SimulationConfig::well_li_s1_eV);
    add_double(m, "well.li.s2_eV", &SimulationConfig::well_li_s2_eV);
    add_double(m, "well.li.s3_eV", &SimulationConfig::well_li_s3_eV);
    add_double(m, "well.gamma", &SimulationConfig::well_gamma);

    add_double(m, "gummel.tol_u", &SimulationConfig::gummel_tol_u);
    add_double(m, "gummel.tol_rho", &SimulationConfig::gummel_tol_rho);
    add_double(m, "gummel.lambda_u", &SimulationConfig::gummel_lambda_u);
    add_double(m, "gummel.lambda_rho", &SimulationConfig::gummel_lambda_rho);
    add_int(m, "gummel.max_iterations", &SimulationConfig::gummel_max_iterations);
    add_double(m, "gummel.exp_clamp", &SimulationConfig::gummel_exp_clamp);
    add_int(m, "gummel.checkpoint_every", &SimulationConfig::checkpoint_every);

    add_double(m, "eq.lambda_u", &SimulationConfig::eq_lambda_u);
    add_double(m, "eq.lambda_rho", &SimulationConfig::eq_lambda_rho);
    add_int(m, "eq.max_iterations", &SimulationConfig::eq_max_iterations);
    add_double(m, "eq.max_log_step", &SimulationConfig::eq_max_log_step);
    add_int(m, "eq.seed_nodes_per_cell", &SimulationConfig::eq_seed_nodes_per_cell);

    add_double(m, "mg.tolerance", &SimulationConfig::mg_tolerance);
    add_int(m, "mg.max_cycles", &SimulationConfig::mg_max_cycles);
    add_int(m, "mg.nu_pre", &SimulationConfig::mg_nu_pre);
    add_int(m, "mg.nu_post", &SimulationConfig::mg_nu_post);
    add_double(m, "mg.jacobi_weight", &SimulationConfig::mg_jacobi_weight);
    add_int(m, "mg.coarsest_max_nodes", &SimulationConfig::mg_coarsest_max_nodes);

    add_double(m, "cdft.rho_floor", &SimulationConfig::rho_floor);
    add_double(m, "cdft.packing_limit", &SimulationConfig::packing_limit);
    return m;
  }();
  return r;
}

void apply_assignment(SimulationConfig& cfg, const std::string& key, const std::string& value) {
  const auto& reg = registry();
  const auto it = reg.find(key);
  if (it == reg.end()) throw ConfigError("unknown config key `" + key + "`");
  it->second.set(cfg, value, key);
  cfg.seen_keys.push_back(key);
}

void check_range(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("config key `" + key + "` out of range: " + what);
}

}  // namespace

void parse_config_stream(std::istream& in, SimulationConfig& cfg) {
  std::string line;
  int lineno = 0;
  std::set<std::string> seen_here;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value, got `" +
                        body + "`");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }
    if (!seen_here.insert(key).second) {
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key `" + key + "`");
    }
    try {
      apply_assignment(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_config_override(SimulationConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override `" + assignment + "`: expected key=value");
  }
  apply_assignment(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

SimulationConfig load_config(const std::string& path) {
  SimulationConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file `" + path + "`");
    parse_config_stream(in, cfg);
  }
  validate_config(cfg);
  return cfg;
}

void validate_config(const SimulationConfig& cfg) {
  check_range(cfg.temperature_K > 0.0, "temperature_K", "must be > 0");
  check_range(cfg.relative_permittivity > 0.0, "relative_permittivity", "must be > 0");
  check_range(cfg.lattice_a_nm > 0.0, "lattice_a_nm", "must be > 0");
  check_range(cfg.lattice_b_nm > 0.0, "lattice_b_nm", "must be > 0");
  check_range(cfg.lattice_c_nm > 0.0, "lattice_c_nm", "must be > 0");
  check_range(cfg.cells_x >= 1, "cells_x", "must be >= 1");
  check_range(cfg.cells_y >= 1, "cells_y", "must be >= 1");
  check_range(cfg.cells_z >= 1, "cells_z", "must be >= 1");
  check_range(cfg.nodes_per_cell >= 1, "nodes_per_cell", "must be >= 1");
  check_range(cfg.fixed_charge_per_nm2 >= 0.0, "fixed_charge_per_nm2", "must be >= 0");
  check_range(cfg.functional == "fmt" || cfg.functional == "mfmt", "functional",
              "must be `fmt` or `mfmt`");
  check_range(cfg.ideal_mu_sign == 1 || cfg.ideal_mu_sign == -1, "ideal_mu_sign",
              "must be +1 or -1");
  check_range(cfg.quad_theta >= 4, "quad_theta", "must be >= 4");
  check_range(cfg.quad_phi >= 2, "quad_phi", "must be >= 2");
  check_range(cfg.threads >= 1, "threads", "must be >= 1");

  check_range(cfg.li_diameter_nm > 0.0, "li.diameter_nm", "must be > 0");
  check_range(cfg.li_diffusion_cm2_s > 0.0, "li.diffusion_cm2_s", "must be > 0");
  check_range(cfg.li_bulk_nm3 > 0.0, "li.bulk_nm3", "must be > 0");
  check_range(cfg.li_dh_size_A >= 0.0, "li.dh_size_A", "must be >= 0");
  check_range(cfg.e_diameter_nm > 0.0, "e.diameter_nm", "must be > 0");
  check_range(cfg.e_diffusion_cm2_s > 0.0, "e.diffusion_cm2_s", "must be > 0");
  check_range(cfg.e_bulk_nm3 > 0.0, "e.bulk_nm3", "must be > 0");
  check_range(cfg.e_dh_size_A >= 0.0, "e.dh_size_A", "must be >= 0");

  check_range(cfg.site_diameter_nm > 0.0, "site.diameter_nm", "must be > 0");
  check_range(cfg.site_gaussian_sigma_nm > 0.0, "site.gaussian_sigma_nm", "must be > 0");

  if (cfg.site_file.empty()) {
    static const char* frac_keys[] = {"s1.frac_x", "s1.frac_y", "s1.frac_z",
                                      "s2.frac_x", "s2.frac_y", "s2.frac_z",
                                      "s3.frac_x", "s3.frac_y", "s3.frac_z"};
    const double* vals[] = {&cfg.s1_frac[0], &cfg.s1_frac[1], &cfg.s1_frac[2],
                            &cfg.s2_frac[0], &cfg.s2_frac[1], &cfg.s2_frac[2],
                            &cfg.s3_frac[0], &cfg.s3_frac[1], &cfg.s3_frac[2]};
    std::string missing;
    for (int n = 0; n < 9; ++n) {
      const bool seen = std::find(cfg.seen_keys.begin(), cfg.seen_keys.end(), frac_keys[n]) !=
                        cfg.seen_keys.end();
      if (!seen) {
        if (!missing.empty()) missing += ", ";
        missing += frac_keys[n];
      } else {
        check_range(*vals[n] >= 0.0 && *vals[n] < 1.0, frac_keys[n], "must be in [0, 1)");
      }
    }
    if (!missing.empty()) {
      throw ConfigError("missing required config keys (no site_file given): " + missing);
    }
  }

  check_range(cfg.well_li_s1_eV >= 0.0, "well.li.s1_eV", "must be >= 0");
  check_range(cfg.well_li_s2_eV >= 0.0, "well.li.s2_eV", "must be >= 0");
  check_range(cfg.well_li_s3_eV >= 0.0, "well.li.s3_eV", "must be >= 0");
  check_range(cfg.well_gamma > 1.0, "well.gamma", "must be > 1");

  check_range(cfg.gummel_tol_u > 0.0, "gummel.tol_u", "must be > 0");
  check_range(cfg.gummel_tol_rho > 0.0, "gummel.tol_rho", "must be > 0");
  check_range(cfg.gummel_lambda_u > 0.0 && cfg.gummel_lambda_u <= 1.0, "gummel.lambda_u",
              "must be in (0, 1]");
  check_range(cfg.gummel_lambda_rho > 0.0 && cfg.gummel_lambda_rho <= 1.0, "gummel.lambda_rho",
              "must be in (0, 1]");
  check_range(cfg.gummel_max_iterations >= 1, "gummel.max_iterations", "must be >= 1");
  check_range(cfg.gummel_exp_clamp > 0.0, "gummel.exp_clamp", "must be > 0");
  check_range(cfg.checkpoint_every >= 0, "gummel.checkpoint_every", "must be >= 0");

  check_range(cfg.eq_lambda_u > 0.0 && cfg.eq_lambda_u <= 1.0, "eq.lambda_u", "must be in (0, 1]");
  check_range(cfg.eq_max_log_step > 0.0, "eq.max_log_step", "must be > 0");
  check_range(cfg.eq_lambda_rho > 0.0 && cfg.eq_lambda_rho <= 1.0, "eq.lambda_rho",
              "must be in (0, 1]");
  check_range(cfg.eq_max_iterations >= 1, "eq.max_iterations", "must be >= 1");
  check_range(cfg.eq_seed_nodes_per_cell >= 0, "eq.seed_nodes_per_cell", "must be >= 0");

  check_range(cfg.mg_tolerance > 0.0, "mg.tolerance", "must be > 0");
  check_range(cfg.mg_max_cycles >= 1, "mg.max_cycles", "must be >= 1");
  check_range(cfg.mg_nu_pre >= 0, "mg.nu_pre", "must be >= 0");
  check_range(cfg.mg_nu_post >= 0, "mg.nu_post", "must be >= 0");
  check_range(cfg.mg_nu_pre + cfg.mg_nu_post >= 1, "mg.nu_pre", "pre + post sweeps must be >= 1");
  check_range(cfg.mg_jacobi_weight > 0.0 && cfg.mg_jacobi_weight <= 1.0, "mg.jacobi_weight",
              "must be in (0, 1]");
  check_range(cfg.mg_coarsest_max_nodes >= 8, "mg.coarsest_max_nodes", "must be >= 8");

  check_range(cfg.rho_floor > 0.0, "cdft.rho_floor", "must be > 0");
  check_range(cfg.packing_limit > 0.0 && cfg.packing_limit < 1.0, "cdft.packing_limit",
              "must be in (0, 1)");
}

std::vector<std::pair<std::string, std::string>> echo_config(const SimulationConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, entry] : registry()) out.emplace_back(key, entry.get(cfg));
  return out;
}

GridSpec SimulationConfig::make_grid() const {
  return GridSpec(cells_x * nodes_per_cell + 1, cells_y * nodes_per_cell + 1,
                  cells_z * nodes_per_cell + 1, cells_x * lattice_a_nm, cells_y * lattice_b_nm,
                  cells_z * lattice_c_nm);
}

Thermo SimulationConfig::make_thermo() const { return Thermo(temperature_K, relative_permittivity); }

std::vector<SpeciesSpec> SimulationConfig::make_species() const {
  std::vector<SpeciesSpec> s(5);
  s[0] = {"li", li_valence, li_diameter_nm, li_diffusion_cm2_s, li_bulk_nm3, li_dh_size_A, true};
  s[1] = {"e", e_valence, e_diameter_nm, e_diffusion_cm2_s, e_bulk_nm3, e_dh_size_A, true};
  for (int n = 0; n < 3; ++n) {
    s[2 + n] = {"s" + std::to_string(n + 1), 0.0, site_diameter_nm, 0.0, 0.0, 0.0, false};
  }
  return s;
}

std::vector<SquareWellSpec> SimulationConfig::make_wells() const {
  std::vector<SquareWellSpec> wells;
  if (well_li_s1_eV > 0.0) wells.push_back({"li", "s1", well_li_s1_eV});
  if (well_li_s2_eV > 0.0) wells.push_back({"li", "s2", well_li_s2_eV});
  if (well_li_s3_eV > 0.0) wells.push_back({"li", "s3", well_li_s3_eV});
  return wells;
}

std::vector<Site> SimulationConfig::make_sites() const {
  if (!site_file.empty()) return load_site_file(site_file);
  const std::vector<MotifEntry> motif = {
      {"s1", s1_frac[0], s1_frac[1], s1_frac[2]},
      {"s2", s2_frac[0], s2_frac[1], s2_frac[2]},
      {"s3", s3_frac[0], s3_frac[1], s3_frac[2]},
  };
  return tile_motif(motif, lattice_a_nm, lattice_b_nm, lattice_c_nm, cells_x, cells_y, cells_z);
}

ScalarField SimulationConfig::make_fixed_charge(const GridSpec& grid) const {
  ScalarField f(grid);
  // Surface density lumped as a one-cell-thick volume density on the z = 0
  // node plane.
  const double volumetric = fixed_charge_per_nm2 / grid.dz();
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) f[grid.index(i, j, 0)] = volumetric;
  }
  return f;
}

CdftSettings SimulationConfig::make_cdft_settings() const {
  CdftSettings s;
  s.functional = functional == "mfmt" ? HsFunctional::mfmt : HsFunctional::fmt;
  s.ideal_mu_sign = ideal_mu_sign;
  s.quad_theta = quad_theta;
  s.quad_phi = quad_phi;
  s.rho_floor = rho_floor;
  s.well_gamma = well_gamma;
  s.packing_limit = packing_limit;
  s.threads = threads;
  return s;
}

GummelSettings SimulationConfig::make_gummel_settings() const {
  GummelSettings s;
  s.tol_u = gummel_tol_u;
  s.tol_rho = gummel_tol_rho;
  s.lambda_u = gummel_lambda_u;
  s.lambda_rho = gummel_lambda_rho;
  s.max_iterations = gummel_max_iterations;
  s.exp_clamp = gummel_exp_clamp;
  s.eq_lambda_u = eq_lambda_u;
  s.eq_lambda_rho = eq_lambda_rho;
  s.eq_max_iterations = eq_max_iterations;
  s.eq_max_log_step = eq_max_log_step;
  s.threads = threads;
  return s;
}

MgSettings SimulationConfig::make_mg_settings() const {
  MgSettings s;
  s.nu_pre = mg_nu_pre;
  s.nu_post = mg_nu_post;
  s.jacobi_weight = mg_jacobi_weight;
  s.tolerance = mg_tolerance;
  s.max_cycles = mg_max_cycles;
  s.coarsest_max_nodes = mg_coarsest_max_nodes;
  s.threads = threads;
  return s;
}

}  // namespace pnpcdft

#include "pnpcdft/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>

#include "pnpcdft/version.hpp"

namespace pnpcdft {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void log_record(std::ostream* log, const char* phase, const IterationRecord& rec) {
  if (!log) return;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s %4d  delta_u=%.3e  delta_rho=%.3e  packing=%.4f  %.2fs\n",
                phase, rec.iteration, rec.delta_u, rec.delta_rho, rec.max_packing, rec.seconds);
  *log << buf << std::flush;
}

std::vector<std::string> mobile_names(const ChemicalPotentialEngine& engine) {
  std::vector<std::string> names;
  for (int m = 0; m < engine.mobile_count(); ++m) names.push_back(engine.mobile(m).name);
  return names;
}

}  // namespace

Assembly assemble(const SimulationConfig& cfg) {
  Assembly as{cfg.make_grid(),  cfg.make_thermo(), cfg.make_species(),
              cfg.make_wells(), cfg.make_sites(),  {},
              ScalarField()};

  for (const char* label : {"s1", "s2", "s3"}) {
    as.stationary.emplace_back(
        label, gaussian_site_density(as.grid, as.sites, label, cfg.site_gaussian_sigma_nm,
                                     cfg.threads));
  }
  as.fixed_charge = cfg.make_fixed_charge(as.grid);
  return as;
}

RunResult run_once(const SimulationConfig& cfg, const RunOptions& options) {
  const double t_start = now_seconds();
  Assembly as = assemble(cfg);

  ChemicalPotentialEngine engine(as.grid, as.thermo, as.species, as.wells, as.stationary,
                                 cfg.make_cdft_settings());
  GummelDriver driver(as.thermo, engine, as.fixed_charge, cfg.applied_voltage_V,
                      cfg.make_gummel_settings(), cfg.make_mg_settings());

  const std::vector<std::string> names = mobile_names(engine);

  RunResult result;
  result.stationary = as.stationary;
  result.fixed_charge = as.fixed_charge;
  result.state = driver.initial_state();

  SolveReport& rep = result.report;
  rep.version = kVersion;
  rep.git_revision = kGitRevision;
  rep.config = echo_config(cfg);
  rep.species_names = names;

  std::string phase = "equilibrium";
  if (!options.resume_dir.empty()) {
    Checkpoint cp = read_checkpoint(options.resume_dir);
    if (!cp.state.u.grid().same_shape(as.grid)) {
      throw std::runtime_error("checkpoint grid does not match the configuration");
    }
    if (cp.species_names != names) {
      throw std::runtime_error("checkpoint species do not match the configuration");
    }
    result.state = std::move(cp.state);
    if (cp.phase == "transport") phase = "transport";
    if (options.log) {
      *options.log << "resumed from " << options.resume_dir << " (phase " << cp.phase
                   << ", iteration " << cp.iteration << ")\n";
    }
  }

  const std::string checkpoint_dir =
      options.output_dir.empty() ? std::string()
                                 : (std::filesystem::path(options.output_dir) / "checkpoint").string();
  const int every = options.checkpoint_every;

  double seed_solver = 0.0, seed_fft = 0.0, seed_quad = 0.0;
  // The slowest equilibrium modes are grid-independent, so converging them on
  // a coarse grid first and interpolating up removes most fine-grid Picard
  // iterations. Densities travel in log space to stay positive.
  if (phase == "equilibrium" && options.resume_dir.empty() && cfg.eq_seed_nodes_per_cell > 0 &&
      cfg.eq_seed_nodes_per_cell < cfg.nodes_per_cell) {
    SimulationConfig cc = cfg;
    cc.nodes_per_cell = cfg.eq_seed_nodes_per_cell;
    cc.eq_seed_nodes_per_cell = 0;
    try {
      validate_config(cc);
      Assembly cas = assemble(cc);
      ChemicalPotentialEngine seed_engine(cas.grid, cas.thermo, cas.species, cas.wells,
                                          cas.stationary, cc.make_cdft_settings());
      GummelDriver seed_driver(cas.thermo, seed_engine, cas.fixed_charge, cc.applied_voltage_V,
                               cc.make_gummel_settings(), cc.make_mg_settings());
      SystemState seed = seed_driver.initial_state();
      try {
        seed_driver.equilibrate(seed, [&](const IterationRecord& rec, const SystemState&) {
          log_record(options.log, "seed", rec);
        });
      } catch (const ConvergenceError&) {
        // A partially relaxed coarse state still beats the bulk fill.
        if (options.log) *options.log << "seed phase hit its iteration cap; using last state\n";
      }
      result.state.u = resample(seed.u, as.grid);
      for (std::size_t m = 0; m < seed.rho.size(); ++m) {
        ScalarField lr(cas.grid);
        for (std::size_t n = 0; n < lr.size(); ++n) {
          lr[n] = std::log(std::max(seed.rho[m][n], cfg.rho_floor));
        }
        ScalarField fine = resample(lr, as.grid);
        for (std::size_t n = 0; n < fine.size(); ++n) fine[n] = std::exp(fine[n]);
        result.state.rho[m] = std::move(fine);
      }
      seed_solver = seed_driver.solver_seconds();
      seed_fft = seed_engine.timing().fft_seconds;
      seed_quad = seed_engine.timing().quadrature_seconds;
    } catch (const std::invalid_argument& e) {
      if (options.log) *options.log << "seed phase skipped: " << e.what() << "\n";
    } catch (const NumericsError& e) {
      result.state = driver.initial_state();
      if (options.log) *options.log << "seed phase aborted (" << e.what() << "); starting from bulk\n";
    }
  }

  auto make_observer = [&](const char* phase_name) {
    return [&, phase_name](const IterationRecord& rec, const SystemState& st) {
      log_record(options.log, phase_name, rec);
      if (every > 0 && !checkpoint_dir.empty() && rec.iteration % every == 0) {
        write_checkpoint(checkpoint_dir, Checkpoint{phase_name, rec.iteration, st, names});
      }
    };
  };

  try {
    if (phase == "equilibrium") {
      rep.equilibrium = driver.equilibrate(result.state, make_observer("equilibrium"));
      phase = "transport";
    }
    rep.transport = driver.run(result.state, make_observer("transport"));
    rep.converged = true;
    result.converged = true;
  } catch (const ConvergenceError& ce) {
    if (phase == "equilibrium") {
      rep.equilibrium = ce.history;
    } else {
      rep.transport = ce.history;
    }
    rep.converged = false;
    rep.termination = ce.what();
    result.converged = false;
  } catch (const NumericsError&) {
    if (!options.output_dir.empty()) {
      write_checkpoint((std::filesystem::path(options.output_dir) / "abort_state").string(),
                       Checkpoint{"abort", 0, result.state, names});
    }
    throw;
  }

  // Observables come from the final state regardless of convergence; the flux
  // views exist once at least one transport iteration has run.
  engine.evaluate(result.state.rho);
  rep.max_packing = engine.max_packing();
  rep.short_range_energy_eV = engine.short_range_free_energy(result.state.rho);

  if (!rep.transport.empty()) {
    std::vector<std::vector<double>> currents;
    std::vector<double> valences;
    for (int m = 0; m < engine.mobile_count(); ++m) {
      currents.push_back(
          plane_currents(driver.transformed_diffusivity(m), driver.transformed_density(m)));
      valences.push_back(engine.mobile(m).valence);
      double mean = 0.0;
      for (double f : currents.back()) mean += f;
      mean /= static_cast<double>(currents.back().size());
      rep.species_plane_current.push_back(mean);
      rep.plane_flux_spread = std::max(rep.plane_flux_spread, plane_current_spread(currents.back()));
    }
    if (cfg.applied_voltage_V != 0.0) {
      rep.sigma_S_per_cm = conductivity_S_cm(as.grid, valences, currents, cfg.applied_voltage_V);
    }
  }

  rep.solver_seconds = driver.solver_seconds() + seed_solver;
  rep.fft_seconds = engine.timing().fft_seconds + seed_fft;
  rep.quadrature_seconds = engine.timing().quadrature_seconds + seed_quad;
  rep.total_seconds = now_seconds() - t_start;
  return result;
}

namespace {

SweepPoint sweep_point(double axis, const SimulationConfig& cfg, std::ostream* log) {
  RunOptions opts;
  opts.log = log;
  RunResult rr = run_once(cfg, opts);
  if (!rr.converged) {
    const auto& hist = rr.report.transport.empty() ? rr.report.equilibrium : rr.report.transport;
    const double du = hist.empty() ? 0.0 : hist.back().delta_u;
    const double drho = hist.empty() ? 0.0 : hist.back().delta_rho;
    throw ConvergenceError("sweep point axis=" + std::to_string(axis),
                           static_cast<int>(hist.size()), du, drho, hist);
  }
  SweepPoint p;
  p.axis = axis;
  p.sigma_S_cm = rr.report.sigma_S_per_cm;
  p.F_sh_eV = rr.report.short_range_energy_eV;
  p.iterations = static_cast<int>(rr.report.equilibrium.size() + rr.report.transport.size());
  p.seconds = rr.report.total_seconds;
  if (log) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "point axis=%g  sigma=%.6e S/cm  F_sh=%.6e eV  (%d iter)\n",
                  p.axis, p.sigma_S_cm, p.F_sh_eV, p.iterations);
    *log << buf << std::flush;
  }
  return p;
}

}  // namespace

std::vector<SweepPoint> sweep_temperature(const SimulationConfig& cfg,
                                          const std::vector<double>& temperatures_K,
                                          std::ostream* log) {
  std::vector<SweepPoint> points;
  for (double T : temperatures_K) {
    SimulationConfig c = cfg;
    c.temperature_K = T;
    validate_config(c);
    if (log) *log << "--- temperature " << T << " K\n";
    points.push_back(sweep_point(T, c, log));
  }
  return points;
}

std::vector<SweepPoint> sweep_size(const SimulationConfig& cfg, const std::vector<int>& cells_y,
                                   std::ostream* log) {
  std::vector<SweepPoint> points;
  for (int M : cells_y) {
    SimulationConfig c = cfg;
    c.cells_y = M;
    validate_config(c);
    if (log) *log << "--- size M = " << M << " cells\n";
    points.push_back(sweep_point(M, c, log));
  }
  return points;
}

std::vector<ComplexityPoint> complexity_probe(const SimulationConfig& cfg,
                                              const std::vector<int>& nodes_per_cell,
                                              int iterations, std::ostream* log) {
  std::vector<ComplexityPoint> points;
  for (int r : nodes_per_cell) {
    SimulationConfig c = cfg;
    c.nodes_per_cell = r;
    c.gummel_max_iterations = iterations;
    validate_config(c);

    Assembly as = assemble(c);
    if (log) {
      *log << "--- refinement " << r << " nodes per cell (" << as.grid.size() << " nodes)\n";
    }
    ChemicalPotentialEngine engine(as.grid, as.thermo, as.species, as.wells, as.stationary,
                                   c.make_cdft_settings());
    GummelDriver driver(as.thermo, engine, as.fixed_charge, c.applied_voltage_V,
                        c.make_gummel_settings(), c.make_mg_settings());
    SystemState state = driver.initial_state();

    std::vector<IterationRecord> history;
    const double t0 = now_seconds();
    try {
      history = driver.run(state);
    } catch (const ConvergenceError& ce) {
      // The probe caps the iteration count; running out of budget is the
      // expected exit.
      history = ce.history;
    }
    const double elapsed = now_seconds() - t0;

    ComplexityPoint p;
    p.nodes_per_cell = r;
    p.nodes = as.grid.size();
    p.evaluations = static_cast<int>(history.size());
    p.fft_seconds = engine.timing().fft_seconds;
    p.quadrature_seconds = engine.timing().quadrature_seconds;
    p.solve_seconds = elapsed;
    if (!history.empty()) {
      p.poisson_cycles = history.back().poisson_cycles;
      for (int cyc : history.back().np_cycles) p.np_cycles_max = std::max(p.np_cycles_max, cyc);
    }
    points.push_back(p);
    if (log) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "nodes=%zu  fft=%.3fs/%d evals  poisson_cycles=%d  np_cycles_max=%d\n",
                    p.nodes, p.fft_seconds, p.evaluations, p.poisson_cycles, p.np_cycles_max);
      *log << buf << std::flush;
    }
  }
  return points;
}

}  // namespace pnpcdft

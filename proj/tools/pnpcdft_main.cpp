// Batch front end: one subcommand per workflow, flat key=value configs,
// machine-readable error categories on stderr.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 solver
// non-convergence (a partial report is still written), 1 anything else.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pnpcdft/config.hpp"
#include "pnpcdft/constants.hpp"
#include "pnpcdft/driver.hpp"
#include "pnpcdft/fmt_functional.hpp"
#include "pnpcdft/kernels.hpp"
#include "pnpcdft/report.hpp"
#include "pnpcdft/version.hpp"

namespace {

using namespace pnpcdft;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  bool small = false;
  int threads = 0;  // 0 = not given on the command line
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* opt = cmd->add_option("-c,--config", args.config_path, "configuration file");
  if (config_required) opt->required();
  cmd->add_option("--set", args.overrides, "override one key=value (repeatable)");
  cmd->add_flag("--small", args.small, "shrink the transport axis to 10 cells");
  cmd->add_option("--threads", args.threads, "worker thread cap (overrides PNPCDFT_THREADS)");
}

SimulationConfig build_config(const CommonArgs& args) {
  SimulationConfig cfg;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw ConfigError("cannot open config file `" + args.config_path + "`");
    parse_config_stream(in, cfg);
  }
  if (args.small) cfg.cells_y = 10;
  for (const std::string& s : args.overrides) apply_config_override(cfg, s);

  if (args.threads > 0) {
    cfg.threads = args.threads;
  } else if (const char* env = std::getenv("PNPCDFT_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw ConfigError("PNPCDFT_THREADS must be a positive integer, got `" + std::string(env) +
                        "`");
    }
    cfg.threads = static_cast<int>(v);
  }
  validate_config(cfg);
  return cfg;
}

void dump_state_fields(const std::filesystem::path& dir, const SystemState& state,
                       const std::vector<std::string>& names) {
  std::filesystem::create_directories(dir);
  state.u.dump_file((dir / "u.field").string());
  for (std::size_t m = 0; m < state.rho.size(); ++m) {
    state.rho[m].dump_file((dir / ("rho_" + names[m] + ".field")).string());
  }
}

void dump_context_fields(const std::filesystem::path& dir,
                         const std::vector<std::pair<std::string, ScalarField>>& stationary,
                         const ScalarField& fixed_charge) {
  std::filesystem::create_directories(dir);
  for (const auto& [label, field] : stationary) {
    field.dump_file((dir / ("stationary_" + label + ".field")).string());
  }
  fixed_charge.dump_file((dir / "fixed_charge.field").string());
}

SweepPoint to_sweep_point(double axis, const RunResult& rr) {
  SweepPoint p;
  p.axis = axis;
  p.sigma_S_cm = rr.report.sigma_S_per_cm;
  p.F_sh_eV = rr.report.short_range_energy_eV;
  p.iterations = static_cast<int>(rr.report.equilibrium.size() + rr.report.transport.size());
  p.seconds = rr.report.total_seconds;
  return p;
}

int cmd_run(const CommonArgs& args, const std::string& out_dir, const std::string& resume,
            bool quiet) {
  SimulationConfig cfg = build_config(args);
  std::filesystem::create_directories(out_dir);

  RunOptions opts;
  opts.output_dir = out_dir;
  opts.resume_dir = resume;
  opts.checkpoint_every = cfg.checkpoint_every;
  opts.log = quiet ? nullptr : &std::cout;

  RunResult rr;
  try {
    rr = run_once(cfg, opts);
  } catch (const NumericsError&) {
    std::cerr << "last good state dumped to " << out_dir << "/abort_state\n";
    throw;
  }

  const std::string report_path = (std::filesystem::path(out_dir) / "report.json").string();
  write_report_file(report_path, rr.report);
  dump_state_fields(std::filesystem::path(out_dir) / "fields", rr.state,
                    rr.report.species_names);
  dump_context_fields(std::filesystem::path(out_dir) / "fields", rr.stationary, rr.fixed_charge);

  if (!rr.converged) {
    std::cerr << "error: category=convergence: " << rr.report.termination
              << "; partial report at " << report_path << "\n";
    return 3;
  }

  std::cout << "converged in " << rr.report.equilibrium.size() << " equilibrium + "
            << rr.report.transport.size() << " transport iterations\n"
            << "sigma = " << rr.report.sigma_S_per_cm << " S/cm\n"
            << "F_sh = " << rr.report.short_range_energy_eV << " eV\n"
            << "plane flux spread = " << rr.report.plane_flux_spread << "\n"
            << "report: " << report_path << "\n";
  return 0;
}

// Shared by the two sweep subcommands; the CSV is rewritten after every
// completed point so an aborted sweep still leaves its finished rows behind.
int run_sweep(const SimulationConfig& base, const std::vector<double>& axis_values,
              bool axis_is_size, const std::string& out_dir, const std::string& xlabel,
              bool quiet) {
  std::filesystem::create_directories(out_dir);
  const std::string csv = (std::filesystem::path(out_dir) / "sweep.csv").string();
  const std::string gp = (std::filesystem::path(out_dir) / "sweep.gp").string();

  std::vector<SweepPoint> points;
  for (double v : axis_values) {
    SimulationConfig c = base;
    if (axis_is_size) {
      c.cells_y = static_cast<int>(v);
    } else {
      c.temperature_K = v;
    }
    validate_config(c);
    if (!quiet) std::cout << "--- " << xlabel << " = " << v << "\n";

    RunOptions opts;
    opts.log = quiet ? nullptr : &std::cout;
    RunResult rr = run_once(c, opts);
    if (!rr.converged) {
      write_sweep_csv(csv, points);
      std::cerr << "error: category=convergence: sweep point " << xlabel << "=" << v
                << " did not converge; completed rows are in " << csv << "\n";
      return 3;
    }
    points.push_back(to_sweep_point(v, rr));
    write_sweep_csv(csv, points);
  }
  write_sweep_gnuplot(gp, "sweep.csv", xlabel);

  for (const SweepPoint& p : points) {
    std::cout << xlabel << "=" << p.axis << "  sigma=" << p.sigma_S_cm
              << " S/cm  F_sh=" << p.F_sh_eV << " eV  (" << p.iterations << " iter, "
              << p.seconds << " s)\n";
  }
  std::cout << "sweep table: " << csv << "\n";
  return 0;
}

int cmd_complexity(const CommonArgs& args, std::vector<int> refinements, int iterations,
                   const std::string& out_dir, bool quiet) {
  SimulationConfig cfg = build_config(args);
  std::filesystem::create_directories(out_dir);

  std::vector<ComplexityPoint> points =
      complexity_probe(cfg, refinements, iterations, quiet ? nullptr : &std::cout);
  const std::string csv = (std::filesystem::path(out_dir) / "complexity.csv").string();
  write_complexity_csv(csv, points);

  const double slope = fft_scaling_slope(points);
  std::cout << "fft time scaling slope = " << slope << " (1.0 is linear in node count)\n"
            << "complexity table: " << csv << "\n";
  return 0;
}

// Self-check: spectral convolution against the direct double sum on a small
// non-cubic grid, one kernel from each family.
int cmd_check_convolution() {
  const GridSpec grid(6, 5, 7, 1.10, 0.90, 1.33);
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> uni(0.1, 1.0);
  ScalarField f(grid);
  for (std::size_t n = 0; n < f.size(); ++n) f[n] = uni(rng);

  struct Family {
    const char* name;
    KernelFn kernel;
  };
  // Ranges chosen so every kernel support covers several lattice offsets of
  // this grid; a support that misses all of them would make the check vacuous.
  const double sigma = 0.26;
  const std::vector<Family> families = {
      {"coulomb", coulomb_kernel(grid)},
      {"hard-sphere ball", ball_kernel(grid, 0.22)},
      {"square well", square_well_kernel(0.20, 2.2, 0.21)},
      {"msa residual", msa_kernel(grid, sigma, msa_b_parameter(0.5), 1.3)},
  };

  const double dv = grid.cell_volume();
  double worst = 0.0;
  for (const Family& fam : families) {
    ConvolutionPlan plan = plan_kernel(grid, fam.kernel, Orientation::density);
    ScalarField fast = plan.apply(f);

    ScalarField slow(grid);
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ny; ++j)
        for (int k = 0; k < grid.nz; ++k) {
          double acc = 0.0;
          for (int a = 0; a < grid.nx; ++a)
            for (int b = 0; b < grid.ny; ++b)
              for (int c = 0; c < grid.nz; ++c) {
                const double w = grid.trapezoid_weight(a, b, c);
                // Displacements on the offset lattice, matching the plan's
                // sample arguments bit for bit; discontinuous kernels care.
                acc += w * f(a, b, c) *
                       fam.kernel((a - i) * grid.dx(), (b - j) * grid.dy(),
                                  (c - k) * grid.dz());
              }
          slow(i, j, k) = acc * dv;
        }

    const double scale = slow.max_abs();
    const double err = max_abs_diff(fast, slow) / (scale > 0.0 ? scale : 1.0);
    worst = std::max(worst, err);
    std::cout << fam.name << ": max relative error = " << err << "\n";
  }

  std::cout << "max oracle error = " << worst << (worst <= 1e-10 ? " (ok)" : " (FAIL)") << "\n";
  return worst <= 1e-10 ? 0 : 1;
}

// Self-check: analytic hard-sphere partial derivatives against central
// differences at random admissible weighted densities.
int cmd_check_derivatives() {
  std::mt19937 rng(7041982);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const HsFunctional variant = trial % 2 == 0 ? HsFunctional::fmt : HsFunctional::mfmt;

    WeightedDensities n;
    // Single-sphere-consistent scalar set keeps the point physical; a few
    // trials land in the small-n3 series branch of the modified functional.
    n.n3 = trial % 10 == 9 ? 1e-3 + 8e-3 * u01(rng) : 0.05 + 0.85 * u01(rng);
    const double R = 0.05 + 0.45 * u01(rng);
    n.n2 = 3.0 * n.n3 / R;
    n.n1 = n.n2 / (4.0 * constants::pi * R);
    n.n0 = n.n1 / R;
    const double zeta = 0.9 * u01(rng);
    double dir[3] = {u01(rng) - 0.5, u01(rng) - 0.5, u01(rng) - 0.5};
    const double len = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
    for (double& d : dir) d /= len > 0.0 ? len : 1.0;
    for (int c = 0; c < 3; ++c) {
      n.nv2[c] = zeta * n.n2 * dir[c];
      n.nv1[c] = n.nv2[c] / (4.0 * constants::pi * R);
    }

    const HsPartials analytic = phi_hs_partials(n, variant);

    auto fd = [&](auto&& get_ref) {
      WeightedDensities p = n;
      double& x = get_ref(p);
      // Phi is orders of magnitude larger than some of its slopes, so the
      // step must stay large enough that cancellation noise cannot surface.
      const double h = 1e-4 * std::max(std::abs(x), 0.05);
      const double x0 = x;
      x = x0 + h;
      const double hi = phi_hs(p, variant);
      x = x0 - h;
      const double lo = phi_hs(p, variant);
      return (hi - lo) / (2.0 * h);
    };

    const double fds[10] = {
        fd([](WeightedDensities& p) -> double& { return p.n0; }),
        fd([](WeightedDensities& p) -> double& { return p.n1; }),
        fd([](WeightedDensities& p) -> double& { return p.n2; }),
        fd([](WeightedDensities& p) -> double& { return p.n3; }),
        fd([](WeightedDensities& p) -> double& { return p.nv1[0]; }),
        fd([](WeightedDensities& p) -> double& { return p.nv1[1]; }),
        fd([](WeightedDensities& p) -> double& { return p.nv1[2]; }),
        fd([](WeightedDensities& p) -> double& { return p.nv2[0]; }),
        fd([](WeightedDensities& p) -> double& { return p.nv2[1]; }),
        fd([](WeightedDensities& p) -> double& { return p.nv2[2]; }),
    };
    const double an[10] = {analytic.d0,     analytic.d1,     analytic.d2,     analytic.d3,
                           analytic.dv1[0], analytic.dv1[1], analytic.dv1[2], analytic.dv2[0],
                           analytic.dv2[1], analytic.dv2[2]};
    for (int c = 0; c < 10; ++c) {
      const double denom = std::max(std::abs(an[c]), 1e-8);
      worst = std::max(worst, std::abs(fds[c] - an[c]) / denom);
    }
  }

  std::cout << "max derivative error = " << worst << (worst <= 1e-5 ? " (ok)" : " (FAIL)")
            << "\n";
  return worst <= 1e-5 ? 0 : 1;
}

int cmd_dump_fields(const CommonArgs& args, const std::string& checkpoint_dir,
                    const std::string& out_dir) {
  Checkpoint cp = read_checkpoint(checkpoint_dir);
  dump_state_fields(out_dir, cp.state, cp.species_names);

  if (!args.config_path.empty()) {
    SimulationConfig cfg = build_config(args);
    Assembly as = assemble(cfg);
    if (!as.grid.same_shape(cp.state.u.grid())) {
      throw ConfigError("checkpoint grid does not match the configuration");
    }
    dump_context_fields(out_dir, as.stationary, as.fixed_charge);
  }

  std::cout << "phase " << cp.phase << ", iteration " << cp.iteration << ", fields in "
            << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steady-state ion and electron transport with classical DFT closures"};
  app.set_version_flag("--version", std::string(kVersion) + " (" + kGitRevision + ")");
  app.require_subcommand(1);

  CommonArgs run_args;
  std::string run_out = "out";
  std::string run_resume;
  bool run_quiet = false;
  CLI::App* run = app.add_subcommand("run", "solve one configuration to convergence");
  add_common(run, run_args);
  run->add_option("-o,--out", run_out, "output directory");
  run->add_option("--resume", run_resume, "checkpoint directory to restart from");
  run->add_flag("--quiet", run_quiet, "suppress per-iteration progress");

  CommonArgs st_args;
  std::string st_out = "out";
  std::string st_list = "200,260,320";
  bool st_quiet = false;
  CLI::App* st = app.add_subcommand("sweep-temperature", "conductivity across temperatures");
  add_common(st, st_args);
  st->add_option("-o,--out", st_out, "output directory");
  st->add_option("--temperatures", st_list, "comma-separated temperatures [K]");
  st->add_flag("--quiet", st_quiet, "suppress per-iteration progress");

  CommonArgs ss_args;
  std::string ss_out = "out";
  std::string ss_list = "10,20,40";
  bool ss_quiet = false;
  CLI::App* ss = app.add_subcommand("sweep-size", "conductivity across domain lengths");
  add_common(ss, ss_args);
  ss->add_option("-o,--out", ss_out, "output directory");
  ss->add_option("--sizes", ss_list, "comma-separated transport-axis cell counts");
  ss->add_flag("--quiet", ss_quiet, "suppress per-iteration progress");

  CommonArgs cx_args;
  std::string cx_out = "out";
  std::string cx_list = "4,8,16";
  int cx_iters = 2;
  bool cx_quiet = false;
  CLI::App* cx = app.add_subcommand("complexity", "grid-refinement scaling of the solver stages");
  add_common(cx, cx_args);
  cx->add_option("-o,--out", cx_out, "output directory");
  cx->add_option("--refinements", cx_list, "comma-separated nodes-per-cell values");
  cx->add_option("--iterations", cx_iters, "outer iterations per refinement");
  cx->add_flag("--quiet", cx_quiet, "suppress per-iteration progress");

  CLI::App* ck = app.add_subcommand("check-convolution",
                                    "spectral convolution against the direct sum");
  CLI::App* cd = app.add_subcommand("check-derivatives",
                                    "functional derivatives against finite differences");

  CommonArgs df_args;
  std::string df_checkpoint;
  std::string df_out = "out";
  CLI::App* df = app.add_subcommand("dump-fields", "write the fields of a checkpoint");
  add_common(df, df_args, /*config_required=*/false);
  df->add_option("--checkpoint", df_checkpoint, "checkpoint directory")->required();
  df->add_option("-o,--out", df_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_args, run_out, run_resume, run_quiet);
    if (st->parsed()) {
      std::vector<double> temps;
      for (const auto& tok : CLI::detail::split(st_list, ',')) temps.push_back(std::stod(tok));
      return run_sweep(build_config(st_args), temps, /*axis_is_size=*/false, st_out,
                       "temperature_K", st_quiet);
    }
    if (ss->parsed()) {
      std::vector<double> sizes;
      for (const auto& tok : CLI::detail::split(ss_list, ',')) sizes.push_back(std::stod(tok));
      return run_sweep(build_config(ss_args), sizes, /*axis_is_size=*/true, ss_out, "cells_y",
                       ss_quiet);
    }
    if (cx->parsed()) {
      std::vector<int> refs;
      for (const auto& tok : CLI::detail::split(cx_list, ',')) refs.push_back(std::stoi(tok));
      return cmd_complexity(cx_args, refs, cx_iters, cx_out, cx_quiet);
    }
    if (ck->parsed()) return cmd_check_convolution();
    if (cd->parsed()) return cmd_check_derivatives();
    if (df->parsed()) return cmd_dump_fields(df_args, df_checkpoint, df_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: category=config: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: category=convergence: " << e.what() << "\n";
    return 3;
  } catch (const NumericsError& e) {
    std::cerr << "error: category=numerics: " << e.what() << "\n";
    return 1;
  } catch (const PackingError& e) {
    std::cerr << "error: category=numerics: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: category=internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

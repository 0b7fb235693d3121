#include "pnpcdft/gummel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pnpcdft/constants.hpp"
#include "pnpcdft/parallel.hpp"
#include "pnpcdft/slotboom.hpp"
#include "pnpcdft/stencil.hpp"

namespace pnpcdft {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

NumericsError::NumericsError(std::string stage_, int iteration_, std::ptrdiff_t node_, int i_,
                             int j_, int k_)
    : std::runtime_error("non-finite value produced by stage '" + stage_ + "' at iteration " +
                         std::to_string(iteration_) + ", node " + std::to_string(node_) + " (i=" +
                         std::to_string(i_) + ", j=" + std::to_string(j_) + ", k=" +
                         std::to_string(k_) + ")"),
      stage(std::move(stage_)),
      iteration(iteration_),
      node(node_),
      i(i_),
      j(j_),
      k(k_) {}

namespace {

std::string convergence_message(const std::string& what, int iterations, double du, double drho) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), " did not converge after %d iterations (delta_u=%.3e, delta_rho=%.3e)",
                iterations, du, drho);
  return what + buf;
}

}  // namespace

ConvergenceError::ConvergenceError(std::string what_, int iterations_, double du, double drho,
                                   std::vector<IterationRecord> history_)
    : std::runtime_error(convergence_message(what_, iterations_, du, drho)),
      iterations(iterations_),
      delta_u(du),
      delta_rho(drho),
      history(std::move(history_)) {}

namespace {

[[noreturn]] void throw_numerics(const GridSpec& g, const std::string& stage, int iter,
                                 std::ptrdiff_t node) {
  const int k = static_cast<int>(node % g.nz);
  const int j = static_cast<int>((node / g.nz) % g.ny);
  const int i = static_cast<int>(node / (static_cast<std::ptrdiff_t>(g.ny) * g.nz));
  throw NumericsError(stage, iter, node, i, j, k);
}

}  // namespace

struct GummelDriver::Impl {
  explicit Impl(const Thermo& t) : thermo(t) {}

  Thermo thermo;
  ChemicalPotentialEngine* engine = nullptr;
  GridSpec grid;
  ScalarField fixed_charge;
  double v_app = 0.0;
  GummelSettings settings;
  MgSettings mg;

  std::unique_ptr<MgSolver> poisson;
  std::vector<std::unique_ptr<MgSolver>> np;
  std::vector<ScalarField> sbar, rhobar, dbar;

  double solver_seconds = 0.0;

  void scan(const ScalarField& f, const char* stage, int iter) const {
    const std::ptrdiff_t bad = f.first_non_finite();
    if (bad >= 0) throw_numerics(f.grid(), stage, iter, bad);
  }

  void scan_vec(const std::vector<double>& v, const std::string& stage, int iter) const {
    for (std::size_t n = 0; n < v.size(); ++n) {
      if (!std::isfinite(v[n])) throw_numerics(grid, stage, iter, static_cast<std::ptrdiff_t>(n));
    }
  }

  double bias_u() const { return thermo.beta() * v_app; }

  // One Poisson solve followed by under-relaxation. Returns cycle count.
  // history is only read if the linear solve fails, to report partial work.
  int poisson_step(SystemState& state, bool biased, int iter,
                   const std::vector<IterationRecord>& history) {
    int nm = engine->mobile_count();
    ScalarField src(grid);
    int threads = settings.threads;
    double pref = 4.0 * constants::pi * thermo.bjerrum_nm();
    parallel_for(0, src.size(), threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t n = lo; n < hi; ++n) {
        double q = fixed_charge[n];
        for (int m = 0; m < nm; ++m) q += engine->mobile(m).valence * state.rho[m][n];
        src[n] = pref * q;
      }
    });

    std::size_t plane = static_cast<std::size_t>(grid.nx) * grid.nz;
    std::vector<double> lo_bc(plane, 0.0);
    std::vector<double> hi_bc(plane, biased ? bias_u() : 0.0);
    std::vector<double> b = assemble_rhs(grid, src, lo_bc, hi_bc);

    std::vector<double> x(state.u.data(), state.u.data() + state.u.size());
    double t0 = now_seconds();
    SolveStats stats = poisson->solve(x, b);
    solver_seconds += now_seconds() - t0;
    if (!stats.converged) {
      throw ConvergenceError("potential linear solve", stats.cycles, stats.relative_residual, 0.0,
                             history);
    }
    scan_vec(x, "poisson", iter);

    ScalarField u_new(grid);
    std::copy(x.begin(), x.end(), u_new.data());
    double lambda = biased ? settings.lambda_u : settings.eq_lambda_u;
    relax_into(state.u, u_new, lambda);
    // Relaxation must not bend the boundary rows away from the exact values.
    double hi_val = biased ? bias_u() : 0.0;
    for (int i = 0; i < grid.nx; ++i) {
      for (int k = 0; k < grid.nz; ++k) {
        state.u(i, 0, k) = 0.0;
        state.u(i, grid.ny - 1, k) = hi_val;
      }
    }
    return stats.cycles;
  }

  // One transformed diffusion solve for species m; state.rho[m] is updated
  // in place through the relaxation factor.
  int np_step(SystemState& state, int m, int iter,
              const std::vector<IterationRecord>& history) {
    const SpeciesSpec& sp = engine->mobile(m);
    int threads = settings.threads;
    double beta = thermo.beta();

    sbar[m] = slotboom_exponent(sp.valence, state.u, engine->mu_ideal(m), engine->mu_excess(m),
                                beta, settings.exp_clamp, threads);
    scan(sbar[m], "slotboom exponent", iter);
    rhobar[m] = slotboom_density(state.rho[m], sbar[m], threads);
    dbar[m] = slotboom_diffusivity(sp.diffusion_cm2_s * constants::nm2_per_cm2, sbar[m], threads);
    scan(rhobar[m], "transformed density", iter);
    scan(dbar[m], "transformed diffusivity", iter);

    double t0 = now_seconds();
    // The transformed diffusivity spans exp(+-|s|) decades, which puts the
    // true-residual roundoff floor of this system far above the tolerance.
    // The recurrence residual is the meaningful convergence measure here.
    MgSettings np_mg = mg;
    np_mg.verify_true_residual = false;
    np[m] = std::make_unique<MgSolver>(grid, dbar[m], np_mg);
    std::size_t plane = static_cast<std::size_t>(grid.nx) * grid.nz;
    std::vector<double> lo_bc(plane), hi_bc(plane);
    for (int i = 0; i < grid.nx; ++i) {
      for (int k = 0; k < grid.nz; ++k) {
        lo_bc[static_cast<std::size_t>(i) * grid.nz + k] =
            sp.bulk_nm3 * std::exp(sbar[m](i, 0, k));
        hi_bc[static_cast<std::size_t>(i) * grid.nz + k] =
            sp.bulk_nm3 * std::exp(sbar[m](i, grid.ny - 1, k));
      }
    }
    ScalarField zero(grid);
    std::vector<double> b = assemble_rhs(grid, zero, lo_bc, hi_bc);
    std::vector<double> x(rhobar[m].data(), rhobar[m].data() + rhobar[m].size());
    SolveStats stats = np[m]->solve(x, b);
    solver_seconds += now_seconds() - t0;
    if (!stats.converged) {
      throw ConvergenceError("density linear solve (" + sp.name + ")", stats.cycles,
                             stats.relative_residual, 0.0, history);
    }
    scan_vec(x, "density solve " + sp.name, iter);

    // Tiny negative overshoots are quadrature noise; the inversion clamps.
    std::copy(x.begin(), x.end(), rhobar[m].data());
    ScalarField rho_new = slotboom_invert(rhobar[m], sbar[m], threads);
    scan(rho_new, "density inversion", iter);
    relax_into(state.rho[m], rho_new, settings.lambda_rho);
    return stats.cycles;
  }

  void check_state(const SystemState& state) const {
    if (!state.u.grid().same_shape(grid)) {
      throw std::invalid_argument("state potential is on a different grid");
    }
    if (static_cast<int>(state.rho.size()) != engine->mobile_count()) {
      throw std::invalid_argument("state has the wrong number of density fields");
    }
    for (const auto& r : state.rho) {
      if (!r.grid().same_shape(grid)) {
        throw std::invalid_argument("state density is on a different grid");
      }
    }
  }
};

GummelDriver::~GummelDriver() = default;

GummelDriver::GummelDriver(const Thermo& thermo, ChemicalPotentialEngine& engine,
                           ScalarField fixed_charge, double applied_voltage_V,
                           GummelSettings settings, MgSettings mg)
    : impl_(std::make_unique<Impl>(thermo)) {
  Impl& im = *impl_;
  im.engine = &engine;
  im.grid = engine.grid();
  if (!fixed_charge.grid().same_shape(im.grid)) {
    throw std::invalid_argument("fixed charge field is on a different grid");
  }
  im.fixed_charge = std::move(fixed_charge);
  im.v_app = applied_voltage_V;
  im.settings = settings;
  im.mg = mg;

  ScalarField one(im.grid, 1.0);
  im.poisson = std::make_unique<MgSolver>(im.grid, one, mg);
  int nm = engine.mobile_count();
  im.np.resize(nm);
  im.sbar.assign(nm, ScalarField(im.grid));
  im.rhobar.assign(nm, ScalarField(im.grid));
  im.dbar.assign(nm, ScalarField(im.grid));
}

SystemState GummelDriver::initial_state() const {
  const Impl& im = *impl_;
  SystemState s;
  s.u = ScalarField(im.grid, 0.0);
  for (int m = 0; m < im.engine->mobile_count(); ++m) {
    s.rho.emplace_back(im.grid, im.engine->mobile(m).bulk_nm3);
  }
  return s;
}

std::vector<IterationRecord> GummelDriver::equilibrate(
    SystemState& state,
    const std::function<void(const IterationRecord&, const SystemState&)>& observer) {
  Impl& im = *impl_;
  im.check_state(state);
  int nm = im.engine->mobile_count();
  int threads = im.settings.threads;
  double beta = im.thermo.beta();
  int sign = im.engine->settings().ideal_mu_sign;

  std::vector<double> mu_ref(nm), lng_bulk(nm);
  for (int m = 0; m < nm; ++m) {
    mu_ref[m] = im.engine->mu_excess_bulk(m);
    lng_bulk[m] = im.engine->ln_gamma_bulk(m);
  }

  std::vector<IterationRecord> history;
  ScalarField u_prev(im.grid), target(im.grid);
  std::vector<ScalarField> rho_prev(nm, ScalarField(im.grid));

  for (int it = 1; it <= im.settings.eq_max_iterations; ++it) {
    double t0 = now_seconds();
    u_prev = state.u;
    for (int m = 0; m < nm; ++m) rho_prev[m] = state.rho[m];

    IterationRecord rec;
    rec.iteration = it;
    rec.poisson_cycles = im.poisson_step(state, /*biased=*/false, it, history);

    im.engine->evaluate(state.rho);
    rec.max_packing = im.engine->max_packing();

    // Constant-chemical-potential fixed point: the density that makes the
    // node's total chemical potential match the reservoir, at the current
    // potential and excess landscape.
    for (int m = 0; m < nm; ++m) {
      const SpeciesSpec& sp = im.engine->mobile(m);
      const ScalarField& mu_ex = im.engine->mu_excess(m);
      const ScalarField& lng = im.engine->ln_gamma(m);
      double clamp = im.settings.exp_clamp;
      double step_up = std::exp(im.settings.eq_max_log_step);
      double step_dn = 1.0 / step_up;
      parallel_for(0, target.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t n = lo; n < hi; ++n) {
          double arg = sign * (-sp.valence * state.u[n] - beta * (mu_ex[n] - mu_ref[m])) +
                       lng_bulk[m] - lng[n];
          double t = sp.bulk_nm3 * std::exp(std::clamp(arg, -clamp, clamp));
          double cur = state.rho[m][n];
          target[n] = std::clamp(t, cur * step_dn, cur * step_up);
        }
      });
      im.scan(target, "equilibrium map", it);
      relax_into(state.rho[m], target, im.settings.eq_lambda_rho);
    }

    rec.delta_u = max_abs_diff(state.u, u_prev);
    rec.delta_rho = 0.0;
    for (int m = 0; m < nm; ++m) {
      rec.delta_rho = std::max(
          rec.delta_rho, max_abs_diff(state.rho[m], rho_prev[m]) / im.engine->mobile(m).bulk_nm3);
    }
    rec.seconds = now_seconds() - t0;
    history.push_back(rec);
    if (observer) observer(rec, state);
    if (rec.delta_u <= im.settings.tol_u && rec.delta_rho <= im.settings.tol_rho) {
      return history;
    }
  }
  const IterationRecord& last = history.back();
  throw ConvergenceError("zero-bias relaxation", static_cast<int>(history.size()), last.delta_u,
                         last.delta_rho, history);
}

std::vector<IterationRecord> GummelDriver::run(
    SystemState& state,
    const std::function<void(const IterationRecord&, const SystemState&)>& observer) {
  Impl& im = *impl_;
  im.check_state(state);
  int nm = im.engine->mobile_count();

  std::vector<IterationRecord> history;
  ScalarField u_prev(im.grid);
  std::vector<ScalarField> rho_prev(nm, ScalarField(im.grid));

  for (int it = 1; it <= im.settings.max_iterations; ++it) {
    double t0 = now_seconds();
    u_prev = state.u;
    for (int m = 0; m < nm; ++m) rho_prev[m] = state.rho[m];

    IterationRecord rec;
    rec.iteration = it;
    rec.poisson_cycles = im.poisson_step(state, /*biased=*/true, it, history);

    im.engine->evaluate(state.rho);
    rec.max_packing = im.engine->max_packing();

    for (int m = 0; m < nm; ++m) {
      rec.np_cycles.push_back(im.np_step(state, m, it, history));
    }

    rec.delta_u = max_abs_diff(state.u, u_prev);
    rec.delta_rho = 0.0;
    for (int m = 0; m < nm; ++m) {
      rec.delta_rho = std::max(
          rec.delta_rho, max_abs_diff(state.rho[m], rho_prev[m]) / im.engine->mobile(m).bulk_nm3);
    }
    rec.seconds = now_seconds() - t0;
    history.push_back(rec);
    if (observer) observer(rec, state);
    if (rec.delta_u <= im.settings.tol_u && rec.delta_rho <= im.settings.tol_rho) {
      return history;
    }
  }
  const IterationRecord& last = history.back();
  throw ConvergenceError("outer iteration", static_cast<int>(history.size()), last.delta_u,
                         last.delta_rho, history);
}

const ScalarField& GummelDriver::exponent(int m) const { return impl_->sbar.at(m); }
const ScalarField& GummelDriver::transformed_density(int m) const { return impl_->rhobar.at(m); }
const ScalarField& GummelDriver::transformed_diffusivity(int m) const {
  return impl_->dbar.at(m);
}

const MgSolver& GummelDriver::species_solver(int m) const {
  const auto& p = impl_->np.at(m);
  if (!p) throw std::logic_error("no transport solve has run for this species yet");
  return *p;
}

double GummelDriver::applied_bias_u() const { return impl_->bias_u(); }

double GummelDriver::solver_seconds() const { return impl_->solver_seconds; }

}  // namespace pnpcdft

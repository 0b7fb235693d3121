#include "pnpcdft/cdft.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "pnpcdft/constants.hpp"
#include "pnpcdft/kernels.hpp"
#include "pnpcdft/parallel.hpp"
#include "pnpcdft/shell_quadrature.hpp"

namespace pnpcdft {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void add_scaled(ScalarField& acc, const ScalarField& f, double s, int threads) {
  parallel_for(0, acc.size(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t n = lo; n < hi; ++n) acc[n] += s * f[n];
  });
}

}  // namespace

PackingError::PackingError(int i_, int j_, int k_, double n3_)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "packing fraction n3=" << n3_ << " at node (" << i_ << "," << j_ << "," << k_
           << ") reached the hard-sphere limit";
        return os.str();
      }()),
      i(i_),
      j(j_),
      k(k_),
      n3(n3_) {}

struct ChemicalPotentialEngine::Impl {
  Impl(const GridSpec& g, const Thermo& t, const CdftSettings& s)
      : grid(g), thermo(t), settings(s) {}

  GridSpec grid;
  Thermo thermo;
  CdftSettings settings;
  std::vector<SpeciesSpec> mobile;
  SphereRule rule;

  // Contributions of the stationary species, fixed at construction.
  ScalarField sn0, sn1, sn2, sn3;
  VectorField snv1, snv2;
  std::vector<ScalarField> mu_sh;  // per mobile species

  std::vector<ConvolutionPlan> ball;  // per mobile species radius
  ConvolutionPlan coulomb;
  std::vector<ConvolutionPlan> msa;  // unordered pairs, see pair_index

  // Work fields reused across evaluate calls.
  ScalarField n0, n1, n2, n3;
  VectorField nv1, nv2;
  ScalarField d0, d1, d2, d3;
  VectorField dv1, dv2;
  ScalarField combo, shell_s, scratch;
  VectorField combo_v, shell_v;
  std::vector<ScalarField> drho;

  std::vector<ScalarField> mu_id, lng, mu_hs, mu_c, mu_el, mu_ex;

  double max_n3 = 0.0;
  Timing timing;

  int pair_index(int a, int b) const {
    int lo = std::min(a, b);
    int hi = std::max(a, b);
    int n = static_cast<int>(mobile.size());
    return lo * n - lo * (lo + 1) / 2 + hi;
  }

  double timed_fft(ScalarField& out, const ConvolutionPlan& plan, const ScalarField& f) {
    double t0 = now_seconds();
    out = plan.apply(f);
    double dt = now_seconds() - t0;
    timing.fft_seconds += dt;
    return dt;
  }
};

ChemicalPotentialEngine::~ChemicalPotentialEngine() = default;
ChemicalPotentialEngine::ChemicalPotentialEngine(ChemicalPotentialEngine&&) noexcept = default;
ChemicalPotentialEngine& ChemicalPotentialEngine::operator=(ChemicalPotentialEngine&&) noexcept =
    default;

ChemicalPotentialEngine::ChemicalPotentialEngine(
    const GridSpec& grid, const Thermo& thermo, std::vector<SpeciesSpec> species,
    std::vector<SquareWellSpec> wells,
    std::vector<std::pair<std::string, ScalarField>> stationary_density, CdftSettings settings)
    : impl_(std::make_unique<Impl>(grid, thermo, settings)) {
  Impl& im = *impl_;

  if (settings.ideal_mu_sign != 1 && settings.ideal_mu_sign != -1) {
    throw std::invalid_argument("ideal_mu_sign must be +1 or -1");
  }
  if (settings.quad_theta < 4 || settings.quad_phi < 2) {
    throw std::invalid_argument("sphere quadrature orders are too small");
  }
  if (!(settings.well_gamma > 1.0)) {
    throw std::invalid_argument("square-well range factor must exceed 1");
  }

  std::vector<SpeciesSpec> stationary;
  std::vector<ScalarField> stat_rho;
  for (auto& sp : species) {
    if (sp.mobile) {
      if (!(sp.bulk_nm3 > 0.0)) {
        throw std::invalid_argument("mobile species " + sp.name +
                                    " needs a positive bulk density");
      }
      if (!(sp.diameter_nm > 0.0)) {
        throw std::invalid_argument("mobile species " + sp.name + " needs a positive diameter");
      }
      im.mobile.push_back(sp);
    } else {
      bool found = false;
      for (auto& [name, rho] : stationary_density) {
        if (name == sp.name) {
          if (!rho.grid().same_shape(grid)) {
            throw std::invalid_argument("stationary density for " + sp.name +
                                        " is on a different grid");
          }
          stationary.push_back(sp);
          stat_rho.push_back(rho);
          found = true;
          break;
        }
      }
      if (!found) {
        throw std::invalid_argument("no density field given for stationary species " + sp.name);
      }
    }
  }
  for (auto& [name, rho] : stationary_density) {
    (void)rho;
    bool known = false;
    for (auto& sp : stationary) known = known || sp.name == name;
    if (!known) throw std::invalid_argument("density field for unknown species " + name);
  }
  if (im.mobile.empty()) throw std::invalid_argument("at least one mobile species is required");

  im.rule = make_sphere_rule(settings.quad_theta, settings.quad_phi);

  // Stationary contributions to the weighted densities are assembled once.
  im.sn0 = ScalarField(grid);
  im.sn1 = ScalarField(grid);
  im.sn2 = ScalarField(grid);
  im.sn3 = ScalarField(grid);
  im.snv1 = VectorField(grid);
  im.snv2 = VectorField(grid);
  {
    ScalarField s2(grid);
    VectorField v2(grid);
    for (std::size_t s = 0; s < stationary.size(); ++s) {
      double R = stationary[s].radius_nm();
      if (!(R > 0.0)) {
        throw std::invalid_argument("stationary species " + stationary[s].name +
                                    " needs a positive diameter");
      }
      shell_scalar_and_vector(stat_rho[s], R, im.rule, s2, v2, settings.threads);
      double a2 = 4.0 * constants::pi * R * R;
      add_scaled(im.sn0, s2, 1.0 / a2, settings.threads);
      add_scaled(im.sn1, s2, 1.0 / (4.0 * constants::pi * R), settings.threads);
      add_scaled(im.sn2, s2, 1.0, settings.threads);
      add_scaled(im.snv1.x, v2.x, 1.0 / (4.0 * constants::pi * R), settings.threads);
      add_scaled(im.snv1.y, v2.y, 1.0 / (4.0 * constants::pi * R), settings.threads);
      add_scaled(im.snv1.z, v2.z, 1.0 / (4.0 * constants::pi * R), settings.threads);
      add_scaled(im.snv2.x, v2.x, 1.0, settings.threads);
      add_scaled(im.snv2.y, v2.y, 1.0, settings.threads);
      add_scaled(im.snv2.z, v2.z, 1.0, settings.threads);

      ConvolutionPlan bp = plan_kernel(grid, ball_kernel(grid, R));
      ScalarField b3 = bp.apply(stat_rho[s]);
      add_scaled(im.sn3, b3, 1.0, settings.threads);
    }
  }

  // Square-well potentials: static because wells pair mobiles with
  // stationaries only. The half factor is part of the model statement.
  im.mu_sh.assign(im.mobile.size(), ScalarField(grid));
  for (const auto& w : wells) {
    int m = -1;
    for (std::size_t i = 0; i < im.mobile.size(); ++i) {
      if (im.mobile[i].name == w.mobile) m = static_cast<int>(i);
    }
    if (m < 0) throw std::invalid_argument("square well names unknown mobile species " + w.mobile);
    int s = -1;
    for (std::size_t i = 0; i < stationary.size(); ++i) {
      if (stationary[i].name == w.stationary) s = static_cast<int>(i);
    }
    if (s < 0) {
      throw std::invalid_argument("square well names unknown stationary species " + w.stationary);
    }
    double sigma = 0.5 * (im.mobile[m].diameter_nm + stationary[s].diameter_nm);
    ConvolutionPlan wp =
        plan_kernel(grid, square_well_kernel(sigma, settings.well_gamma, w.depth_eV));
    ScalarField conv = wp.apply(stat_rho[s]);
    add_scaled(im.mu_sh[m], conv, 0.5, settings.threads);
  }

  // Persistent plans for the mobile-density convolutions.
  for (const auto& sp : im.mobile) {
    im.ball.push_back(plan_kernel(grid, ball_kernel(grid, sp.radius_nm())));
  }
  im.coulomb = plan_kernel(grid, coulomb_kernel(grid));

  std::vector<double> bulk, q;
  for (const auto& sp : im.mobile) {
    bulk.push_back(sp.bulk_nm3);
    q.push_back(sp.valence);
  }
  double kappa =
      std::sqrt(thermo.kappa_squared(bulk.data(), q.data(), static_cast<int>(bulk.size())));
  for (std::size_t a = 0; a < im.mobile.size(); ++a) {
    for (std::size_t b = a; b < im.mobile.size(); ++b) {
      double sigma = 0.5 * (im.mobile[a].diameter_nm + im.mobile[b].diameter_nm);
      double B = msa_b_parameter(kappa * sigma);
      double pref = im.mobile[a].valence * im.mobile[b].valence * thermo.bjerrum_nm();
      im.msa.push_back(plan_kernel(grid, msa_kernel(grid, sigma, B, pref)));
    }
  }

  int nm = static_cast<int>(im.mobile.size());
  im.n0 = ScalarField(grid);
  im.n1 = ScalarField(grid);
  im.n2 = ScalarField(grid);
  im.n3 = ScalarField(grid);
  im.nv1 = VectorField(grid);
  im.nv2 = VectorField(grid);
  im.d0 = ScalarField(grid);
  im.d1 = ScalarField(grid);
  im.d2 = ScalarField(grid);
  im.d3 = ScalarField(grid);
  im.dv1 = VectorField(grid);
  im.dv2 = VectorField(grid);
  im.combo = ScalarField(grid);
  im.shell_s = ScalarField(grid);
  im.scratch = ScalarField(grid);
  im.combo_v = VectorField(grid);
  im.shell_v = VectorField(grid);
  im.drho.assign(nm, ScalarField(grid));
  im.mu_id.assign(nm, ScalarField(grid));
  im.lng.assign(nm, ScalarField(grid));
  im.mu_hs.assign(nm, ScalarField(grid));
  im.mu_c.assign(nm, ScalarField(grid));
  im.mu_el.assign(nm, ScalarField(grid));
  im.mu_ex.assign(nm, ScalarField(grid));
}

int ChemicalPotentialEngine::mobile_count() const {
  return static_cast<int>(impl_->mobile.size());
}

const SpeciesSpec& ChemicalPotentialEngine::mobile(int m) const { return impl_->mobile.at(m); }

const GridSpec& ChemicalPotentialEngine::grid() const { return impl_->grid; }

const CdftSettings& ChemicalPotentialEngine::settings() const { return impl_->settings; }

void ChemicalPotentialEngine::evaluate(const std::vector<ScalarField>& rho) {
  Impl& im = *impl_;
  int nm = mobile_count();
  if (static_cast<int>(rho.size()) != nm) {
    throw std::invalid_argument("evaluate: wrong number of density fields");
  }
  for (const auto& r : rho) {
    if (!r.grid().same_shape(im.grid)) {
      throw std::invalid_argument("evaluate: density field on a different grid");
    }
  }
  int threads = im.settings.threads;
  double kT = im.thermo.kT();

  // Weighted densities: static part plus one fused shell pass and one ball
  // convolution per mobile species.
  im.n0 = im.sn0;
  im.n1 = im.sn1;
  im.n2 = im.sn2;
  im.n3 = im.sn3;
  im.nv1 = im.snv1;
  im.nv2 = im.snv2;
  for (int m = 0; m < nm; ++m) {
    double R = im.mobile[m].radius_nm();
    double t0 = now_seconds();
    shell_scalar_and_vector(rho[m], R, im.rule, im.shell_s, im.shell_v, threads);
    im.timing.quadrature_seconds += now_seconds() - t0;
    double a2 = 4.0 * constants::pi * R * R;
    add_scaled(im.n0, im.shell_s, 1.0 / a2, threads);
    add_scaled(im.n1, im.shell_s, 1.0 / (4.0 * constants::pi * R), threads);
    add_scaled(im.n2, im.shell_s, 1.0, threads);
    add_scaled(im.nv1.x, im.shell_v.x, 1.0 / (4.0 * constants::pi * R), threads);
    add_scaled(im.nv1.y, im.shell_v.y, 1.0 / (4.0 * constants::pi * R), threads);
    add_scaled(im.nv1.z, im.shell_v.z, 1.0 / (4.0 * constants::pi * R), threads);
    add_scaled(im.nv2.x, im.shell_v.x, 1.0, threads);
    add_scaled(im.nv2.y, im.shell_v.y, 1.0, threads);
    add_scaled(im.nv2.z, im.shell_v.z, 1.0, threads);
    im.timed_fft(im.scratch, im.ball[m], rho[m]);
    add_scaled(im.n3, im.scratch, 1.0, threads);
  }

  // Packing scan before the functional sees a pole.
  im.max_n3 = 0.0;
  std::size_t arg = 0;
  for (std::size_t n = 0; n < im.n3.size(); ++n) {
    if (im.n3[n] > im.max_n3) {
      im.max_n3 = im.n3[n];
      arg = n;
    }
  }
  if (im.max_n3 >= im.settings.packing_limit) {
    int nz = im.grid.nz, ny = im.grid.ny;
    int k = static_cast<int>(arg % nz);
    int j = static_cast<int>((arg / nz) % ny);
    int i = static_cast<int>(arg / (static_cast<std::size_t>(ny) * nz));
    throw PackingError(i, j, k, im.max_n3);
  }

  // Pointwise functional derivatives.
  HsFunctional variant = im.settings.functional;
  parallel_for(0, im.n0.size(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t n = lo; n < hi; ++n) {
      WeightedDensities w;
      w.n0 = im.n0[n];
      w.n1 = im.n1[n];
      w.n2 = im.n2[n];
      w.n3 = im.n3[n];
      w.nv1 = {im.nv1.x[n], im.nv1.y[n], im.nv1.z[n]};
      w.nv2 = {im.nv2.x[n], im.nv2.y[n], im.nv2.z[n]};
      HsPartials d = phi_hs_partials(w, variant);
      im.d0[n] = d.d0;
      im.d1[n] = d.d1;
      im.d2[n] = d.d2;
      im.d3[n] = d.d3;
      im.dv1.x[n] = d.dv1[0];
      im.dv1.y[n] = d.dv1[1];
      im.dv1.z[n] = d.dv1[2];
      im.dv2.x[n] = d.dv2[0];
      im.dv2.y[n] = d.dv2[1];
      im.dv2.z[n] = d.dv2[2];
    }
  });

  // Hard-sphere chemical potentials: scalar weights collapse onto one shell
  // pass, the volume weight reuses the ball plan, vector weights project onto
  // the potential orientation (sample direction reversed).
  for (int m = 0; m < nm; ++m) {
    double R = im.mobile[m].radius_nm();
    double a2 = 4.0 * constants::pi * R * R;
    double a1 = 4.0 * constants::pi * R;
    parallel_for(0, im.combo.size(), threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t n = lo; n < hi; ++n) {
        im.combo[n] = im.d0[n] / a2 + im.d1[n] / a1 + im.d2[n];
        im.combo_v.x[n] = im.dv1.x[n] / a1 + im.dv2.x[n];
        im.combo_v.y[n] = im.dv1.y[n] / a1 + im.dv2.y[n];
        im.combo_v.z[n] = im.dv1.z[n] / a1 + im.dv2.z[n];
      }
    });
    double t0 = now_seconds();
    ScalarField shell = shell_integral(im.combo, R, im.rule, threads);
    ScalarField vdot = shell_dot_direction(im.combo_v, R, im.rule, -1.0, threads);
    im.timing.quadrature_seconds += now_seconds() - t0;
    im.timed_fft(im.scratch, im.ball[m], im.d3);
    parallel_for(0, shell.size(), threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t n = lo; n < hi; ++n) {
        im.mu_hs[m][n] = kT * (shell[n] + im.scratch[n] + vdot[n]);
      }
    });
  }

  // Ideal part with the Debye-Hueckel activity coefficient.
  double A = im.thermo.dh_A();
  double Bc = im.thermo.dh_B();
  int sign = im.settings.ideal_mu_sign;
  double floor = im.settings.rho_floor;
  parallel_for(0, im.n0.size(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t n = lo; n < hi; ++n) {
      double ionic = 0.0;
      for (int m = 0; m < nm; ++m) {
        double r = std::max(rho[m][n], 0.0);
        ionic += 0.5 * r * im.mobile[m].valence * im.mobile[m].valence;
      }
      double sq = std::sqrt(ionic);
      for (int m = 0; m < nm; ++m) {
        double qv = im.mobile[m].valence;
        double a = im.mobile[m].dh_size_or_default();
        double lng = -A * qv * qv * sq / (1.0 + Bc * a * sq);
        double r = std::max(rho[m][n], floor);
        im.lng[m][n] = lng;
        im.mu_id[m][n] = sign * kT * (lng + std::log(r / im.mobile[m].bulk_nm3));
      }
    }
  });

  // Mean-field Coulomb: one convolution of the mobile charge density.
  parallel_for(0, im.scratch.size(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t n = lo; n < hi; ++n) {
      double qv = 0.0;
      for (int m = 0; m < nm; ++m) qv += im.mobile[m].valence * rho[m][n];
      im.scratch[n] = qv;
    }
  });
  ScalarField cconv;
  {
    double t0 = now_seconds();
    cconv = im.coulomb.apply(im.scratch);
    im.timing.fft_seconds += now_seconds() - t0;
  }
  double lB = im.thermo.bjerrum_nm();
  for (int m = 0; m < nm; ++m) {
    double s = im.mobile[m].valence * kT * lB;
    parallel_for(0, cconv.size(), threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t n = lo; n < hi; ++n) im.mu_c[m][n] = s * cconv[n];
    });
  }

  // Residual electrostatic correlation from density deviations; the uniform
  // bulk value is the reference and enters as zero.
  for (int m = 0; m < nm; ++m) {
    double b = im.mobile[m].bulk_nm3;
    parallel_for(0, im.drho[m].size(), threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t n = lo; n < hi; ++n) im.drho[m][n] = rho[m][n] - b;
    });
  }
  for (int m = 0; m < nm; ++m) {
    im.mu_el[m].fill(0.0);
    for (int j = 0; j < nm; ++j) {
      im.timed_fft(im.scratch, im.msa[im.pair_index(m, j)], im.drho[j]);
      add_scaled(im.mu_el[m], im.scratch, -kT, threads);
    }
  }

  for (int m = 0; m < nm; ++m) {
    parallel_for(0, im.mu_ex[m].size(), threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t n = lo; n < hi; ++n) {
        im.mu_ex[m][n] = im.mu_hs[m][n] + im.mu_sh[m][n] + im.mu_c[m][n] + im.mu_el[m][n];
      }
    });
  }
}

const ScalarField& ChemicalPotentialEngine::mu_ideal(int m) const { return impl_->mu_id.at(m); }
const ScalarField& ChemicalPotentialEngine::ln_gamma(int m) const { return impl_->lng.at(m); }
const ScalarField& ChemicalPotentialEngine::mu_excess(int m) const { return impl_->mu_ex.at(m); }
const ScalarField& ChemicalPotentialEngine::mu_hard_sphere(int m) const {
  return impl_->mu_hs.at(m);
}
const ScalarField& ChemicalPotentialEngine::mu_short_range(int m) const {
  return impl_->mu_sh.at(m);
}
const ScalarField& ChemicalPotentialEngine::mu_coulomb(int m) const { return impl_->mu_c.at(m); }
const ScalarField& ChemicalPotentialEngine::mu_electrostatic(int m) const {
  return impl_->mu_el.at(m);
}

double ChemicalPotentialEngine::mu_excess_bulk(int m) const {
  const Impl& im = *impl_;
  WeightedDensities w;
  for (const auto& sp : im.mobile) {
    double R = sp.radius_nm();
    w.n0 += sp.bulk_nm3;
    w.n1 += sp.bulk_nm3 * R;
    w.n2 += sp.bulk_nm3 * 4.0 * constants::pi * R * R;
    w.n3 += sp.bulk_nm3 * 4.0 / 3.0 * constants::pi * R * R * R;
  }
  HsPartials d = phi_hs_partials(w, im.settings.functional);
  double R = im.mobile.at(m).radius_nm();
  return im.thermo.kT() * (d.d0 + d.d1 * R + d.d2 * 4.0 * constants::pi * R * R +
                           d.d3 * 4.0 / 3.0 * constants::pi * R * R * R);
}

double ChemicalPotentialEngine::ln_gamma_bulk(int m) const {
  const Impl& im = *impl_;
  double ionic = 0.0;
  for (const auto& sp : im.mobile) ionic += 0.5 * sp.bulk_nm3 * sp.valence * sp.valence;
  double sq = std::sqrt(ionic);
  double qv = im.mobile.at(m).valence;
  double a = im.mobile.at(m).dh_size_or_default();
  return -im.thermo.dh_A() * qv * qv * sq / (1.0 + im.thermo.dh_B() * a * sq);
}

double ChemicalPotentialEngine::mu_ideal_at(int m, const std::vector<double>& rho_node) const {
  const Impl& im = *impl_;
  if (rho_node.size() != im.mobile.size()) {
    throw std::invalid_argument("mu_ideal_at: wrong density count");
  }
  double ionic = 0.0;
  for (std::size_t j = 0; j < im.mobile.size(); ++j) {
    ionic += 0.5 * std::max(rho_node[j], 0.0) * im.mobile[j].valence * im.mobile[j].valence;
  }
  double sq = std::sqrt(ionic);
  double qv = im.mobile.at(m).valence;
  double a = im.mobile.at(m).dh_size_or_default();
  double lng = -im.thermo.dh_A() * qv * qv * sq / (1.0 + im.thermo.dh_B() * a * sq);
  double r = std::max(rho_node[m], im.settings.rho_floor);
  return im.settings.ideal_mu_sign * im.thermo.kT() *
         (lng + std::log(r / im.mobile.at(m).bulk_nm3));
}

double ChemicalPotentialEngine::short_range_free_energy(
    const std::vector<ScalarField>& rho) const {
  const Impl& im = *impl_;
  if (rho.size() != im.mobile.size()) {
    throw std::invalid_argument("short_range_free_energy: wrong density count");
  }
  // The ordered pair sum collapses by kernel symmetry onto twice the product
  // of each mobile density with its static well potential.
  double F = 0.0;
  ScalarField prod(im.grid);
  for (std::size_t m = 0; m < im.mobile.size(); ++m) {
    for (std::size_t n = 0; n < prod.size(); ++n) {
      prod[n] = rho[m][n] * im.mu_sh[m][n];
    }
    F += 2.0 * prod.integrate();
  }
  return F;
}

double ChemicalPotentialEngine::max_packing() const { return impl_->max_n3; }

const ScalarField& ChemicalPotentialEngine::packing() const { return impl_->n3; }

const ChemicalPotentialEngine::Timing& ChemicalPotentialEngine::timing() const {
  return impl_->timing;
}

void ChemicalPotentialEngine::reset_timing() { impl_->timing = Timing{}; }

}  // namespace pnpcdft

#include "pnpcdft/shell_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <thread>

#include "pnpcdft/constants.hpp"
#include "pnpcdft/parallel.hpp"

namespace pnpcdft {

void parallel_for(std::size_t begin, std::size_t end, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (end <= begin) return;
  const std::size_t count = end - begin;
  if (threads <= 1 || count < 2) {
    fn(begin, end);
    return;
  }
  const std::size_t nchunk = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(nchunk);
  const std::size_t step = (count + nchunk - 1) / nchunk;
  for (std::size_t c = 0; c < nchunk; ++c) {
    const std::size_t lo = begin + c * step;
    const std::size_t hi = std::min(end, lo + step);
    if (lo >= hi) break;
    pool.emplace_back(fn, lo, hi);
  }
  for (auto& t : pool) t.join();
}

std::vector<std::pair<double, double>> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  std::vector<std::pair<double, double>> out(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-based initial guess, then Newton on P_n.
    double x = std::cos(constants::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    // Recompute derivative at the converged node for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    out[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
  }
  return out;
}

SphereRule make_sphere_rule(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1)
    throw std::invalid_argument("make_sphere_rule: orders must be >= 1");
  SphereRule rule;
  rule.n_theta = n_theta;
  rule.n_phi = n_phi;
  rule.points.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  const auto gl = gauss_legendre(n_phi);
  const double w_theta = 2.0 * constants::pi / n_theta;
  for (const auto& [t, wt] : gl) {
    const double rho = std::sqrt(std::max(0.0, 1.0 - t * t));
    for (int i = 0; i < n_theta; ++i) {
      const double th = w_theta * i;
      rule.points.push_back({rho * std::cos(th), rho * std::sin(th), t, wt * w_theta});
    }
  }
  return rule;
}

namespace {

// A fixed direction displaces every node by the same fractional grid offset,
// so the trilinear corner weights and linear index offsets are per-direction
// constants. Interior nodes gather through `off`; nodes near the boundary
// re-test each corner and skip out-of-range ones, which reproduces trilinear
// interpolation of the zero-extended field.
struct DirGather {
  std::ptrdiff_t off[8];
  double w[8];  // corner weight x quadrature weight
  int ix, iy, iz;
  double sx, sy, sz;
};

struct GatherPlan {
  std::vector<DirGather> dirs;
  // Node box whose every direction gather stays in range.
  int ilo = 0, ihi = 0, jlo = 0, jhi = 0, klo = 0, khi = 0;
};

GatherPlan make_gather_plan(const GridSpec& g, double R, const SphereRule& rule) {
  GatherPlan plan;
  plan.dirs.reserve(rule.points.size());
  plan.ihi = g.nx;
  plan.jhi = g.ny;
  plan.khi = g.nz;
  for (const auto& p : rule.points) {
    const double ox = R * p.sx / g.dx();
    const double oy = R * p.sy / g.dy();
    const double oz = R * p.sz / g.dz();
    DirGather d;
    d.ix = static_cast<int>(std::floor(ox));
    d.iy = static_cast<int>(std::floor(oy));
    d.iz = static_cast<int>(std::floor(oz));
    const double fx = ox - d.ix, fy = oy - d.iy, fz = oz - d.iz;
    d.sx = p.sx;
    d.sy = p.sy;
    d.sz = p.sz;
    int c = 0;
    for (int a = 0; a <= 1; ++a) {
      const double wa = a ? fx : 1.0 - fx;
      for (int b = 0; b <= 1; ++b) {
        const double wb = b ? fy : 1.0 - fy;
        for (int cc = 0; cc <= 1; ++cc) {
          const double wc = cc ? fz : 1.0 - fz;
          d.w[c] = p.w * wa * wb * wc;
          d.off[c] = (static_cast<std::ptrdiff_t>(d.ix + a) * g.ny + (d.iy + b)) * g.nz +
                     (d.iz + cc);
          ++c;
        }
      }
    }
    plan.ilo = std::max(plan.ilo, -d.ix);
    plan.ihi = std::min(plan.ihi, g.nx - 1 - d.ix);
    plan.jlo = std::max(plan.jlo, -d.iy);
    plan.jhi = std::min(plan.jhi, g.ny - 1 - d.iy);
    plan.klo = std::max(plan.klo, -d.iz);
    plan.khi = std::min(plan.khi, g.nz - 1 - d.iz);
    plan.dirs.push_back(d);
  }
  return plan;
}

// Adds the gathered shell sample of one direction to acc[klo, khi) for the
// row starting at fp. Eight fixed-offset streams keep the k loop contiguous.
inline void gather_row(const double* fp, const DirGather& d, int klo, int khi,
                       double* __restrict acc) {
  const double* __restrict p0 = fp + d.off[0];
  const double* __restrict p1 = fp + d.off[1];
  const double* __restrict p2 = fp + d.off[2];
  const double* __restrict p3 = fp + d.off[3];
  const double* __restrict p4 = fp + d.off[4];
  const double* __restrict p5 = fp + d.off[5];
  const double* __restrict p6 = fp + d.off[6];
  const double* __restrict p7 = fp + d.off[7];
  for (int k = klo; k < khi; ++k) {
    acc[k] += d.w[0] * p0[k] + d.w[1] * p1[k] + d.w[2] * p2[k] + d.w[3] * p3[k] +
              d.w[4] * p4[k] + d.w[5] * p5[k] + d.w[6] * p6[k] + d.w[7] * p7[k];
  }
}

inline double gather_edge(const ScalarField& f, const GridSpec& g, int i, int j, int k,
                          const DirGather& d) {
  double acc = 0.0;
  int c = 0;
  for (int a = 0; a <= 1; ++a) {
    const int ci = i + d.ix + a;
    for (int b = 0; b <= 1; ++b) {
      const int cj = j + d.iy + b;
      for (int cc = 0; cc <= 1; ++cc, ++c) {
        const int ck = k + d.iz + cc;
        if (ci < 0 || ci >= g.nx || cj < 0 || cj >= g.ny || ck < 0 || ck >= g.nz) continue;
        acc += d.w[c] * f(ci, cj, ck);
      }
    }
  }
  return acc;
}

// interior_row(row, klo, khi) covers the in-range span of one (i, j) row in
// one call so its k loop can run over the eight contiguous streams; edge
// handles the remaining nodes one at a time.
template <typename InteriorRow, typename Edge>
void sweep_nodes(const GridSpec& g, const GatherPlan& plan, int threads,
                 InteriorRow&& interior_row, Edge&& edge) {
  parallel_for(0, static_cast<std::size_t>(g.nx), threads, [&](std::size_t lo, std::size_t hi) {
    for (int i = static_cast<int>(lo); i < static_cast<int>(hi); ++i) {
      const bool i_in = i >= plan.ilo && i < plan.ihi;
      for (int j = 0; j < g.ny; ++j) {
        const bool ij_in = i_in && j >= plan.jlo && j < plan.jhi;
        const std::size_t row = (static_cast<std::size_t>(i) * g.ny + j) * g.nz;
        if (ij_in) {
          for (int k = 0; k < plan.klo; ++k) edge(i, j, k, row + k);
          if (plan.klo < plan.khi) interior_row(row, plan.klo, plan.khi);
          for (int k = plan.khi; k < g.nz; ++k) edge(i, j, k, row + k);
        } else {
          for (int k = 0; k < g.nz; ++k) edge(i, j, k, row + k);
        }
      }
    }
  });
}

}  // namespace

ScalarField shell_integral(const ScalarField& f, double R, const SphereRule& rule, int threads) {
  const GridSpec& g = f.grid();
  ScalarField out(g);
  const GatherPlan plan = make_gather_plan(g, R, rule);
  const double R2 = R * R;
  const double* fp = f.data();
  double* op = out.data();
  sweep_nodes(
      g, plan, threads,
      [&](std::size_t row, int klo, int khi) {
        thread_local std::vector<double> acc;
        acc.assign(g.nz, 0.0);
        for (const DirGather& d : plan.dirs) gather_row(fp + row, d, klo, khi, acc.data());
        for (int k = klo; k < khi; ++k) op[row + k] = R2 * acc[k];
      },
      [&](int i, int j, int k, std::size_t n) {
        double acc = 0.0;
        for (const DirGather& d : plan.dirs) acc += gather_edge(f, g, i, j, k, d);
        op[n] = R2 * acc;
      });
  return out;
}

void shell_scalar_and_vector(const ScalarField& f, double R, const SphereRule& rule,
                             ScalarField& scalar_out, VectorField& vector_out, int threads) {
  const GridSpec& g = f.grid();
  scalar_out = ScalarField(g);
  vector_out = VectorField(g);
  const GatherPlan plan = make_gather_plan(g, R, rule);
  const double R2 = R * R;
  const double* fp = f.data();
  double* sp = scalar_out.data();
  double* vxp = vector_out.x.data();
  double* vyp = vector_out.y.data();
  double* vzp = vector_out.z.data();
  sweep_nodes(
      g, plan, threads,
      [&](std::size_t row, int klo, int khi) {
        thread_local std::vector<double> buf;
        buf.assign(5 * static_cast<std::size_t>(g.nz), 0.0);
        double* s = buf.data();
        double* vx = s + g.nz;
        double* vy = vx + g.nz;
        double* vz = vy + g.nz;
        double* fv = vz + g.nz;
        for (const DirGather& d : plan.dirs) {
          std::fill(fv + klo, fv + khi, 0.0);
          gather_row(fp + row, d, klo, khi, fv);
          for (int k = klo; k < khi; ++k) {
            s[k] += fv[k];
            vx[k] += fv[k] * d.sx;
            vy[k] += fv[k] * d.sy;
            vz[k] += fv[k] * d.sz;
          }
        }
        for (int k = klo; k < khi; ++k) {
          sp[row + k] = R2 * s[k];
          vxp[row + k] = R2 * vx[k];
          vyp[row + k] = R2 * vy[k];
          vzp[row + k] = R2 * vz[k];
        }
      },
      [&](int i, int j, int k, std::size_t n) {
        double s = 0.0, vx = 0.0, vy = 0.0, vz = 0.0;
        for (const DirGather& d : plan.dirs) {
          const double fv = gather_edge(f, g, i, j, k, d);
          s += fv;
          vx += fv * d.sx;
          vy += fv * d.sy;
          vz += fv * d.sz;
        }
        sp[n] = R2 * s;
        vxp[n] = R2 * vx;
        vyp[n] = R2 * vy;
        vzp[n] = R2 * vz;
      });
}

ScalarField shell_dot_direction(const VectorField& F, double R, const SphereRule& rule,
                                double dir_sign, int threads) {
  const GridSpec& g = F.grid();
  ScalarField out(g);
  const GatherPlan plan = make_gather_plan(g, R, rule);
  const double R2 = R * R;
  const double* fx = F.x.data();
  const double* fy = F.y.data();
  const double* fz = F.z.data();
  double* op = out.data();
  sweep_nodes(
      g, plan, threads,
      [&](std::size_t row, int klo, int khi) {
        thread_local std::vector<double> buf;
        buf.assign(2 * static_cast<std::size_t>(g.nz), 0.0);
        double* acc = buf.data();
        double* fv = acc + g.nz;
        for (const DirGather& d : plan.dirs) {
          std::fill(fv + klo, fv + khi, 0.0);
          gather_row(fx + row, d, klo, khi, fv);
          for (int k = klo; k < khi; ++k) acc[k] += fv[k] * d.sx;
          std::fill(fv + klo, fv + khi, 0.0);
          gather_row(fy + row, d, klo, khi, fv);
          for (int k = klo; k < khi; ++k) acc[k] += fv[k] * d.sy;
          std::fill(fv + klo, fv + khi, 0.0);
          gather_row(fz + row, d, klo, khi, fv);
          for (int k = klo; k < khi; ++k) acc[k] += fv[k] * d.sz;
        }
        for (int k = klo; k < khi; ++k) op[row + k] = dir_sign * R2 * acc[k];
      },
      [&](int i, int j, int k, std::size_t n) {
        double acc = 0.0;
        for (const DirGather& d : plan.dirs) {
          acc += gather_edge(F.x, g, i, j, k, d) * d.sx + gather_edge(F.y, g, i, j, k, d) * d.sy +
                 gather_edge(F.z, g, i, j, k, d) * d.sz;
        }
        op[n] = dir_sign * R2 * acc;
      });
  return out;
}

}  // namespace pnpcdft

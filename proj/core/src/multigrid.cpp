#include "pnpcdft/multigrid.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <stdexcept>

namespace pnpcdft {

namespace {

struct AxisMap {
  bool halved = false;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Dense LU with partial pivoting for the coarsest level.
struct DenseLu {
  int n = 0;
  std::vector<double> a;  // row-major factors
  std::vector<int> piv;

  void factor(std::vector<double> matrix, int size) {
    n = size;
    a = std::move(matrix);
    piv.resize(n);
    for (int col = 0; col < n; ++col) {
      int p = col;
      double best = std::abs(a[static_cast<std::size_t>(col) * n + col]);
      for (int r = col + 1; r < n; ++r) {
        double v = std::abs(a[static_cast<std::size_t>(r) * n + col]);
        if (v > best) {
          best = v;
          p = r;
        }
      }
      if (!(best > 0.0)) throw std::runtime_error("coarse-level matrix is singular");
      piv[col] = p;
      if (p != col) {
        for (int c = 0; c < n; ++c) {
          std::swap(a[static_cast<std::size_t>(col) * n + c],
                    a[static_cast<std::size_t>(p) * n + c]);
        }
      }
      double d = a[static_cast<std::size_t>(col) * n + col];
      for (int r = col + 1; r < n; ++r) {
        double f = a[static_cast<std::size_t>(r) * n + col] / d;
        a[static_cast<std::size_t>(r) * n + col] = f;
        if (f == 0.0) continue;
        for (int c = col + 1; c < n; ++c) {
          a[static_cast<std::size_t>(r) * n + c] -= f * a[static_cast<std::size_t>(col) * n + c];
        }
      }
    }
  }

  void solve(std::vector<double>& x) const {
    for (int col = 0; col < n; ++col) {
      if (piv[col] != col) std::swap(x[col], x[piv[col]]);
    }
    for (int r = 1; r < n; ++r) {
      double s = x[r];
      for (int c = 0; c < r; ++c) s -= a[static_cast<std::size_t>(r) * n + c] * x[c];
      x[r] = s;
    }
    for (int r = n - 1; r >= 0; --r) {
      double s = x[r];
      for (int c = r + 1; c < n; ++c) s -= a[static_cast<std::size_t>(r) * n + c] * x[c];
      x[r] = s / a[static_cast<std::size_t>(r) * n + r];
    }
  }
};

// Level operators share this surface; the finest level wraps the 7-point
// assembly, coarse levels hold Galerkin triple products.
struct LevelOperator {
  virtual ~LevelOperator() = default;
  virtual void apply(const std::vector<double>& x, std::vector<double>& y) const = 0;
  virtual void jacobi(std::vector<double>& x, const std::vector<double>& b, double omega,
                      std::vector<double>& scratch) const = 0;
  virtual const std::vector<double>& diagonal() const = 0;
  // Visits every matrix entry of every non-Dirichlet row as
  // (i, j, k, di, dj, dk, value).
  virtual void for_each_entry(
      const std::function<void(int, int, int, int, int, int, double)>& fn) const = 0;

  void residual(const std::vector<double>& x, const std::vector<double>& b,
                std::vector<double>& r) const {
    apply(x, r);
    for (std::size_t n = 0; n < r.size(); ++n) r[n] = b[n] - r[n];
  }
};

struct FineOperator final : LevelOperator {
  StencilOperator op;

  FineOperator(const GridSpec& g, const ScalarField& kappa, int threads) : op(g, kappa, threads) {}

  void apply(const std::vector<double>& x, std::vector<double>& y) const override {
    op.apply(x, y);
  }
  void jacobi(std::vector<double>& x, const std::vector<double>& b, double omega,
              std::vector<double>& scratch) const override {
    op.jacobi(x, b, omega, scratch);
  }
  const std::vector<double>& diagonal() const override { return op.diagonal(); }

  void for_each_entry(
      const std::function<void(int, int, int, int, int, int, double)>& fn) const override {
    const GridSpec& g = op.grid();
    for (int i = 0; i < g.nx; ++i) {
      for (int j = 1; j + 1 < g.ny; ++j) {
        for (int k = 0; k < g.nz; ++k) {
          double diag = 0.0;
          auto couple = [&](int di, int dj, int dk, double c) {
            diag += c;
            fn(i, j, k, di, dj, dk, -c);
          };
          if (i > 0) couple(-1, 0, 0, op.face_x(i - 1, j, k));
          if (i + 1 < g.nx) couple(1, 0, 0, op.face_x(i, j, k));
          couple(0, -1, 0, op.face_y(i, j - 1, k));
          couple(0, 1, 0, op.face_y(i, j, k));
          if (k > 0) couple(0, 0, -1, op.face_z(i, j, k - 1));
          if (k + 1 < g.nz) couple(0, 0, 1, op.face_z(i, j, k));
          fn(i, j, k, 0, 0, 0, diag);
        }
      }
    }
  }
};

// 27-point operator with per-row entry storage, produced only by the Galerkin
// product below. Rows on the transport-axis boundary planes are identity.
struct CoarseOperator final : LevelOperator {
  GridSpec grid;
  std::vector<double> w;  // size() * 27, offset-major per row
  std::vector<double> diag;

  explicit CoarseOperator(const GridSpec& g)
      : grid(g), w(g.size() * 27, 0.0), diag(g.size(), 0.0) {}

  static int entry_index(int di, int dj, int dk) { return ((di + 1) * 3 + (dj + 1)) * 3 + (dk + 1); }

  double& at(std::size_t n, int di, int dj, int dk) { return w[n * 27 + entry_index(di, dj, dk)]; }

  bool is_dirichlet(int j) const { return j == 0 || j == grid.ny - 1; }

  void finalize() {
    for (int i = 0; i < grid.nx; ++i) {
      for (int j = 0; j < grid.ny; ++j) {
        for (int k = 0; k < grid.nz; ++k) {
          std::size_t n = grid.index(i, j, k);
          if (is_dirichlet(j)) {
            for (int e = 0; e < 27; ++e) w[n * 27 + e] = 0.0;
            w[n * 27 + entry_index(0, 0, 0)] = 1.0;
          }
          diag[n] = w[n * 27 + entry_index(0, 0, 0)];
        }
      }
    }
  }

  void apply(const std::vector<double>& x, std::vector<double>& y) const override {
    y.resize(x.size());
    for (int i = 0; i < grid.nx; ++i) {
      for (int j = 0; j < grid.ny; ++j) {
        for (int k = 0; k < grid.nz; ++k) {
          std::size_t n = grid.index(i, j, k);
          const double* row = &w[n * 27];
          double acc = 0.0;
          int e = 0;
          for (int di = -1; di <= 1; ++di) {
            int ii = i + di;
            bool iok = ii >= 0 && ii < grid.nx;
            for (int dj = -1; dj <= 1; ++dj) {
              int jj = j + dj;
              bool jok = iok && jj >= 0 && jj < grid.ny;
              for (int dk = -1; dk <= 1; ++dk, ++e) {
                double c = row[e];
                if (c == 0.0) continue;
                int kk = k + dk;
                if (!jok || kk < 0 || kk >= grid.nz) continue;
                acc += c * x[grid.index(ii, jj, kk)];
              }
            }
          }
          y[n] = acc;
        }
      }
    }
  }

  void jacobi(std::vector<double>& x, const std::vector<double>& b, double omega,
              std::vector<double>& scratch) const override {
    residual(x, b, scratch);
    for (std::size_t n = 0; n < x.size(); ++n) x[n] += omega * scratch[n] / diag[n];
  }

  const std::vector<double>& diagonal() const override { return diag; }

  void for_each_entry(
      const std::function<void(int, int, int, int, int, int, double)>& fn) const override {
    for (int i = 0; i < grid.nx; ++i) {
      for (int j = 1; j + 1 < grid.ny; ++j) {
        for (int k = 0; k < grid.nz; ++k) {
          std::size_t n = grid.index(i, j, k);
          int e = 0;
          for (int di = -1; di <= 1; ++di) {
            for (int dj = -1; dj <= 1; ++dj) {
              for (int dk = -1; dk <= 1; ++dk, ++e) {
                double c = w[n * 27 + e];
                if (c != 0.0) fn(i, j, k, di, dj, dk, c);
              }
            }
          }
        }
      }
    }
  }
};

// Coarse parents of one fine index along one axis under linear interpolation:
// matching node with weight 1 on even indices, the two bracketing nodes with
// weight 1/2 on odd ones.
struct Parents {
  int idx[2];
  double wgt[2];
  int cnt = 0;
};

Parents parents_of(int f, const AxisMap& m) {
  Parents p;
  if (!m.halved) {
    p.idx[0] = f;
    p.wgt[0] = 1.0;
    p.cnt = 1;
    return p;
  }
  if (f % 2 == 0) {
    p.idx[0] = f / 2;
    p.wgt[0] = 1.0;
    p.cnt = 1;
    return p;
  }
  p.idx[0] = (f - 1) / 2;
  p.wgt[0] = 0.5;
  p.idx[1] = (f + 1) / 2;
  p.wgt[1] = 0.5;
  p.cnt = 2;
  return p;
}

// Galerkin product P^T A P with trilinear P. Fine Dirichlet rows and columns
// never enter (interpolation skips those planes), coarse Dirichlet rows are
// forced back to identity, so the interior block stays symmetric and the
// stencil reach stays within one coarse cell per axis.
std::unique_ptr<CoarseOperator> galerkin_coarsen(const LevelOperator& fine, const GridSpec& fg,
                                                 const GridSpec& cg, const AxisMap& mx,
                                                 const AxisMap& my, const AxisMap& mz) {
  auto coarse = std::make_unique<CoarseOperator>(cg);
  fine.for_each_entry([&](int i, int j, int k, int di, int dj, int dk, double a) {
    int cj = j + dj;
    if (cj == 0 || cj == fg.ny - 1) return;  // column on a fine Dirichlet plane
    Parents ri = parents_of(i, mx), rj = parents_of(j, my), rk = parents_of(k, mz);
    Parents si = parents_of(i + di, mx), sj = parents_of(cj, my), sk = parents_of(k + dk, mz);
    for (int a1 = 0; a1 < ri.cnt; ++a1) {
      for (int b1 = 0; b1 < rj.cnt; ++b1) {
        for (int c1 = 0; c1 < rk.cnt; ++c1) {
          double wr = ri.wgt[a1] * rj.wgt[b1] * rk.wgt[c1];
          std::size_t row = cg.index(ri.idx[a1], rj.idx[b1], rk.idx[c1]);
          for (int a2 = 0; a2 < si.cnt; ++a2) {
            for (int b2 = 0; b2 < sj.cnt; ++b2) {
              for (int c2 = 0; c2 < sk.cnt; ++c2) {
                double wc = si.wgt[a2] * sj.wgt[b2] * sk.wgt[c2];
                int ddi = si.idx[a2] - ri.idx[a1];
                int ddj = sj.idx[b2] - rj.idx[b1];
                int ddk = sk.idx[c2] - rk.idx[c1];
                coarse->at(row, ddi, ddj, ddk) += wr * a * wc;
              }
            }
          }
        }
      }
    }
  });
  coarse->finalize();
  return coarse;
}

}  // namespace

struct MgSolver::Impl {
  MgSettings settings;

  struct Level {
    GridSpec grid;
    std::unique_ptr<LevelOperator> op;
    AxisMap mx, my, mz;  // mapping to this level from the next finer one
    mutable std::vector<double> x, b, scratch;
  };
  std::vector<Level> levels;
  DenseLu coarse_lu;

  // Fine -> coarse transfer is the exact transpose of prolong_add, keeping
  // the V-cycle symmetric so CG can use it safely: per halved axis the
  // weights are (1/2, 1, 1/2) around the matching fine node.
  void restrict_residual(int lf, const std::vector<double>& rf, std::vector<double>& rc) const {
    const Level& F = levels[lf];
    const Level& C = levels[lf + 1];
    rc.resize(C.grid.size());
    for (int I = 0; I < C.grid.nx; ++I) {
      int fi[3], ci = 0;
      double wi[3];
      if (C.mx.halved) {
        for (int d = -1; d <= 1; ++d) {
          int f = 2 * I + d;
          if (f < 0 || f >= F.grid.nx) continue;
          fi[ci] = f;
          wi[ci++] = d == 0 ? 1.0 : 0.5;
        }
      } else {
        fi[ci] = I;
        wi[ci++] = 1.0;
      }
      for (int J = 0; J < C.grid.ny; ++J) {
        bool dir = J == 0 || J == C.grid.ny - 1;
        int fj[3], cj = 0;
        double wj[3];
        if (C.my.halved) {
          for (int d = -1; d <= 1; ++d) {
            int f = 2 * J + d;
            if (f <= 0 || f >= F.grid.ny - 1) continue;  // fine Dirichlet planes excluded
            fj[cj] = f;
            wj[cj++] = d == 0 ? 1.0 : 0.5;
          }
        } else if (J > 0 && J < F.grid.ny - 1) {
          fj[cj] = J;
          wj[cj++] = 1.0;
        }
        for (int K = 0; K < C.grid.nz; ++K) {
          int fk[3], ck = 0;
          double wk[3];
          if (C.mz.halved) {
            for (int d = -1; d <= 1; ++d) {
              int f = 2 * K + d;
              if (f < 0 || f >= F.grid.nz) continue;
              fk[ck] = f;
              wk[ck++] = d == 0 ? 1.0 : 0.5;
            }
          } else {
            fk[ck] = K;
            wk[ck++] = 1.0;
          }
          double acc = 0.0;
          for (int a = 0; a < ci; ++a) {
            for (int b = 0; b < cj; ++b) {
              for (int c = 0; c < ck; ++c) {
                acc += wi[a] * wj[b] * wk[c] * rf[F.grid.index(fi[a], fj[b], fk[c])];
              }
            }
          }
          rc[C.grid.index(I, J, K)] = dir ? 0.0 : acc;
        }
      }
    }
  }

  // Trilinear interpolation of the coarse correction added into the fine
  // vector; fine Dirichlet rows stay untouched.
  void prolong_add(int lf, const std::vector<double>& ec, std::vector<double>& xf) const {
    const Level& F = levels[lf];
    const Level& C = levels[lf + 1];
    for (int i = 0; i < F.grid.nx; ++i) {
      int ci0 = C.mx.halved ? i / 2 : i;
      bool ihalf = C.mx.halved && (i % 2 == 1);
      for (int j = 0; j < F.grid.ny; ++j) {
        if (j == 0 || j == F.grid.ny - 1) continue;
        int cj0 = C.my.halved ? j / 2 : j;
        bool jhalf = C.my.halved && (j % 2 == 1);
        for (int k = 0; k < F.grid.nz; ++k) {
          int ck0 = C.mz.halved ? k / 2 : k;
          bool khalf = C.mz.halved && (k % 2 == 1);
          double acc = 0.0;
          for (int a = 0; a <= (ihalf ? 1 : 0); ++a) {
            double wa = ihalf ? 0.5 : 1.0;
            for (int b = 0; b <= (jhalf ? 1 : 0); ++b) {
              double wb = jhalf ? 0.5 : 1.0;
              for (int c = 0; c <= (khalf ? 1 : 0); ++c) {
                double wc = khalf ? 0.5 : 1.0;
                acc += wa * wb * wc * ec[C.grid.index(ci0 + a, cj0 + b, ck0 + c)];
              }
            }
          }
          xf[F.grid.index(i, j, k)] += acc;
        }
      }
    }
  }

  void vcycle(std::size_t l) const {
    const Level& L = levels[l];
    if (l + 1 == levels.size()) {
      L.x = L.b;
      coarse_lu.solve(L.x);
      return;
    }
    for (int s = 0; s < settings.nu_pre; ++s) {
      L.op->jacobi(L.x, L.b, settings.jacobi_weight, L.scratch);
    }
    L.op->residual(L.x, L.b, L.scratch);
    restrict_residual(static_cast<int>(l), L.scratch, levels[l + 1].b);
    levels[l + 1].x.assign(levels[l + 1].grid.size(), 0.0);
    vcycle(l + 1);
    prolong_add(static_cast<int>(l), levels[l + 1].x, L.x);
    for (int s = 0; s < settings.nu_post; ++s) {
      L.op->jacobi(L.x, L.b, settings.jacobi_weight, L.scratch);
    }
  }
};

MgSolver::~MgSolver() = default;
MgSolver::MgSolver(MgSolver&&) noexcept = default;
MgSolver& MgSolver::operator=(MgSolver&&) noexcept = default;

MgSolver::MgSolver(const GridSpec& grid, const ScalarField& kappa, MgSettings settings)
    : impl_(std::make_unique<Impl>()) {
  impl_->settings = settings;

  Impl::Level finest;
  finest.grid = grid;
  finest.op = std::make_unique<FineOperator>(grid, kappa, settings.threads);
  impl_->levels.push_back(std::move(finest));

  while (true) {
    const Impl::Level& prev = impl_->levels.back();
    if (static_cast<int>(prev.grid.size()) <= settings.coarsest_max_nodes) break;
    AxisMap mx{(prev.grid.nx - 1) % 2 == 0 && prev.grid.nx >= 3};
    AxisMap my{(prev.grid.ny - 1) % 2 == 0 && prev.grid.ny >= 3};
    AxisMap mz{(prev.grid.nz - 1) % 2 == 0 && prev.grid.nz >= 3};
    if (!mx.halved && !my.halved && !mz.halved) break;
    GridSpec cg(mx.halved ? (prev.grid.nx - 1) / 2 + 1 : prev.grid.nx,
                my.halved ? (prev.grid.ny - 1) / 2 + 1 : prev.grid.ny,
                mz.halved ? (prev.grid.nz - 1) / 2 + 1 : prev.grid.nz, prev.grid.lx, prev.grid.ly,
                prev.grid.lz);
    Impl::Level next;
    next.grid = cg;
    next.op = galerkin_coarsen(*prev.op, prev.grid, cg, mx, my, mz);
    next.mx = mx;
    next.my = my;
    next.mz = mz;
    impl_->levels.push_back(std::move(next));
  }

  for (auto& L : impl_->levels) {
    L.x.assign(L.grid.size(), 0.0);
    L.b.assign(L.grid.size(), 0.0);
    L.scratch.assign(L.grid.size(), 0.0);
  }

  // Dense factorization of the coarsest operator, assembled column by column.
  const Impl::Level& C = impl_->levels.back();
  int n = static_cast<int>(C.grid.size());
  std::vector<double> mat(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> e(n, 0.0), col(n, 0.0);
  for (int c = 0; c < n; ++c) {
    e[c] = 1.0;
    C.op->apply(e, col);
    e[c] = 0.0;
    for (int r = 0; r < n; ++r) mat[static_cast<std::size_t>(r) * n + c] = col[r];
  }
  impl_->coarse_lu.factor(std::move(mat), n);
}

const StencilOperator& MgSolver::finest() const {
  return static_cast<const FineOperator&>(*impl_->levels.front().op).op;
}

int MgSolver::level_count() const { return static_cast<int>(impl_->levels.size()); }

SolveStats MgSolver::solve(std::vector<double>& x, const std::vector<double>& b) const {
  const Impl& im = *impl_;
  const Impl::Level& L = im.levels.front();
  const GridSpec& g = L.grid;
  if (x.size() != g.size() || b.size() != g.size()) {
    throw std::invalid_argument("solve: wrong vector length");
  }

  // Pin Dirichlet rows so the Krylov iteration lives in the interior space.
  for (int i = 0; i < g.nx; ++i) {
    for (int k = 0; k < g.nz; ++k) {
      x[g.index(i, 0, k)] = b[g.index(i, 0, k)];
      x[g.index(i, g.ny - 1, k)] = b[g.index(i, g.ny - 1, k)];
    }
  }

  std::vector<double> r(x.size()), z, p(x.size(), 0.0), q(x.size());
  L.op->residual(x, b, r);
  double bnorm = norm2(b);
  if (bnorm == 0.0) bnorm = 1.0;

  SolveStats stats;
  stats.relative_residual = norm2(r) / bnorm;
  if (stats.relative_residual <= im.settings.tolerance) {
    stats.converged = true;
    return stats;
  }

  const bool trace = std::getenv("PNPCDFT_MG_TRACE") != nullptr;
  if (trace) {
    double dmin = 1e300, dmax = 0.0, xmax = 0.0, bmax = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      xmax = std::max(xmax, std::abs(x[n]));
      bmax = std::max(bmax, std::abs(b[n]));
    }
    for (double v : L.op->diagonal()) {
      if (v != 1.0) {
        dmin = std::min(dmin, std::abs(v));
        dmax = std::max(dmax, std::abs(v));
      }
    }
    std::fprintf(stderr, "[mg] n=%zu bnorm=%.3e bmax=%.3e xmax=%.3e diag=[%.3e,%.3e]\n", x.size(),
                 bnorm, bmax, xmax, dmin, dmax);
  }

  // The recurrence residual drifts from b - A x over long runs; resync to the
  // true residual periodically and report convergence only against it. Both
  // safeguards stay off when verify_true_residual is off, because then the
  // recurrence residual is the accepted convergence measure.
  double rz_old = 0.0;
  bool restart = false;
  for (int it = 0; it < im.settings.max_cycles; ++it) {
    if (restart || (it > 0 && it % 50 == 0 && im.settings.verify_true_residual)) {
      L.op->residual(x, b, r);
      rz_old = 0.0;
      restart = false;
    }

    L.b = r;
    L.x.assign(L.x.size(), 0.0);
    im.vcycle(0);
    z = L.x;
    ++stats.cycles;

    double rz = dot(r, z);
    if (!std::isfinite(rz)) break;
    if (rz <= 0.0) {
      if (rz_old == 0.0) break;
      restart = true;
      continue;
    }
    if (rz_old == 0.0) {
      p = z;
    } else {
      double beta = rz / rz_old;
      for (std::size_t n = 0; n < p.size(); ++n) p[n] = z[n] + beta * p[n];
    }
    rz_old = rz;

    L.op->apply(p, q);
    double pq = dot(p, q);
    if (!std::isfinite(pq) || pq <= 0.0) break;
    double alpha = rz / pq;
    for (std::size_t n = 0; n < x.size(); ++n) x[n] += alpha * p[n];
    for (std::size_t n = 0; n < r.size(); ++n) r[n] -= alpha * q[n];

    stats.relative_residual = norm2(r) / bnorm;
    if (trace && (it % 20 == 0 || it + 1 == im.settings.max_cycles)) {
      std::vector<double> tr(x.size());
      L.op->residual(x, b, tr);
      std::fprintf(stderr, "[mg] it=%d rec=%.3e true=%.3e\n", it, stats.relative_residual,
                   norm2(tr) / bnorm);
    }
    if (stats.relative_residual <= im.settings.tolerance) {
      if (!im.settings.verify_true_residual) {
        stats.converged = true;
        return stats;
      }
      L.op->residual(x, b, r);
      stats.relative_residual = norm2(r) / bnorm;
      if (stats.relative_residual <= im.settings.tolerance) {
        stats.converged = true;
        return stats;
      }
      rz_old = 0.0;
    }
  }
  return stats;
}

}  // namespace pnpcdft

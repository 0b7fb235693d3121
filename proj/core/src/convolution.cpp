#include "pnpcdft/convolution.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace pnpcdft {

int next_fast_fft_size(int n) {
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

namespace {

// FFTW plan creation is not thread safe; execution through the new-array
// interface is. All creation goes through this mutex.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(double* p) const { fftw_free(p); }
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

// Scratch shared between all plans with the same padded dimensions: two
// transform buffers plus the forward/backward FFTW plans. Spectra stay per
// kernel; this is what keeps many simultaneous kernels affordable.
struct Workspace {
  int px, py, pz;
  std::size_t real_count, cplx_count;
  std::unique_ptr<double[], FftwDeleter> real;
  std::unique_ptr<fftw_complex[], FftwDeleter> cplx;
  fftw_plan fwd = nullptr, bwd = nullptr;

  Workspace(int px_, int py_, int pz_) : px(px_), py(py_), pz(pz_) {
    real_count = static_cast<std::size_t>(px) * py * pz;
    cplx_count = static_cast<std::size_t>(px) * py * (pz / 2 + 1);
    real.reset(static_cast<double*>(fftw_malloc(sizeof(double) * real_count)));
    cplx.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * cplx_count)));
    if (!real || !cplx) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(fftw_mutex());
    // FFTW_ESTIMATE keeps planning deterministic and leaves the buffers intact.
    fwd = fftw_plan_dft_r2c_3d(px, py, pz, real.get(), cplx.get(), FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_3d(px, py, pz, cplx.get(), real.get(), FFTW_ESTIMATE);
    if (!fwd || !bwd) throw std::runtime_error("fftw plan creation failed");
  }
  ~Workspace() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

std::shared_ptr<Workspace> shared_workspace(int px, int py, int pz) {
  static std::mutex reg_mutex;
  static std::map<std::array<int, 3>, std::weak_ptr<Workspace>> registry;
  std::lock_guard<std::mutex> lock(reg_mutex);
  auto& slot = registry[{px, py, pz}];
  if (auto ws = slot.lock()) return ws;
  auto ws = std::make_shared<Workspace>(px, py, pz);
  slot = ws;
  return ws;
}

}  // namespace

struct ConvolutionPlan::Impl {
  GridSpec grid;
  std::shared_ptr<Workspace> ws;
  // One spectrum per kernel component. Even kernels have purely real spectra,
  // odd (vector) kernels purely imaginary; we store the nonzero part.
  std::vector<std::vector<double>> spectra;
  bool odd = false;

  void forward_field(const ScalarField& f) const {
    const GridSpec& g = grid;
    double* in = ws->real.get();
    std::memset(in, 0, sizeof(double) * ws->real_count);
    for (int i = 0; i < g.nx; ++i) {
      const double wi = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
      for (int j = 0; j < g.ny; ++j) {
        const double wij = wi * ((j == 0 || j == g.ny - 1) ? 0.5 : 1.0);
        const double* src = f.data() + g.index(i, j, 0);
        double* dst = in + (static_cast<std::size_t>(i) * ws->py + j) * ws->pz;
        for (int k = 0; k < g.nz; ++k) {
          const double w = wij * ((k == 0 || k == g.nz - 1) ? 0.5 : 1.0);
          dst[k] = w * src[k];
        }
      }
    }
    fftw_execute(ws->fwd);
  }

  ScalarField backward_component(std::size_t comp) const {
    const std::vector<double>& spec = spectra[comp];
    fftw_complex* c = ws->cplx.get();
    const double inv = 1.0 / static_cast<double>(ws->real_count);
    if (!odd) {
      for (std::size_t m = 0; m < ws->cplx_count; ++m) {
        const double s = spec[m] * inv;
        c[m][0] *= s;
        c[m][1] *= s;
      }
    } else {
      // spectrum is i*spec: (a+ib)(i s) = -b s + i a s
      for (std::size_t m = 0; m < ws->cplx_count; ++m) {
        const double s = spec[m] * inv;
        const double re = c[m][0], im = c[m][1];
        c[m][0] = -im * s;
        c[m][1] = re * s;
      }
    }
    fftw_execute(ws->bwd);
    ScalarField out(grid);
    const double* res = ws->real.get();
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ny; ++j) {
        const double* src = res + (static_cast<std::size_t>(i) * ws->py + j) * ws->pz;
        double* dst = out.data() + grid.index(i, j, 0);
        for (int k = 0; k < grid.nz; ++k) dst[k] = src[k];
      }
    return out;
  }
};

ConvolutionPlan::ConvolutionPlan() = default;
ConvolutionPlan::~ConvolutionPlan() = default;
ConvolutionPlan::ConvolutionPlan(ConvolutionPlan&&) noexcept = default;
ConvolutionPlan& ConvolutionPlan::operator=(ConvolutionPlan&&) noexcept = default;

bool ConvolutionPlan::is_vector() const { return impl_ && impl_->odd; }
const GridSpec& ConvolutionPlan::grid() const { return impl_->grid; }

ScalarField ConvolutionPlan::apply(const ScalarField& f) const {
  if (!impl_) throw std::logic_error("apply on empty plan");
  if (impl_->odd) throw std::logic_error("apply: plan holds a vector kernel");
  if (!f.grid().same_shape(impl_->grid)) throw std::invalid_argument("apply: grid mismatch");
  impl_->forward_field(f);
  return impl_->backward_component(0);
}

VectorField ConvolutionPlan::apply_vector_weight(const ScalarField& f) const {
  if (!impl_) throw std::logic_error("apply_vector_weight on empty plan");
  if (!impl_->odd) throw std::logic_error("apply_vector_weight: plan holds a scalar kernel");
  if (!f.grid().same_shape(impl_->grid))
    throw std::invalid_argument("apply_vector_weight: grid mismatch");
  VectorField out(impl_->grid);
  // The forward transform of f is destroyed by each backward pass, so redo it
  // per component; spectra are cheap to multiply compared to the transforms.
  impl_->forward_field(f);
  out.x = impl_->backward_component(0);
  impl_->forward_field(f);
  out.y = impl_->backward_component(1);
  impl_->forward_field(f);
  out.z = impl_->backward_component(2);
  return out;
}

namespace {

// Samples kernel values (times cell volume) on the wrapped padded lattice and
// transforms them. Returns the real part for even kernels, imaginary for odd.
std::vector<double> kernel_spectrum(const GridSpec& g, Workspace& ws,
                                    const std::function<double(double, double, double)>& k,
                                    double sign, bool odd) {
  double* in = ws.real.get();
  std::memset(in, 0, sizeof(double) * ws.real_count);
  const double dv = g.cell_volume();
  for (int a = 0; a < ws.px; ++a) {
    const int oi = (a <= ws.px / 2) ? a : a - ws.px;
    if (std::abs(oi) > g.nx - 1) continue;
    for (int b = 0; b < ws.py; ++b) {
      const int oj = (b <= ws.py / 2) ? b : b - ws.py;
      if (std::abs(oj) > g.ny - 1) continue;
      for (int c = 0; c < ws.pz; ++c) {
        const int ok = (c <= ws.pz / 2) ? c : c - ws.pz;
        if (std::abs(ok) > g.nz - 1) continue;
        const double sx = sign * oi * g.dx();
        const double sy = sign * oj * g.dy();
        const double sz = sign * ok * g.dz();
        in[(static_cast<std::size_t>(a) * ws.py + b) * ws.pz + c] = dv * k(sx, sy, sz);
      }
    }
  }
  fftw_execute(ws.fwd);
  std::vector<double> spec(ws.cplx_count);
  const fftw_complex* cx = ws.cplx.get();
  if (!odd)
    for (std::size_t m = 0; m < ws.cplx_count; ++m) spec[m] = cx[m][0];
  else
    for (std::size_t m = 0; m < ws.cplx_count; ++m) spec[m] = cx[m][1];
  return spec;
}

}  // namespace

ConvolutionPlan plan_kernel(const GridSpec& grid, const KernelFn& kernel,
                            Orientation orientation) {
  ConvolutionPlan plan;
  auto impl = std::make_unique<ConvolutionPlan::Impl>();
  impl->grid = grid;
  impl->ws = shared_workspace(next_fast_fft_size(2 * grid.nx - 1),
                              next_fast_fft_size(2 * grid.ny - 1),
                              next_fast_fft_size(2 * grid.nz - 1));
  const double sign = (orientation == Orientation::density) ? -1.0 : 1.0;
  impl->odd = false;
  impl->spectra.push_back(kernel_spectrum(grid, *impl->ws, kernel, sign, false));
  plan.impl_ = std::move(impl);
  return plan;
}

ConvolutionPlan plan_vector_kernel(const GridSpec& grid, const VectorKernelFn& kernel,
                                   Orientation orientation) {
  ConvolutionPlan plan;
  auto impl = std::make_unique<ConvolutionPlan::Impl>();
  impl->grid = grid;
  impl->ws = shared_workspace(next_fast_fft_size(2 * grid.nx - 1),
                              next_fast_fft_size(2 * grid.ny - 1),
                              next_fast_fft_size(2 * grid.nz - 1));
  const double sign = (orientation == Orientation::density) ? -1.0 : 1.0;
  impl->odd = true;
  for (int comp = 0; comp < 3; ++comp) {
    auto component = [&kernel, comp](double sx, double sy, double sz) {
      return kernel(sx, sy, sz)[comp];
    };
    impl->spectra.push_back(kernel_spectrum(grid, *impl->ws, component, sign, true));
  }
  plan.impl_ = std::move(impl);
  return plan;
}

}  // namespace pnpcdft

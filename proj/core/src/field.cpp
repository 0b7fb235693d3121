#include "pnpcdft/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pnpcdft {

ScalarField::ScalarField(const GridSpec& grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

void ScalarField::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

double ScalarField::sample(double x, double y, double z) const {
  const double fx = x / grid_.dx();
  const double fy = y / grid_.dy();
  const double fz = z / grid_.dz();
  // Small tolerance so points nominally on the boundary are kept.
  const double eps = 1e-12;
  if (fx < -eps || fy < -eps || fz < -eps) return 0.0;
  if (fx > grid_.nx - 1 + eps || fy > grid_.ny - 1 + eps || fz > grid_.nz - 1 + eps) return 0.0;

  int i0 = static_cast<int>(fx);
  int j0 = static_cast<int>(fy);
  int k0 = static_cast<int>(fz);
  i0 = std::clamp(i0, 0, grid_.nx - 2);
  j0 = std::clamp(j0, 0, grid_.ny - 2);
  k0 = std::clamp(k0, 0, grid_.nz - 2);
  const double tx = std::clamp(fx - i0, 0.0, 1.0);
  const double ty = std::clamp(fy - j0, 0.0, 1.0);
  const double tz = std::clamp(fz - k0, 0.0, 1.0);

  const auto v = [&](int di, int dj, int dk) {
    return values_[grid_.index(i0 + di, j0 + dj, k0 + dk)];
  };
  const double c00 = v(0, 0, 0) * (1 - tz) + v(0, 0, 1) * tz;
  const double c01 = v(0, 1, 0) * (1 - tz) + v(0, 1, 1) * tz;
  const double c10 = v(1, 0, 0) * (1 - tz) + v(1, 0, 1) * tz;
  const double c11 = v(1, 1, 0) * (1 - tz) + v(1, 1, 1) * tz;
  const double c0 = c00 * (1 - ty) + c01 * ty;
  const double c1 = c10 * (1 - ty) + c11 * ty;
  return c0 * (1 - tx) + c1 * tx;
}

double ScalarField::integrate() const {
  const double dv = grid_.cell_volume();
  double sum = 0.0;
  for (int i = 0; i < grid_.nx; ++i) {
    const double wi = (i == 0 || i == grid_.nx - 1) ? 0.5 : 1.0;
    for (int j = 0; j < grid_.ny; ++j) {
      const double wij = wi * ((j == 0 || j == grid_.ny - 1) ? 0.5 : 1.0);
      const double* row = values_.data() + grid_.index(i, j, 0);
      double rowsum = 0.5 * (row[0] + row[grid_.nz - 1]);
      for (int k = 1; k < grid_.nz - 1; ++k) rowsum += row[k];
      sum += wij * rowsum;
    }
  }
  return sum * dv;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool ScalarField::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::ptrdiff_t ScalarField::first_non_finite() const {
  for (std::size_t n = 0; n < values_.size(); ++n)
    if (!std::isfinite(values_[n])) return static_cast<std::ptrdiff_t>(n);
  return -1;
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  if (!a.grid().same_shape(b.grid()))
    throw std::invalid_argument("max_abs_diff: grid shapes differ");
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
  return m;
}

void relax_into(ScalarField& a, const ScalarField& b, double lambda) {
  if (!a.grid().same_shape(b.grid()))
    throw std::invalid_argument("relax_into: grid shapes differ");
  for (std::size_t n = 0; n < a.size(); ++n) a[n] += lambda * (b[n] - a[n]);
}

ScalarField resample(const ScalarField& src, const GridSpec& dst) {
  const GridSpec& sg = src.grid();
  if (std::abs(sg.lx - dst.lx) > 1e-12 || std::abs(sg.ly - dst.ly) > 1e-12 ||
      std::abs(sg.lz - dst.lz) > 1e-12) {
    throw std::invalid_argument("resample: grids span different boxes");
  }
  ScalarField out(dst);
  for (int i = 0; i < dst.nx; ++i)
    for (int j = 0; j < dst.ny; ++j)
      for (int k = 0; k < dst.nz; ++k) out(i, j, k) = src.sample(dst.x(i), dst.y(j), dst.z(k));
  return out;
}

// Field dump format (also used for checkpoints):
//   pnpcdft-field 1
//   nx ny nz
//   lx ly lz
//   one node value per line, %.17g, k-fastest order
void ScalarField::dump(std::ostream& os) const {
  os << "pnpcdft-field 1\n";
  os << grid_.nx << ' ' << grid_.ny << ' ' << grid_.nz << '\n';
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", grid_.lx, grid_.ly, grid_.lz);
  os << buf;
  for (double v : values_) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    os << buf;
  }
}

ScalarField ScalarField::load(std::istream& is) {
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "pnpcdft-field" || version != 1)
    throw std::runtime_error("field load: not a pnpcdft-field v1 stream");
  int nx, ny, nz;
  double lx, ly, lz;
  if (!(is >> nx >> ny >> nz >> lx >> ly >> lz))
    throw std::runtime_error("field load: bad header");
  ScalarField f(GridSpec(nx, ny, nz, lx, ly, lz));
  for (std::size_t n = 0; n < f.size(); ++n)
    if (!(is >> f[n])) throw std::runtime_error("field load: truncated value block");
  return f;
}

void ScalarField::dump_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  dump(os);
  if (!os) throw std::runtime_error("write failed: " + path);
}

ScalarField ScalarField::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  return load(is);
}

}  // namespace pnpcdft

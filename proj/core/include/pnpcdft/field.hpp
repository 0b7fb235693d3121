#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "pnpcdft/grid.hpp"

namespace pnpcdft {

// Scalar field on a GridSpec, stored k-fastest.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const GridSpec& grid, double fill = 0.0);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j, int k) { return values_[grid_.index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return values_[grid_.index(i, j, k)]; }
  double& operator[](std::size_t n) { return values_[n]; }
  double operator[](std::size_t n) const { return values_[n]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  void fill(double v);

  // Trilinear interpolation at an arbitrary point [nm]; points outside the
  // box contribute zero (the integrals this feeds extend over the box only).
  double sample(double x, double y, double z) const;

  // Trapezoid-rule volume integral; exact for multilinear integrands.
  double integrate() const;

  double max_abs() const;
  bool all_finite() const;
  // Flat index of the first NaN or infinity, -1 when the field is finite.
  std::ptrdiff_t first_non_finite() const;

  void dump(std::ostream& os) const;
  static ScalarField load(std::istream& is);
  void dump_file(const std::string& path) const;
  static ScalarField load_file(const std::string& path);

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

double max_abs_diff(const ScalarField& a, const ScalarField& b);

// a <- lambda*b + (1-lambda)*a, the under-relaxation used by the outer loop.
void relax_into(ScalarField& a, const ScalarField& b, double lambda);

// Trilinear resample of src onto dst's nodes. Both grids must span the same
// physical box; dst boundary nodes land exactly on src boundary nodes.
ScalarField resample(const ScalarField& src, const GridSpec& dst);

struct VectorField {
  ScalarField x, y, z;

  VectorField() = default;
  explicit VectorField(const GridSpec& grid) : x(grid), y(grid), z(grid) {}
  const GridSpec& grid() const { return x.grid(); }
};

}  // namespace pnpcdft

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pnpcdft {

// Node-centered tensor grid over the box [0,lx] x [0,ly] x [0,lz].
// Nodes sit on the boundary faces; spacing is l/(n-1) per axis.
// Linear index order is k-fastest: idx = (i*ny + j)*nz + k, matching the
// memory layout expected by the FFT padding code and the field dump format.
struct GridSpec {
  int nx = 0, ny = 0, nz = 0;
  double lx = 0.0, ly = 0.0, lz = 0.0;

  GridSpec() = default;
  GridSpec(int nx_, int ny_, int nz_, double lx_, double ly_, double lz_);

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny * nz; }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * ny + j) * nz + k;
  }

  double dx() const { return lx / (nx - 1); }
  double dy() const { return ly / (ny - 1); }
  double dz() const { return lz / (nz - 1); }
  double cell_volume() const { return dx() * dy() * dz(); }

  double x(int i) const { return i * dx(); }
  double y(int j) const { return j * dy(); }
  double z(int k) const { return k * dz(); }

  // Trapezoid weight: 1/2 per axis on which the node lies on a boundary face.
  double trapezoid_weight(int i, int j, int k) const {
    double w = 1.0;
    if (i == 0 || i == nx - 1) w *= 0.5;
    if (j == 0 || j == ny - 1) w *= 0.5;
    if (k == 0 || k == nz - 1) w *= 0.5;
    return w;
  }

  bool same_shape(const GridSpec& o) const {
    return nx == o.nx && ny == o.ny && nz == o.nz && lx == o.lx && ly == o.ly && lz == o.lz;
  }
};

}  // namespace pnpcdft

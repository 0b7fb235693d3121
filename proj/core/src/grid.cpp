#include "pnpcdft/grid.hpp"

namespace pnpcdft {

GridSpec::GridSpec(int nx_, int ny_, int nz_, double lx_, double ly_, double lz_)
    : nx(nx_), ny(ny_), nz(nz_), lx(lx_), ly(ly_), lz(lz_) {
  if (nx < 2 || ny < 2 || nz < 2)
    throw std::invalid_argument("GridSpec: need at least 2 nodes per axis, got " +
                                std::to_string(nx) + "x" + std::to_string(ny) + "x" +
                                std::to_string(nz));
  if (!(lx > 0.0) || !(ly > 0.0) || !(lz > 0.0))
    throw std::invalid_argument("GridSpec: box extents must be positive");
}

}  // namespace pnpcdft

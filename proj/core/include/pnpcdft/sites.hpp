#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pnpcdft/field.hpp"
#include "pnpcdft/grid.hpp"

namespace pnpcdft {

// One stationary site: the label selects which stationary species density the
// site contributes to. Coordinates in nm.
struct Site {
  std::string label;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Text format: one site per line, "label x y z", '#' starts a comment.
std::vector<Site> read_sites(std::istream& in);
std::vector<Site> load_site_file(const std::string& path);
void write_sites(std::ostream& out, const std::vector<Site>& sites);
void save_site_file(const std::string& path, const std::vector<Site>& sites);

// Sum of unit-mass Gaussians exp(-|r-R|^2 / (2 sigma^2)) placed at the given
// positions, normalized in free space. Mass falling outside the box is lost;
// sigma is expected to be small against the box. Evaluation is windowed to
// 6 sigma around each site.
ScalarField gaussian_site_density(const GridSpec& grid, const std::vector<Site>& sites,
                                  const std::string& label, double sigma_nm, int threads = 1);

// Replicates fractional positions of one unit cell over a block of cells.
// Fractions are triplets (fx, fy, fz) paired with labels.
struct MotifEntry {
  std::string label;
  double fx = 0.0;
  double fy = 0.0;
  double fz = 0.0;
};

std::vector<Site> tile_motif(const std::vector<MotifEntry>& motif, double a_nm, double b_nm,
                             double c_nm, int cells_x, int cells_y, int cells_z);

}  // namespace pnpcdft

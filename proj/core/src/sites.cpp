#include "pnpcdft/sites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pnpcdft/constants.hpp"
#include "pnpcdft/parallel.hpp"

namespace pnpcdft {

std::vector<Site> read_sites(std::istream& in) {
  std::vector<Site> sites;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Site s;
    if (!(ls >> s.label)) continue;  // blank line
    if (!(ls >> s.x >> s.y >> s.z)) {
      throw std::runtime_error("site file line " + std::to_string(lineno) +
                               ": expected 'label x y z'");
    }
    std::string extra;
    if (ls >> extra) {
      throw std::runtime_error("site file line " + std::to_string(lineno) +
                               ": trailing fields after coordinates");
    }
    sites.push_back(std::move(s));
  }
  return sites;
}

std::vector<Site> load_site_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open site file: " + path);
  return read_sites(in);
}

void write_sites(std::ostream& out, const std::vector<Site>& sites) {
  char buf[128];
  for (const Site& s : sites) {
    std::snprintf(buf, sizeof(buf), "%s %.17g %.17g %.17g\n", s.label.c_str(), s.x, s.y, s.z);
    out << buf;
  }
}

void save_site_file(const std::string& path, const std::vector<Site>& sites) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write site file: " + path);
  write_sites(out, sites);
}

namespace {

// Trapezoid-measure mass of a sampled 1D Gaussian on the unbounded lattice
// {m*h}. Dividing by this instead of sigma*sqrt(2*pi) keeps each deposited
// site at unit discrete mass even when h is comparable to sigma.
double lattice_gaussian_sum(double center, double h, double window, double inv2s2) {
  long lo = static_cast<long>(std::ceil((center - window) / h));
  long hi = static_cast<long>(std::floor((center + window) / h));
  double sum = 0.0;
  for (long m = lo; m <= hi; ++m) {
    double d = static_cast<double>(m) * h - center;
    sum += std::exp(-d * d * inv2s2);
  }
  return h * sum;
}

}  // namespace

ScalarField gaussian_site_density(const GridSpec& grid, const std::vector<Site>& sites,
                                  const std::string& label, double sigma_nm, int threads) {
  if (!(sigma_nm > 0.0)) throw std::invalid_argument("site gaussian sigma must be positive");
  ScalarField rho(grid);
  double inv2s2 = 1.0 / (2.0 * sigma_nm * sigma_nm);
  double window = 6.0 * sigma_nm;

  std::vector<const Site*> picked;
  std::vector<double> site_norm;
  for (const Site& s : sites) {
    if (s.label != label) continue;
    double sx = lattice_gaussian_sum(s.x, grid.dx(), window, inv2s2);
    double sy = lattice_gaussian_sum(s.y, grid.dy(), window, inv2s2);
    double sz = lattice_gaussian_sum(s.z, grid.dz(), window, inv2s2);
    if (!(sx > 0.0) || !(sy > 0.0) || !(sz > 0.0)) {
      throw std::invalid_argument("grid spacing exceeds the site gaussian window; site '" +
                                  s.label + "' cannot be resolved");
    }
    picked.push_back(&s);
    site_norm.push_back(1.0 / (sx * sy * sz));
  }

  // Each site touches only a small index window, so the outer parallel loop
  // runs over sites grouped by disjoint x-slabs to keep writes race-free.
  // With the window sizes used here, a simple serial accumulation per thread
  // chunk over nodes is cheaper and deterministic: iterate nodes, sum sites
  // whose window covers the node. Site counts are a few thousand at most, so
  // prefilter per x-slab.
  parallel_for(0, static_cast<std::size_t>(grid.nx), threads, [&](std::size_t ilo, std::size_t ihi) {
    std::vector<std::size_t> slab;
    for (int i = static_cast<int>(ilo); i < static_cast<int>(ihi); ++i) {
      double x = grid.x(i);
      slab.clear();
      for (std::size_t p = 0; p < picked.size(); ++p) {
        if (std::abs(picked[p]->x - x) <= window) slab.push_back(p);
      }
      if (slab.empty()) continue;
      for (int j = 0; j < grid.ny; ++j) {
        double y = grid.y(j);
        for (int k = 0; k < grid.nz; ++k) {
          double z = grid.z(k);
          double v = 0.0;
          for (std::size_t p : slab) {
            const Site* s = picked[p];
            double ddy = s->y - y;
            double ddz = s->z - z;
            if (std::abs(ddy) > window || std::abs(ddz) > window) continue;
            double ddx = s->x - x;
            double r2 = ddx * ddx + ddy * ddy + ddz * ddz;
            v += site_norm[p] * std::exp(-r2 * inv2s2);
          }
          rho(i, j, k) += v;
        }
      }
    }
  });
  return rho;
}

std::vector<Site> tile_motif(const std::vector<MotifEntry>& motif, double a_nm, double b_nm,
                             double c_nm, int cells_x, int cells_y, int cells_z) {
  if (cells_x < 1 || cells_y < 1 || cells_z < 1) {
    throw std::invalid_argument("cell counts must be at least 1");
  }
  std::vector<Site> sites;
  sites.reserve(motif.size() * static_cast<std::size_t>(cells_x) * cells_y * cells_z);
  for (int cx = 0; cx < cells_x; ++cx) {
    for (int cy = 0; cy < cells_y; ++cy) {
      for (int cz = 0; cz < cells_z; ++cz) {
        for (const MotifEntry& m : motif) {
          Site s;
          s.label = m.label;
          s.x = (cx + m.fx) * a_nm;
          s.y = (cy + m.fy) * b_nm;
          s.z = (cz + m.fz) * c_nm;
          sites.push_back(std::move(s));
        }
      }
    }
  }
  return sites;
}

}  // namespace pnpcdft

#include "pnpcdft/species.hpp"

#include <stdexcept>

namespace pnpcdft {

int find_species(const std::vector<SpeciesSpec>& all, const std::string& name) {
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].name == name) return static_cast<int>(i);
  }
  throw std::invalid_argument("unknown species name: " + name);
}

}  // namespace pnpcdft

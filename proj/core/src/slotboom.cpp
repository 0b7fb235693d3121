#include "pnpcdft/slotboom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pnpcdft/parallel.hpp"

namespace pnpcdft {

ScalarField slotboom_exponent(double valence, const ScalarField& u, const ScalarField& mu_id,
                              const ScalarField& mu_ex, double beta, double clamp, int threads) {
  if (!u.grid().same_shape(mu_id.grid()) || !u.grid().same_shape(mu_ex.grid())) {
    throw std::invalid_argument("slotboom_exponent: grids differ");
  }
  ScalarField S(u.grid());
  parallel_for(0, S.size(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t n = lo; n < hi; ++n) {
      double s = valence * u[n] + beta * (mu_id[n] + mu_ex[n]);
      S[n] = std::clamp(s, -clamp, clamp);
    }
  });
  return S;
}

ScalarField slotboom_density(const ScalarField& rho, const ScalarField& S, int threads) {
  if (!rho.grid().same_shape(S.grid())) {
    throw std::invalid_argument("slotboom_density: grids differ");
  }
  ScalarField out(rho.grid());
  parallel_for(0, out.size(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t n = lo; n < hi; ++n) out[n] = rho[n] * std::exp(S[n]);
  });
  return out;
}

ScalarField slotboom_diffusivity(double D_nm2_s, const ScalarField& S, int threads) {
  if (!(D_nm2_s > 0.0)) {
    throw std::invalid_argument("slotboom_diffusivity: diffusivity must be positive");
  }
  ScalarField out(S.grid());
  parallel_for(0, out.size(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t n = lo; n < hi; ++n) out[n] = D_nm2_s * std::exp(-S[n]);
  });
  return out;
}

ScalarField slotboom_invert(const ScalarField& rho_bar, const ScalarField& S, int threads) {
  if (!rho_bar.grid().same_shape(S.grid())) {
    throw std::invalid_argument("slotboom_invert: grids differ");
  }
  ScalarField out(rho_bar.grid());
  parallel_for(0, out.size(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t n = lo; n < hi; ++n) {
      out[n] = std::max(rho_bar[n], 0.0) * std::exp(-S[n]);
    }
  });
  return out;
}

}  // namespace pnpcdft

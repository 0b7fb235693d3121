#pragma once

#include "pnpcdft/field.hpp"

namespace pnpcdft {

// Variable change that turns the drift-diffusion flux into a pure diffusion
// problem. With S = q u + beta (mu_id + mu_ex) the flux
//   -J = D [grad rho + rho grad S]
// becomes -J = D_bar grad rho_bar for rho_bar = rho e^S, D_bar = D e^{-S},
// and the product rho_bar D_bar = rho D survives the transform unchanged.
// The exponent is clamped symmetrically so the pair of exponentials stays
// finite; clamped nodes still satisfy the identity because both directions
// use the same clamped S.

ScalarField slotboom_exponent(double valence, const ScalarField& u, const ScalarField& mu_id,
                              const ScalarField& mu_ex, double beta, double clamp = 500.0,
                              int threads = 1);

// rho_bar = rho * exp(S)
ScalarField slotboom_density(const ScalarField& rho, const ScalarField& S, int threads = 1);

// D_bar = D * exp(-S), D constant per species [nm^2/s]
ScalarField slotboom_diffusivity(double D_nm2_s, const ScalarField& S, int threads = 1);

// rho = rho_bar * exp(-S), clamped to be non-negative
ScalarField slotboom_invert(const ScalarField& rho_bar, const ScalarField& S, int threads = 1);

}  // namespace pnpcdft

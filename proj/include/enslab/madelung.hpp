#pragma once

#include "enslab/densities.hpp"
#include "enslab/fields.hpp"

namespace enslab {

// psi = sqrt(p) exp(i S / hbar), with S including the drift term.
ComplexField to_wavefunction(const EnsembleState& state, double hbar);

// Inverse transform. The phase is unwrapped along axis 0 from the first node,
// then axis by axis from the already unwrapped hyperplane. A winding that is
// the same on every grid line is returned as drift; anything else, or
// min |psi|^2 < 1e-12 max |psi|^2, raises NodeDetected.
EnsembleState from_wavefunction(const ComplexField& psi, double hbar);

// True when exp(i drift . x / hbar) is periodic on the grid.
bool drift_commensurate(const EnsembleState& state, double hbar, double tol = 1e-9);

}  // namespace enslab

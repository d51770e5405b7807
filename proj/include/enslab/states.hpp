#pragma once

#include <vector>

#include "enslab/densities.hpp"
#include "enslab/fields.hpp"

namespace enslab {

// Product Gaussian initial data. Per-axis vectors may have one entry (shared)
// or one per axis. Distances are measured from the box midpoint.
//
// Windowed form (for the log-density representation): on each axis
//   log p = -(quad(d) - c lin(d)) / sigma^2,   S = alpha (quadS(d) - c linS(d)),
// which is exactly the Gaussian of width sigma centred at c with phase
// alpha (x - c)^2 / 2 (up to a constant) wherever the windows are linear.
// The momentum k enters as the linear drift hbar k.
struct GaussianSpec {
    std::vector<double> offset{0.0};    // centre relative to the box midpoint
    std::vector<double> sigma{1.0};     // density standard deviation
    std::vector<double> momentum{0.0};  // wavenumber k
    std::vector<double> alpha{0.0};     // phase curvature
    double depth = 10.0;                // plateau depth of log p, in e-folds
    double ratio = 3.0;
    double window_a = 0.0;              // explicit density window half-width (0: from depth)
    double phase_a = 0.0;               // phase window half-width (0: 0.16 L)
    double phase_ratio = 0.5;
};

EnsembleState gaussian_state(const Grid& grid, const GaussianSpec& spec, double hbar);

// Unwindowed minimum-image Gaussian wavefunction, for the split-step evolver.
ComplexField gaussian_wavefunction(const Grid& grid, const GaussianSpec& spec, double hbar);

EnsembleState uniform_state(const Grid& grid);

}  // namespace enslab

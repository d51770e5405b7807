#pragma once

#include <vector>

#include "enslab/densities.hpp"
#include "enslab/dynamics.hpp"

namespace enslab {

struct BoostSpec {
    std::vector<double> u;  // one component per particle dimension, shared by all particles
    double phi = 0.0;
};

// x' = x - u t, p'(x') = p(x), S'(x') = S(x) - m u x + m u^2 t / 2 + phi.
// The translation is an exact node shift, so u t must be a whole number of
// grid spacings on every axis.
EnsembleState boost_state(const EnsembleState& s, const BoostSpec& boost, double t,
                          const ConfigMetric& metric);

// Per-axis <dS/dx / m>.
std::vector<double> mean_velocity(const EnsembleState& s, const ConfigMetric& metric);

struct BoostReport {
    double p_discrepancy = 0.0;
    double S_discrepancy = 0.0;  // after removing the p-weighted mean difference
    double tolerance = 0.0;
    bool pass = false;
};

// Path A: evolve to T, then boost. Path B: boost at t = 0, then evolve.
BoostReport boost_commutation_test(const EnsembleState& s0, const BoostSpec& boost,
                                   const EvolutionParams& params, double T, double tolerance);

}  // namespace enslab

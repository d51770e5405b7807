#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "enslab/densities.hpp"

namespace enslab {

// A density evaluated on raw (p, S) fields; p need not be normalized.
struct Density {
    std::string name;
    std::function<ScalarField(const ScalarField& p, const ScalarField& S, const ConfigMetric& metric)> eval;
};

Density density_h_diagonal(double Abar = 0.5, double Bbar = 0.125);
Density density_h_general(const CoefficientSet& c);
Density density_h_higher_derivative(double eta);
Density density_counterexample();       // p^{-1} d_1 ... d_D log p
Density density_linear_phase();         // h = S
Density density_anisotropic_probe();    // diagonal density with fixed masses (1, 3)

std::vector<Density> default_catalog();

struct AuditReport {
    std::string axiom;
    std::string density;
    int trials = 0;
    double max_abs = 0.0;
    double max_rel = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::vector<std::uint64_t> seeds;
    std::string note;
    // Scale audit only: worst relative deviation for each lambda.
    std::vector<std::pair<double, double>> per_lambda;
};

AuditReport audit_scale_invariance(const Density& d, int trials, const std::vector<double>& lambdas,
                                   std::uint64_t seed = 11, double tol = 1e-12);
AuditReport audit_separability(const Density& d, int trials, std::uint64_t seed = 23, double tol = 1e-10);
AuditReport audit_positivity(const Density& d, int trials, std::uint64_t seed = 37, double tol = 1e-12);
AuditReport audit_rotation(const Density& d, int trials, std::uint64_t seed = 53, double tol = 1e-12);

struct GaugeResult {
    double kappa = 0.0;     // <F,Q> / <Q,Q>
    double residual = 0.0;  // ||F - kappa Q|| / ||F||
    double normF = 0.0;
    double normQ = 0.0;
};

// Inner products are weighted by p: <a,b> = Int p a b.
GaugeResult gauge_residual(const EnsembleState& s, const ConfigMetric& metric, double hbar, double C);

struct GaugeReport {
    std::vector<GaugeResult> results;  // non-degenerate states only
    int degenerate = 0;
    int above_threshold = 0;
    bool inequivalent = false;  // residual > threshold for a majority
};

GaugeReport gauge_inequivalence_check(const std::vector<EnsembleState>& states, const ConfigMetric& metric,
                                      double hbar, double C, double threshold = 0.1);

}  // namespace enslab

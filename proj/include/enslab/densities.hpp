#pragma once

#include <utility>
#include <vector>

#include "enslab/fields.hpp"

namespace enslab {

// Minimum allowed p_min / p_max for the (log p, S) representation.
inline constexpr double kNodelessFloor = 1e-12;

// Normalized positive density and phase. The phase is stored as a periodic
// part plus a per-axis linear drift, S = phase + drift . x, so states with net
// momentum (and boosted states) live on the periodic grid without a seam.
class EnsembleState {
public:
    EnsembleState() = default;

    // p must be positive with min p >= 1e-12 max p; it is rescaled to unit mass.
    static EnsembleState from_density(const ScalarField& p, const ScalarField& S,
                                      std::vector<double> drift = {});
    static EnsembleState from_log(const Grid& grid, std::vector<double> logp,
                                  std::vector<double> phase, std::vector<double> drift = {});

    const Grid& grid() const { return grid_; }
    const std::vector<double>& logp() const { return logp_; }
    const std::vector<double>& phase() const { return phase_; }
    const std::vector<double>& drift() const { return drift_; }

    ScalarField p() const;
    ScalarField log_density() const { return ScalarField(grid_, logp_); }
    ScalarField periodic_phase() const { return ScalarField(grid_, phase_); }
    // Phase evaluated on the nodes, including the drift term.
    ScalarField S() const;

    // Spectral gradients of log p and of S (drift included).
    ScalarField logp_gradient(int axis) const;
    ScalarField phase_gradient(int axis) const;

private:
    Grid grid_;
    std::vector<double> logp_;
    std::vector<double> phase_;
    std::vector<double> drift_;
};

struct CoefficientSet {
    double A = 0.0;
    double B = 0.0;
    std::vector<std::pair<double, double>> pairs;  // (a_n, b_n)

    static CoefficientSet quantum(double hbar) { return {0.5, hbar * hbar / 8.0, {}}; }
    void validate() const;
};

struct ReducedCoefficients {
    double Abar = 0.5;
    double Bbar = 0.0;
    double C = 0.0;

    static ReducedCoefficients quantum(double hbar) { return {0.5, hbar * hbar / 8.0, 0.0}; }
    static ReducedCoefficients classical() { return {0.5, 0.0, 0.0}; }
    void validate() const;
};

ReducedCoefficients reduce(const CoefficientSet& c);

// Pointwise densities. The (p, S) overloads accept unnormalized p and a plain
// periodic S field; they exist for the axiom audits.
ScalarField h_general(const EnsembleState& s, const ConfigMetric& metric, const CoefficientSet& c);
ScalarField h_general(const ScalarField& p, const ScalarField& S, const ConfigMetric& metric,
                      const CoefficientSet& c);
ScalarField h_diagonal(const EnsembleState& s, const ConfigMetric& metric, double Abar, double Bbar);
ScalarField h_diagonal(const ScalarField& p, const ScalarField& S, const ConfigMetric& metric,
                       double Abar, double Bbar);
// g[Abar S'S' + Bbar q'q' + C q'S'], the density generating the equations of motion.
ScalarField h_reduced(const EnsembleState& s, const ConfigMetric& metric, const ReducedCoefficients& c);
ScalarField h_higher_derivative(const ScalarField& p, const ConfigMetric& metric, double eta);
ScalarField h_counterexample_universality(const ScalarField& p, const Grid& grid);

ScalarField quantum_potential(const ScalarField& p, const ConfigMetric& metric, double hbar);
ScalarField quantum_potential(const EnsembleState& s, const ConfigMetric& metric, double hbar);

std::vector<ScalarField> current(const EnsembleState& s, const ConfigMetric& metric);
std::vector<ScalarField> current(const ComplexField& psi, const ConfigMetric& metric, double hbar);

struct CurrentTerms {
    ScalarField R1;  // (d_i J_i) / p
    ScalarField R4;  // (d_i p) J_i / p^2
};
CurrentTerms current_terms(const EnsembleState& s, const ConfigMetric& metric);
// F = C (R4 - R1).
ScalarField f_nonlinearity(const EnsembleState& s, const ConfigMetric& metric, double C);

}  // namespace enslab

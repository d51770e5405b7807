#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "enslab/densities.hpp"
#include "enslab/fields.hpp"

namespace enslab {

struct ZeroPotential {};

// Per-particle harmonic trap centred at the box midpoint. On the periodic box
// the trap is exactly (1/2) m w^2 d^2 inside a window around the centre and
// flattens outside it; the window plateau sits `depth` e-folds below the peak
// of the matched ground-state density, which stays exactly stationary.
struct HarmonicPotential {
    std::vector<double> omega;
    double depth = 10.0;
    double ratio = 3.0;
};

struct TabulatedPotential {
    ScalarField values;
};

using PotentialSpec = std::variant<ZeroPotential, HarmonicPotential, TabulatedPotential>;

ScalarField potential_field(const PotentialSpec& spec, const Grid& grid, const ConfigMetric& metric,
                            double hbar);
Window harmonic_window(const HarmonicPotential& h, const Grid& grid, const ConfigMetric& metric,
                       double hbar, int axis);
// Ground-state width sqrt(hbar / (2 m w)) of the density along an axis.
double harmonic_sigma(const HarmonicPotential& h, const ConfigMetric& metric, double hbar, int axis);

struct EvolutionParams {
    ConfigMetric metric;
    ReducedCoefficients coef = ReducedCoefficients::quantum(1.0);
    double hbar = 1.0;
    PotentialSpec potential = ZeroPotential{};
    double dt = 1e-3;
    double t_end = 1.0;
    int stride = 1;
    double energy_scale = 1.0;  // hbar * omega_ref in the relative energy drift
    std::vector<double> snapshot_times;

    void validate(const Grid& grid) const;
    long steps() const;
};

struct ObservableRow {
    double t = 0.0;
    double norm = 1.0;
    double energy = 0.0;
    std::vector<double> mean;
    std::vector<double> var;
    double min_p = 0.0;
};

struct Snapshot {
    double t = 0.0;
    ScalarField p;
    ScalarField S;
    ComplexField psi;
};

struct ObservableSeries {
    std::vector<ObservableRow> rows;
    std::vector<Snapshot> snapshots;
    double energy_scale = 1.0;

    // max_t |H(t) - H(0)| / (|H(0)| + energy_scale)
    double energy_drift() const;
    double norm_drift() const;
};

struct Rates {
    ScalarField dp;
    ScalarField dS;
};

// Equations of motion in (p, S) form, all derivatives spectral.
Rates eom_rhs(const EnsembleState& s, const EvolutionParams& params);
Rates eom_rhs(const EnsembleState& s, const EvolutionParams& params, const ScalarField& V);

double energy(const EnsembleState& s, const EvolutionParams& params, const ScalarField& V);
double energy(const EnsembleState& s, const EvolutionParams& params);
// <psi| -(hbar^2/2) g D^2 + V |psi>, kinetic part evaluated in Fourier space.
double energy_wavefunction(const ComplexField& psi, const ConfigMetric& metric, double hbar,
                           const ScalarField& V);

using RhsFn = std::function<Rates(const EnsembleState&, const EvolutionParams&)>;

struct FdReport {
    int probes = 0;
    double max_mismatch_S = 0.0;  // S-direction probes against dp/dt
    double max_mismatch_p = 0.0;  // mass-preserving p probes against -dS/dt
    double max_mismatch = 0.0;
};

// Compares central differences of the discrete H with the coded rates.
// Mismatch per probe: |FD - predicted| / (||rate||_2 ||eta||_2).
FdReport functional_derivative_check(const EnsembleState& s, const EvolutionParams& params,
                                     int probe_count, double eps, std::uint64_t seed = 1,
                                     const RhsFn& rhs = {});

// RK4 in (log p, S) with renormalization after the step.
class MadelungStepper {
public:
    MadelungStepper(const EnsembleState& s, const EvolutionParams& params);

    void step();
    double time() const { return static_cast<double>(steps_) * params_.dt; }
    long steps_taken() const { return steps_; }
    const EnsembleState& state() const { return state_; }
    const ScalarField& potential() const { return V_; }
    double last_norm() const { return last_norm_; }
    double renorm_drift() const { return drift_; }
    ObservableRow observe() const;

private:
    void rhs(const std::vector<double>& q, const std::vector<double>& sigma, std::vector<double>& dq,
             std::vector<double>& dsigma) const;
    void rhs_similarity(const std::vector<double>& q, const std::vector<double>& sigma,
                        std::vector<double>& dq, std::vector<double>& dsigma) const;
    void rhs_direct(const std::vector<double>& q, const std::vector<double>& sigma,
                    std::vector<double>& dq, std::vector<double>& dsigma) const;

    EnsembleState state_;
    EvolutionParams params_;
    ScalarField V_;
    double mu_ = 0.0;
    double Btilde_ = 0.0;
    double beta_ = 0.0;
    std::vector<double> mult_;  // -sum g (k + kappa/beta)^2
    long steps_ = 0;
    double last_norm_ = 1.0;
    double drift_ = 0.0;
};

EnsembleState step_rk4(const EnsembleState& s, const EvolutionParams& params,
                       double* renorm_drift = nullptr);

struct MadelungRun {
    EnsembleState state;
    ObservableSeries series;
    double renorm_drift = 0.0;
};

MadelungRun evolve_madelung(const EnsembleState& s, const EvolutionParams& params);

// Strang split-step for i b dphi/dt = [-A b^2 g (D + i shift)^2 + V] phi.
class SplitStepper {
public:
    SplitStepper(const ComplexField& phi, const ScalarField& V, const ConfigMetric& metric, double dt,
                 double Acoef, double b, std::vector<double> shift = {});

    void step();
    double time() const { return static_cast<double>(steps_) * dt_; }
    const ComplexField& field() const { return phi_; }
    double energy() const;

private:
    ComplexField phi_;
    ScalarField V_;
    double dt_;
    double A_;
    double b_;
    std::vector<double> k2_;  // sum g (k + shift)^2
    std::vector<cplx> kinetic_;
    std::vector<cplx> half_potential_;
    long steps_ = 0;
};

struct WaveRun {
    ComplexField psi;
    ObservableSeries series;
};

WaveRun evolve_schrodinger_splitstep(const ComplexField& psi, const EvolutionParams& params);

// Hamiltonian nonlinear evolution for C != 0. Uses the exact gauge map
// phi = sqrt(p) exp(i (S + mu log p) / beta), mu = C / (2 Abar),
// beta = 2 sqrt((Bbar - C^2 / (4 Abar)) / Abar), under which the equation is
// linear in phi; phi is advanced by split-step and mapped back.
WaveRun evolve_nonlinear(const ComplexField& psi, const EvolutionParams& params);

ObservableRow observe_density(const Grid& grid, const std::vector<double>& p, double t, double norm,
                              double energy);

}  // namespace enslab

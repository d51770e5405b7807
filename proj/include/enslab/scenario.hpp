#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "enslab/densities.hpp"
#include "enslab/dynamics.hpp"
#include "enslab/fields.hpp"
#include "enslab/states.hpp"

namespace enslab {

struct StateSpec {
    std::string kind = "gaussian";  // uniform | gaussian | file
    GaussianSpec gaussian;
    bool windowed = true;  // false: plain Gaussian wavefunction (split-step only)
    std::filesystem::path file;
};

struct PotentialConfig {
    std::string kind = "zero";  // zero | harmonic | file
    HarmonicPotential harmonic;
    std::filesystem::path file;
};

struct AuditConfig {
    std::vector<std::string> densities;  // empty: full catalog
    std::vector<std::string> axioms{"scale", "separability", "positivity", "rotation"};
    int trials = 4;
    std::vector<double> lambdas{0.5, 2.0, 10.0};
    std::optional<double> tolerance;  // replaces every per-axiom tolerance
    std::optional<double> gauge_C;    // also run the gauge check on the scenario state
};

struct BoostConfig {
    std::vector<double> u;
    double phi = 0.0;
    double T = 1.0;
    std::vector<double> Bbar;
    std::vector<double> C;
    std::vector<double> tolerance{1e-5};  // one entry, or one per case
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::filesystem::path base_dir = ".";  // relative file paths resolve here
    std::string evolver = "madelung";       // madelung | splitstep | nonlinear
    std::uint64_t seed = 0;
    double hbar = 1.0;
    std::string output;

    std::vector<double> lengths;
    std::vector<int> counts;
    std::vector<double> origin;
    int particle_dim = 1;
    std::vector<double> masses;

    StateSpec state;
    std::string coef_form;  // quantum | reduced | family
    CoefficientSet family;
    ReducedCoefficients coef;
    PotentialConfig potential;

    double dt = 0.0;
    double t_end = 0.0;
    int stride = 1;
    double energy_scale = 1.0;
    std::vector<double> snapshots;

    double compare_tolerance = 1e-4;
    AuditConfig audit;
    BoostConfig boost;

    Grid grid() const;
    ConfigMetric metric() const;
    EvolutionParams params() const;
    PotentialSpec potential_spec() const;
    EnsembleState initial_state() const;
    ComplexField initial_wavefunction() const;
    // Fully resolved config in the same format, parseable by parse_scenario.
    std::string resolved() const;
};

// Throws ConfigError on malformed or inconsistent input.
ScenarioConfig parse_scenario(const std::string& text, const std::string& name = "scenario");
ScenarioConfig load_scenario(const std::filesystem::path& file);

// Default output directory: $ENSLAB_OUT_ROOT/<name>, else ./enslab_out/<name>.
std::filesystem::path default_output(const ScenarioConfig& cfg);

// Each returns the process exit code: 0 success, 1 numerical failure or
// tolerance breach, 2 configuration error. Diagnostics go to stderr.
// Nothing is written when the configuration is rejected.
int run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out);
int compare_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out,
                     std::optional<double> tolerance = std::nullopt);
int audit_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out,
                   std::optional<double> tolerance = std::nullopt);
int boost_check_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out);

}  // namespace enslab

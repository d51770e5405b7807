#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "enslab/errors.hpp"
#include "enslab/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"enslab: ensemble-Hamiltonian dynamics lab"};
    app.require_subcommand(1);

    std::string config, out;
    std::optional<double> tol;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (default: $ENSLAB_OUT_ROOT/<name>)");
    };
    auto* run = app.add_subcommand("run", "evolve a scenario and write observables");
    auto* compare = app.add_subcommand("compare", "Madelung vs split-step on the same initial data");
    auto* audit = app.add_subcommand("audit", "axiom audits over the density catalog");
    auto* boost = app.add_subcommand("boost-check", "boost commutation for the configured cases");
    for (auto* s : {run, compare, audit, boost}) add_common(s);
    compare->add_option("--tol", tol, "final sup-norm p discrepancy tolerance");
    audit->add_option("--tol", tol, "replace every audit tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    enslab::ScenarioConfig cfg;
    try {
        cfg = enslab::load_scenario(config);
    } catch (const enslab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    const auto dir = out.empty() ? enslab::default_output(cfg) : std::filesystem::path(out);

    if (*run) return enslab::run_scenario(cfg, dir);
    if (*compare) return enslab::compare_scenario(cfg, dir, tol);
    if (*audit) return enslab::audit_scenario(cfg, dir, tol);
    return enslab::boost_check_scenario(cfg, dir);
}

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "enslab/audit.hpp"
#include "enslab/errors.hpp"
#include "enslab/states.hpp"

using namespace enslab;
using std::numbers::pi;

TEST_CASE("scale invariance") {
    const std::vector<double> lambdas{0.5, 2.0, 10.0};
    CHECK(audit_scale_invariance(density_h_diagonal(), 3, lambdas).pass);
    CHECK(audit_scale_invariance(density_h_higher_derivative(0.5), 3, lambdas).pass);
    const auto ce = audit_scale_invariance(density_counterexample(), 3, {3.0});
    CHECK_FALSE(ce.pass);
    CHECK(ce.max_rel == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(ce.seeds.size() == 3);
    CHECK_THROWS_AS(audit_scale_invariance(density_h_diagonal(), 1, {-1.0}), std::invalid_argument);
}

TEST_CASE("separability") {
    CHECK(audit_separability(density_h_diagonal(), 3).pass);
    CHECK(audit_separability(density_h_general({0.2, 0.3, {{0.7, 0.4}}}), 3).pass);
    const auto ce = audit_separability(density_counterexample(), 3);
    CHECK(ce.pass);
    CHECK(ce.note.find("degenerate") != std::string::npos);
    CHECK(audit_separability(density_h_diagonal(), 3).note.empty());
}

TEST_CASE("positivity") {
    CHECK(audit_positivity(density_h_diagonal(), 3).pass);
    CHECK(audit_positivity(density_h_general({0.0, 0.0, {{1.0, 1.0}, {-2.0, 0.5}}}), 3).pass);
    const auto w = audit_positivity(density_linear_phase(), 3);
    CHECK_FALSE(w.pass);
    CHECK(w.max_abs > 0.0);
}

TEST_CASE("rotation") {
    CHECK(audit_rotation(density_h_diagonal(), 3).pass);
    CHECK(audit_rotation(density_h_higher_derivative(0.5), 3).pass);
    CHECK_FALSE(audit_rotation(density_anisotropic_probe(), 3).pass);
}

TEST_CASE("zero tolerance turns passes into failures") {
    CHECK_FALSE(audit_scale_invariance(density_h_diagonal(), 2, {0.5, 2.0}, 11, 0.0).pass);
}

TEST_CASE("audits are deterministic") {
    const auto a = audit_scale_invariance(density_h_general({0.3, 0.1, {{1.0, 0.2}}}), 2, {2.0}, 99);
    const auto b = audit_scale_invariance(density_h_general({0.3, 0.1, {{1.0, 0.2}}}), 2, {2.0}, 99);
    CHECK(a.max_rel == b.max_rel);
    CHECK(a.seeds == b.seeds);
}

TEST_CASE("gauge residual") {
    const ConfigMetric m(1, {1.0});
    const Grid g({16.0 * pi}, {512});
    GaussianSpec spec;
    spec.window_a = 6.0;
    spec.alpha = {1.0};
    spec.phase_a = 12.0;
    spec.phase_ratio = 1.0;
    const auto s = gaussian_state(g, spec, 1.0);
    const auto r = gauge_residual(s, m, 1.0, 0.2);
    CHECK(r.residual == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-6));
    CHECK(r.kappa == doctest::Approx(-8.0 * 0.2 / 3.0).epsilon(1e-5));

    const Grid pg({2.0 * pi}, {64}, {0.0});
    const auto plane = EnsembleState::from_log(pg, std::vector<double>(64, 0.0), std::vector<double>(64, 0.0), {2.0});
    CHECK_THROWS_AS(gauge_residual(plane, m, 1.0, 0.2), DegenerateState);
    GaussianSpec still;
    const auto flat_phase = gaussian_state(g, still, 1.0);
    CHECK_THROWS_AS(gauge_residual(flat_phase, m, 1.0, 0.2), DegenerateState);

    const auto rep = gauge_inequivalence_check({s, plane, flat_phase}, m, 1.0, 0.2);
    CHECK(rep.inequivalent);
    CHECK(rep.degenerate == 2);
    CHECK_THROWS_AS(gauge_inequivalence_check({plane}, m, 1.0, 0.2), DegenerateState);
}

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "enslab/errors.hpp"
#include "enslab/galilean.hpp"
#include "enslab/states.hpp"

using namespace enslab;
using std::numbers::pi;

namespace {

const Grid kGrid({16.0 * pi}, {512});

EnsembleState packet(double alpha, double k = 0.0) {
    GaussianSpec g;
    g.alpha = {alpha};
    g.momentum = {k};
    g.offset = {0.2};
    g.phase_a = 8.0;
    return gaussian_state(kGrid, g, 1.0);
}

}  // namespace

TEST_CASE("zero boost is the identity") {
    const auto s = packet(0.4, 0.5);
    const ConfigMetric m(1, {1.0});
    const auto b = boost_state(s, {{0.0}, 0.0}, 3.0, m);
    CHECK(b.logp() == s.logp());
    CHECK(b.phase() == s.phase());
    CHECK(b.drift() == s.drift());
}

TEST_CASE("boost at t = 0 adds -m u x") {
    const Grid g({2.0 * pi}, {64}, {0.0});
    const auto s = uniform_state(g);
    const auto b = boost_state(s, {{1.0}, 0.0}, 0.0, ConfigMetric(1, {1.0}));
    const auto S = b.S();
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(S[i] == doctest::Approx(-g.coord(0, i)).epsilon(1e-14));
    for (double p : b.p().v) CHECK(p == doctest::Approx(1.0 / (2.0 * pi)));
}

TEST_CASE("boost time term m u^2 t / 2") {
    const Grid g({8.0}, {64}, {0.0});
    const auto s = uniform_state(g);
    const ConfigMetric m(1, {2.0});
    const BoostSpec u{{1.0}, 0.0};
    const auto b0 = boost_state(s, u, 0.0, m);
    const auto b1 = boost_state(s, u, 1.0, m);  // u t = 8 dx
    const auto S0 = b0.S(), S1 = b1.S();
    // S1(x') = -m u x' - m u^2 t / 2 relative to the t = 0 boost.
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(S0[i] - S1[i] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("density is translated by exact node relabeling") {
    const auto s = packet(0.3);
    const double u = 5.0 * kGrid.dx(0);
    const auto b = boost_state(s, {{u}, 0.0}, 1.0, ConfigMetric(1, {1.0}));
    for (std::size_t i = 0; i < kGrid.size(); ++i) CHECK(b.logp()[i] == s.logp()[(i + 5) % kGrid.size()]);
}

TEST_CASE("incommensurate boost") {
    CHECK_THROWS_AS(boost_state(packet(0.0), {{0.3}, 0.0}, 1.0, ConfigMetric(1, {1.0})), IncommensurateBoost);
    CHECK_THROWS_AS(boost_state(packet(0.0), {{1.0, 2.0}, 0.0}, 0.0, ConfigMetric(1, {1.0})), std::invalid_argument);
}

TEST_CASE("velocity covariance and double boost") {
    const ConfigMetric m(1, {1.7});
    const auto s = packet(0.3, 0.75);
    const double u = 4.0 * kGrid.dx(0), w = -7.0 * kGrid.dx(0);
    const auto v = mean_velocity(s, m)[0];
    const auto b = boost_state(s, {{u}, 0.0}, 1.0, m);
    CHECK(std::abs(mean_velocity(b, m)[0] - (v - u)) < 1e-10);

    const auto bb = boost_state(b, {{w}, 0.0}, 1.0, m);
    const auto direct = boost_state(s, {{u + w}, 0.0}, 1.0, m);
    const auto S1 = bb.S(), S2 = direct.S();
    const double c = S1[0] - S2[0];
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
        CHECK(bb.logp()[i] == doctest::Approx(direct.logp()[i]).epsilon(1e-14));
        CHECK(std::abs(S1[i] - S2[i] - c) < 1e-10);
    }
}

TEST_CASE("2D boost applies u to every particle") {
    const Grid g({4.0, 4.0}, {16, 16});
    const ConfigMetric m(1, {1.0, 3.0});
    const auto s = EnsembleState::from_density(random_smooth_field(g, 1, 3, 0.5), random_smooth_field(g, 2, 3));
    const double u = 2.0 * g.dx(0);
    const auto b = boost_state(s, {{u}, 0.0}, 1.0, m);
    const auto v0 = mean_velocity(s, m), v1 = mean_velocity(b, m);
    CHECK(std::abs(v1[0] - (v0[0] - u)) < 1e-10);
    CHECK(std::abs(v1[1] - (v0[1] - u)) < 1e-10);
}

TEST_CASE("boost commutation") {
    EvolutionParams p;
    p.metric = ConfigMetric(1, {1.0});
    p.dt = 1e-3;
    const BoostSpec u{{8.0 * kGrid.dx(0)}, 0.25};
    p.coef = ReducedCoefficients::quantum(1.0);
    const auto rep = boost_commutation_test(packet(0.0), u, p, 0.5, 1e-5);
    CHECK(rep.pass);
    CHECK(rep.p_discrepancy < 1e-5);
    p.coef = {0.6, 0.125, 0.0};
    CHECK_THROWS_AS(boost_commutation_test(packet(0.0), u, p, 0.5, 1e-5), std::invalid_argument);
}

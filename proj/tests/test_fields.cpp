#include <doctest.h>

#include <cmath>
#include <numbers>

#include "enslab/fields.hpp"

using namespace enslab;
using std::numbers::pi;

namespace {

double max_err(const ScalarField& f, const std::function<double(double)>& g) {
    double e = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) e = std::max(e, std::abs(f[i] - g(f.grid.coord(0, i))));
    return e;
}

}  // namespace

TEST_CASE("grid layout is row-major with the last axis fastest") {
    const Grid g({2.0, 3.0}, {8, 10});
    CHECK(g.size() == 80);
    CHECK(g.stride(1) == 1);
    CHECK(g.stride(0) == 10);
    CHECK(g.index(0, 23) == 2);
    CHECK(g.index(1, 23) == 3);
    CHECK(g.coord(0, 0) == doctest::Approx(-1.0));
    CHECK(g.cell_volume() == doctest::Approx(0.25 * 0.3));
    CHECK_THROWS_AS(Grid({1.0}, {7}), std::invalid_argument);
    CHECK_THROWS_AS(Grid({-1.0}, {8}), std::invalid_argument);
}

TEST_CASE("wavenumbers follow FFT order") {
    const auto k = Grid({2.0 * pi}, {8}).wavenumbers(0);
    CHECK(k[1] == doctest::Approx(1.0));
    CHECK(k[3] == doctest::Approx(3.0));
    CHECK(k[4] == doctest::Approx(-4.0));
    CHECK(k[7] == doctest::Approx(-1.0));
}

TEST_CASE("spectral gradient") {
    const Grid g({2.0 * pi}, {64});
    const auto s = sample(g, [](const auto& x) { return std::sin(x[0]); });
    CHECK(max_err(gradient(s, 0), [](double x) { return std::cos(x); }) < 1e-12);

    const auto c = gradient(ScalarField(g, 3.5), 0);
    CHECK(max_err(c, [](double) { return 0.0; }) < 1e-14);

    const Grid w({20.0 * pi}, {256});
    const auto gauss = sample(w, [](const auto& x) { return std::exp(-x[0] * x[0] / 2.0); });
    CHECK(max_err(gradient(gauss, 0), [](double x) { return -x * std::exp(-x * x / 2.0); }) < 1e-10);
}

TEST_CASE("metric Laplacian") {
    const Grid g({2.0 * pi}, {32}, {0.0});
    const auto s = sample(g, [](const auto& x) { return std::sin(x[0]); });
    CHECK(max_err(laplacian_metric(s, ConfigMetric(1, {2.0})), [](double x) { return -std::sin(x) / 2.0; }) < 1e-12);

    const Grid g2({2.0 * pi, 2.0 * pi}, {16, 16}, {0.0, 0.0});
    const auto f = sample(g2, [](const auto& x) { return std::sin(x[0]) * std::sin(x[1]); });
    const auto L = laplacian_metric(f, ConfigMetric(1, {1.0, 4.0}));
    double e = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) e = std::max(e, std::abs(L[i] + 1.25 * f[i]));
    CHECK(e < 1e-12);
}

TEST_CASE("integration") {
    const Grid g({3.0}, {12}, {0.0});
    CHECK(integrate(ScalarField(g, 1.0)) == doctest::Approx(3.0).epsilon(1e-15));
    const Grid h({2.0 * pi}, {64}, {0.0});
    CHECK(std::abs(integrate(sample(h, [](const auto& x) { return std::sin(x[0]); }))) < 1e-14);
    const Grid w({40.0}, {256});
    const double s = 1.3;
    const auto gauss = sample(w, [&](const auto& x) {
        return std::exp(-x[0] * x[0] / (2.0 * s * s)) / std::sqrt(2.0 * pi * s * s);
    });
    CHECK(std::abs(integrate(gauss) - 1.0) < 1e-10);
}

TEST_CASE("FFT round trip") {
    const Grid g({1.0, 2.0}, {8, 12});
    std::vector<cplx> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = cplx(std::cos(0.3 * i), std::sin(1.7 * i));
    auto w = v;
    fft_forward(g, w);
    fft_backward(g, w);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(w[i] - v[i]) < 1e-14);
}

TEST_CASE("random smooth fields") {
    const Grid g({2.0 * pi}, {64});
    const auto a = random_smooth_field(g, 42, 4);
    const auto b = random_smooth_field(g, 42, 4);
    CHECK(a.v == b.v);
    CHECK(random_smooth_field(g, 43, 4).v != a.v);
    CHECK(random_smooth_field(g, 42, 4, 0.1).min() >= 0.1);

    std::vector<cplx> spec(a.v.begin(), a.v.end());
    fft_forward(g, spec);
    const auto k = g.wavenumbers(0);
    for (std::size_t i = 0; i < spec.size(); ++i)
        if (std::abs(k[i]) > 4.5) CHECK(std::abs(spec[i]) < 1e-13);
    CHECK_THROWS_AS(random_smooth_field(g, 1, 32), std::invalid_argument);
}

TEST_CASE("window profile") {
    const Window w(3.0, 2.0, 0.05);
    CHECK(w.outer() == doctest::Approx(4.5));
    CHECK(w.lin(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(w.quad(1.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(w.slope(-2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(w.lin(6.0)) < 1e-14);
    CHECK(w.quad(6.0) == doctest::Approx(w.plateau()).epsilon(1e-12));
    CHECK(w.quad(-6.0) == doctest::Approx(w.plateau()).epsilon(1e-12));
    // quad' = lin, lin' = slope, checked through the kinks.
    const double h = 1e-5;
    for (double d : {-4.4, -3.0, -1.0, 0.3, 2.99, 3.02, 4.5, 5.0}) {
        CHECK((w.quad(d + h) - w.quad(d - h)) / (2 * h) == doctest::Approx(w.lin(d)).epsilon(1e-7));
        CHECK((w.lin(d + h) - w.lin(d - h)) / (2 * h) == doctest::Approx(w.slope(d)).epsilon(1e-6));
    }
    const Window dw = window_for_depth(0.5, 10.0, 3.0, 0.1);
    CHECK(dw.delta == doctest::Approx(0.3));
    CHECK((dw.plateau() + 0.5 * dw.delta * dw.delta) / 0.25 == doctest::Approx(10.0));
}

TEST_CASE("minimum-image displacement") {
    CHECK(wrap_displacement(0.9, 0.0, 2.0) == doctest::Approx(0.9));
    CHECK(wrap_displacement(1.1, 0.0, 2.0) == doctest::Approx(-0.9));
    CHECK(wrap_displacement(-1.0, 0.0, 2.0) == doctest::Approx(-1.0));
    CHECK(wrap_displacement(5.0, 0.5, 2.0) == doctest::Approx(0.5));
}

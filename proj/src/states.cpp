#include "enslab/states.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace enslab {

namespace {

double pick(const std::vector<double>& v, int a, const char* name) {
    if (v.size() == 1) return v[0];
    if (a < static_cast<int>(v.size())) return v[a];
    throw std::invalid_argument(std::string("gaussian state: ") + name + " needs 1 or D entries");
}

void check_sizes(const GaussianSpec& s, int D) {
    for (const auto* v : {&s.offset, &s.sigma, &s.momentum, &s.alpha})
        if (v->size() != 1 && static_cast<int>(v->size()) != D)
            throw std::invalid_argument("gaussian state: per-axis lists need 1 or D entries");
}

}  // namespace

EnsembleState gaussian_state(const Grid& grid, const GaussianSpec& spec, double hbar) {
    const int D = grid.dims();
    check_sizes(spec, D);
    std::vector<double> q(grid.size(), 0.0), S(grid.size(), 0.0), drift(D);
    for (int a = 0; a < D; ++a) {
        const double sigma = pick(spec.sigma, a, "sigma");
        const double c = pick(spec.offset, a, "offset");
        const double alpha = pick(spec.alpha, a, "alpha");
        if (!(sigma > 0.0)) throw std::invalid_argument("gaussian state: sigma must be positive");
        const double dx = grid.dx(a), L = grid.length(a);
        const Window wp = spec.window_a > 0.0 ? Window(spec.window_a, spec.ratio, 3.0 * dx)
                                              : window_for_depth(sigma, spec.depth, spec.ratio, dx);
        const Window ws(spec.phase_a > 0.0 ? spec.phase_a : 0.16 * L, spec.phase_ratio, 3.0 * dx);
        if (wp.outer() + 4.0 * wp.delta > 0.5 * L || (alpha != 0.0 && ws.outer() + 2.0 * ws.delta > 0.5 * L))
            throw std::invalid_argument("gaussian state: window does not fit in the box");
        drift[a] = hbar * pick(spec.momentum, a, "momentum");
        const int n = grid.count(a);
        std::vector<double> qa(n), Sa(n);
        for (int j = 0; j < n; ++j) {
            const double d = wrap_displacement(grid.origin(a) + j * dx, grid.midpoint(a), L);
            qa[j] = -(wp.quad(d) - c * wp.lin(d)) / (sigma * sigma);
            Sa[j] = alpha == 0.0 ? 0.0 : alpha * (ws.quad(d) - c * ws.lin(d));
        }
        for (std::size_t i = 0; i < grid.size(); ++i) {
            q[i] += qa[grid.index(a, i)];
            S[i] += Sa[grid.index(a, i)];
        }
    }
    return EnsembleState::from_log(grid, std::move(q), std::move(S), std::move(drift));
}

ComplexField gaussian_wavefunction(const Grid& grid, const GaussianSpec& spec, double hbar) {
    const int D = grid.dims();
    check_sizes(spec, D);
    ComplexField psi(grid, 1.0);
    for (int a = 0; a < D; ++a) {
        const double sigma = pick(spec.sigma, a, "sigma");
        const double c = grid.midpoint(a) + pick(spec.offset, a, "offset");
        const double k = pick(spec.momentum, a, "momentum");
        const double alpha = pick(spec.alpha, a, "alpha");
        const double L = grid.length(a);
        if (std::abs(k * L / (2.0 * std::numbers::pi) - std::nearbyint(k * L / (2.0 * std::numbers::pi))) > 1e-9)
            throw std::invalid_argument("gaussian wavefunction: k L / 2 pi must be an integer");
        const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
        const int n = grid.count(a);
        std::vector<cplx> f(n);
        for (int j = 0; j < n; ++j) {
            const double x = grid.origin(a) + j * grid.dx(a);
            const double d = wrap_displacement(x, c, L);
            f[j] = norm * std::exp(cplx(-d * d / (4.0 * sigma * sigma), k * x + alpha * d * d / (2.0 * hbar)));
        }
        for (std::size_t i = 0; i < grid.size(); ++i) psi[i] *= f[grid.index(a, i)];
    }
    return psi;
}

EnsembleState uniform_state(const Grid& grid) {
    return EnsembleState::from_log(grid, std::vector<double>(grid.size(), 0.0),
                                   std::vector<double>(grid.size(), 0.0));
}

}  // namespace enslab

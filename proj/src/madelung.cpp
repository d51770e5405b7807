#include "enslab/madelung.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "enslab/errors.hpp"

namespace enslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double x) { return x - kTwoPi * std::nearbyint(x / kTwoPi); }

}  // namespace

ComplexField to_wavefunction(const EnsembleState& state, double hbar) {
    const auto S = state.S();
    ComplexField psi(state.grid());
    for (std::size_t i = 0; i < psi.size(); ++i)
        psi[i] = std::polar(std::exp(0.5 * state.logp()[i]), S[i] / hbar);
    return psi;
}

EnsembleState from_wavefunction(const ComplexField& psi, double hbar) {
    const Grid& g = psi.grid;
    const std::size_t N = g.size();
    std::vector<double> logp(N), theta(N);
    double peak = 0.0;
    for (std::size_t i = 0; i < N; ++i) peak = std::max(peak, std::norm(psi[i]));
    if (!(peak > 0.0) || !std::isfinite(peak)) throw NodeDetected("wavefunction vanishes or is not finite");
    for (std::size_t i = 0; i < N; ++i) {
        const double a2 = std::norm(psi[i]);
        if (a2 < kNodelessFloor * peak) throw NodeDetected("wavefunction has a near-zero (node)");
        logp[i] = std::log(a2);
        theta[i] = std::arg(psi[i]);
    }

    // Winding per axis, required to be identical on every line.
    std::vector<double> drift(g.dims(), 0.0);
    for (int a = 0; a < g.dims(); ++a) {
        const std::size_t st = g.stride(a);
        const int n = g.count(a);
        long winding = 0;
        bool first = true;
        for (std::size_t i = 0; i < N; ++i) {
            if (g.index(a, i) != 0) continue;
            double total = 0.0;
            for (int j = 0; j < n; ++j) {
                const std::size_t cur = i + j * st;
                const std::size_t nxt = i + ((j + 1) % n) * st;
                total += wrap_angle(theta[nxt] - theta[cur]);
            }
            const long w = std::lround(total / kTwoPi);
            if (first) {
                winding = w;
                first = false;
            } else if (w != winding) {
                throw NodeDetected("phase winding differs between grid lines (circulation)");
            }
        }
        drift[a] = hbar * kTwoPi * static_cast<double>(winding) / g.length(a);
    }

    // Sequential sweep: axis 0 from the origin, then each axis from the
    // hyperplane unwrapped so far.
    std::vector<double> phi(N, 0.0);
    phi[0] = theta[0];
    for (int a = 0; a < g.dims(); ++a) {
        const std::size_t st = g.stride(a);
        for (std::size_t i = 0; i < N; ++i) {
            bool base = g.index(a, i) == 0;
            for (int b = a + 1; b < g.dims() && base; ++b) base = g.index(b, i) == 0;
            if (!base) continue;
            for (int j = 1; j < g.count(a); ++j) {
                const std::size_t cur = i + j * st;
                const std::size_t prev = cur - st;
                phi[cur] = phi[prev] + wrap_angle(theta[cur] - theta[prev]);
            }
        }
    }

    std::vector<double> phase(N);
    for (std::size_t i = 0; i < N; ++i) {
        double lin = 0.0;
        for (int a = 0; a < g.dims(); ++a) lin += drift[a] * g.coord(a, i);
        phase[i] = hbar * phi[i] - lin;
    }
    return EnsembleState::from_log(g, std::move(logp), std::move(phase), std::move(drift));
}

bool drift_commensurate(const EnsembleState& state, double hbar, double tol) {
    for (int a = 0; a < state.grid().dims(); ++a) {
        const double w = state.drift()[a] * state.grid().length(a) / (kTwoPi * hbar);
        if (std::abs(w - std::nearbyint(w)) > tol * std::max(1.0, std::abs(w))) return false;
    }
    return true;
}

}  // namespace enslab

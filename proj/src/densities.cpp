#include "enslab/densities.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "enslab/errors.hpp"

namespace enslab {

namespace {

void check_floor(const std::vector<double>& logp) {
    const auto [lo, hi] = std::minmax_element(logp.begin(), logp.end());
    if (!std::isfinite(*lo) || !std::isfinite(*hi))
        throw std::invalid_argument("state: non-finite log density");
    if (*lo - *hi < std::log(kNodelessFloor))
        throw NodeDetected("state: density below the nodeless floor (min p < 1e-12 max p)");
}

std::vector<double> log_of(const ScalarField& p) {
    std::vector<double> q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] > 0.0)) throw NodeDetected("density must be strictly positive");
        q[i] = std::log(p[i]);
    }
    return q;
}

struct Grads {
    std::vector<ScalarField> dq;
    std::vector<ScalarField> dS;
};

Grads grads_of(const ScalarField& p, const ScalarField& S) {
    const ScalarField q(p.grid, log_of(p));
    Grads g;
    for (int a = 0; a < p.grid.dims(); ++a) {
        g.dq.push_back(gradient(q, a));
        g.dS.push_back(gradient(S, a));
    }
    return g;
}

Grads grads_of(const EnsembleState& s) {
    Grads g;
    for (int a = 0; a < s.grid().dims(); ++a) {
        g.dq.push_back(s.logp_gradient(a));
        g.dS.push_back(s.phase_gradient(a));
    }
    return g;
}

void check_metric(const Grid& grid, const ConfigMetric& metric) {
    if (metric.dims() != grid.dims()) throw std::invalid_argument("metric rank does not match grid");
}

ScalarField general_from(const Grid& grid, const Grads& gr, const ConfigMetric& metric,
                         const CoefficientSet& c) {
    check_metric(grid, metric);
    ScalarField h(grid);
    for (int a = 0; a < grid.dims(); ++a) {
        const double g = metric.g(a);
        for (std::size_t i = 0; i < h.size(); ++i) {
            const double q = gr.dq[a][i];
            const double s = gr.dS[a][i];
            double t = c.A * s * s + c.B * q * q;
            for (const auto& [an, bn] : c.pairs) {
                const double u = q + an * s;
                t += bn * u * u;
            }
            h[i] += g * t;
        }
    }
    return h;
}

ScalarField reduced_from(const Grid& grid, const Grads& gr, const ConfigMetric& metric,
                         const ReducedCoefficients& c) {
    check_metric(grid, metric);
    ScalarField h(grid);
    for (int a = 0; a < grid.dims(); ++a) {
        const double g = metric.g(a);
        for (std::size_t i = 0; i < h.size(); ++i) {
            const double q = gr.dq[a][i];
            const double s = gr.dS[a][i];
            h[i] += g * (c.Abar * s * s + c.Bbar * q * q + c.C * q * s);
        }
    }
    return h;
}

ScalarField qp_from(const Grid& grid, const std::vector<double>& logp, const ConfigMetric& metric,
                    double hbar) {
    check_metric(grid, metric);
    const ScalarField q(grid, logp);
    ScalarField Q(grid);
    for (int a = 0; a < grid.dims(); ++a) {
        const auto d1 = gradient(q, a);
        const auto d2 = second_derivative(q, a);
        const double g = metric.g(a);
        for (std::size_t i = 0; i < Q.size(); ++i) Q[i] -= g * (d1[i] * d1[i] + 2.0 * d2[i]);
    }
    for (auto& x : Q.v) x *= hbar * hbar / 8.0;
    return Q;
}

}  // namespace

EnsembleState EnsembleState::from_log(const Grid& grid, std::vector<double> logp,
                                      std::vector<double> phase, std::vector<double> drift) {
    if (logp.size() != grid.size() || phase.size() != grid.size())
        throw std::invalid_argument("state: field sizes do not match grid");
    if (drift.empty()) drift.assign(grid.dims(), 0.0);
    if (static_cast<int>(drift.size()) != grid.dims()) throw std::invalid_argument("state: drift rank");
    for (double s : phase)
        if (!std::isfinite(s)) throw std::invalid_argument("state: non-finite phase");
    check_floor(logp);
    const double peak = *std::max_element(logp.begin(), logp.end());
    double mass = 0.0;
    for (double q : logp) mass += std::exp(q - peak);
    const double shift = peak + std::log(mass * grid.cell_volume());
    for (auto& q : logp) q -= shift;
    EnsembleState s;
    s.grid_ = grid;
    s.logp_ = std::move(logp);
    s.phase_ = std::move(phase);
    s.drift_ = std::move(drift);
    return s;
}

EnsembleState EnsembleState::from_density(const ScalarField& p, const ScalarField& S,
                                          std::vector<double> drift) {
    if (p.grid != S.grid) throw std::invalid_argument("state: p and S on different grids");
    return from_log(p.grid, log_of(p), S.v, std::move(drift));
}

ScalarField EnsembleState::p() const {
    ScalarField out(grid_);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(logp_[i]);
    return out;
}

ScalarField EnsembleState::S() const {
    ScalarField out(grid_, phase_);
    for (std::size_t i = 0; i < out.size(); ++i)
        for (int a = 0; a < grid_.dims(); ++a) out[i] += drift_[a] * grid_.coord(a, i);
    return out;
}

ScalarField EnsembleState::logp_gradient(int axis) const { return gradient(log_density(), axis); }

ScalarField EnsembleState::phase_gradient(int axis) const {
    auto d = gradient(periodic_phase(), axis);
    for (auto& x : d.v) x += drift_[axis];
    return d;
}

void CoefficientSet::validate() const {
    if (!(A >= 0.0) || !(B >= 0.0)) throw std::invalid_argument("coefficients: A and B must be >= 0");
    for (const auto& [a, b] : pairs) {
        if (a == 0.0 || !std::isfinite(a)) throw std::invalid_argument("coefficients: a_n must be nonzero");
        if (!(b >= 0.0)) throw std::invalid_argument("coefficients: b_n must be >= 0");
    }
}

void ReducedCoefficients::validate() const {
    if (!(Abar >= 0.0) || !(Bbar >= 0.0) || !std::isfinite(C))
        throw std::invalid_argument("reduced coefficients: Abar and Bbar must be >= 0");
}

ReducedCoefficients reduce(const CoefficientSet& c) {
    c.validate();
    ReducedCoefficients r{c.A, c.B, 0.0};
    for (const auto& [a, b] : c.pairs) {
        r.Abar += b * a * a;
        r.Bbar += b;
        r.C += 2.0 * a * b;
    }
    return r;
}

ScalarField h_general(const EnsembleState& s, const ConfigMetric& metric, const CoefficientSet& c) {
    return general_from(s.grid(), grads_of(s), metric, c);
}

ScalarField h_general(const ScalarField& p, const ScalarField& S, const ConfigMetric& metric,
                      const CoefficientSet& c) {
    return general_from(p.grid, grads_of(p, S), metric, c);
}

ScalarField h_diagonal(const EnsembleState& s, const ConfigMetric& metric, double Abar, double Bbar) {
    return general_from(s.grid(), grads_of(s), metric, {Abar, Bbar, {}});
}

ScalarField h_diagonal(const ScalarField& p, const ScalarField& S, const ConfigMetric& metric,
                       double Abar, double Bbar) {
    return general_from(p.grid, grads_of(p, S), metric, {Abar, Bbar, {}});
}

ScalarField h_reduced(const EnsembleState& s, const ConfigMetric& metric, const ReducedCoefficients& c) {
    return reduced_from(s.grid(), grads_of(s), metric, c);
}

ScalarField h_higher_derivative(const ScalarField& p, const ConfigMetric& metric, double eta) {
    check_metric(p.grid, metric);
    const ScalarField q(p.grid, log_of(p));
    std::vector<ScalarField> dq;
    ScalarField f(p.grid);
    for (int a = 0; a < p.grid.dims(); ++a) {
        dq.push_back(gradient(q, a));
        for (std::size_t i = 0; i < f.size(); ++i) f[i] += metric.g(a) * dq[a][i] * dq[a][i];
    }
    ScalarField h(p.grid);
    for (int a = 0; a < p.grid.dims(); ++a) {
        const auto df = gradient(f, a);
        for (std::size_t i = 0; i < h.size(); ++i) {
            const double u = dq[a][i] + eta * df[i];
            h[i] += metric.g(a) * u * u;
        }
    }
    return h;
}

ScalarField h_counterexample_universality(const ScalarField& p, const Grid& grid) {
    if (grid.dims() < 2) throw std::invalid_argument("counterexample density needs at least two axes");
    ScalarField m(grid, log_of(p));
    for (int a = 0; a < grid.dims(); ++a) m = gradient(m, a);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] /= p[i];
    return m;
}

ScalarField quantum_potential(const ScalarField& p, const ConfigMetric& metric, double hbar) {
    return qp_from(p.grid, log_of(p), metric, hbar);
}

ScalarField quantum_potential(const EnsembleState& s, const ConfigMetric& metric, double hbar) {
    return qp_from(s.grid(), s.logp(), metric, hbar);
}

std::vector<ScalarField> current(const EnsembleState& s, const ConfigMetric& metric) {
    check_metric(s.grid(), metric);
    const auto p = s.p();
    std::vector<ScalarField> J;
    for (int a = 0; a < s.grid().dims(); ++a) {
        auto j = s.phase_gradient(a);
        for (std::size_t i = 0; i < j.size(); ++i) j[i] *= metric.g(a) * p[i];
        J.push_back(std::move(j));
    }
    return J;
}

std::vector<ScalarField> current(const ComplexField& psi, const ConfigMetric& metric, double hbar) {
    check_metric(psi.grid, metric);
    std::vector<ScalarField> J;
    for (int a = 0; a < psi.grid.dims(); ++a) {
        const auto d = gradient(psi, a);
        ScalarField j(psi.grid);
        for (std::size_t i = 0; i < j.size(); ++i)
            j[i] = hbar * metric.g(a) * (std::conj(psi[i]) * d[i]).imag();
        J.push_back(std::move(j));
    }
    return J;
}

CurrentTerms current_terms(const EnsembleState& s, const ConfigMetric& metric) {
    const auto J = current(s, metric);
    const auto p = s.p();
    CurrentTerms t{ScalarField(s.grid()), ScalarField(s.grid())};
    for (int a = 0; a < s.grid().dims(); ++a) {
        const auto dJ = gradient(J[a], a);
        const auto dq = s.logp_gradient(a);
        for (std::size_t i = 0; i < p.size(); ++i) {
            t.R1[i] += dJ[i] / p[i];
            t.R4[i] += dq[i] * J[a][i] / p[i];
        }
    }
    return t;
}

ScalarField f_nonlinearity(const EnsembleState& s, const ConfigMetric& metric, double C) {
    if (C == 0.0) return ScalarField(s.grid());
    const auto t = current_terms(s, metric);
    ScalarField F(s.grid());
    for (std::size_t i = 0; i < F.size(); ++i) F[i] = C * (t.R4[i] - t.R1[i]);
    return F;
}

}  // namespace enslab

#include "enslab/audit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "enslab/errors.hpp"

namespace enslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Random positive density and phase for audit trials.
std::pair<ScalarField, ScalarField> random_state(const Grid& g, std::uint64_t seed) {
    auto p = random_smooth_field(g, seed, 3, 0.1);
    auto S = random_smooth_field(g, seed ^ 0x9e3779b97f4a7c15ULL, 3);
    for (auto& x : S.v) x *= 1.5;
    return {std::move(p), std::move(S)};
}

double weighted_total(const ScalarField& p, const ScalarField& h) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * h[i];
    return s * p.grid.cell_volume();
}

double sup_abs(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

ScalarField normalized(ScalarField p) {
    const double m = integrate(p);
    for (auto& x : p.v) x /= m;
    return p;
}

AuditReport make_report(const char* axiom, const Density& d, int trials, double tol) {
    AuditReport r;
    r.axiom = axiom;
    r.density = d.name;
    r.trials = trials;
    r.tolerance = tol;
    return r;
}

}  // namespace

Density density_h_diagonal(double Abar, double Bbar) {
    return {"h_diagonal", [=](const ScalarField& p, const ScalarField& S, const ConfigMetric& m) {
                return h_diagonal(p, S, m, Abar, Bbar);
            }};
}

Density density_h_general(const CoefficientSet& c) {
    c.validate();
    return {"h_general",
            [=](const ScalarField& p, const ScalarField& S, const ConfigMetric& m) { return h_general(p, S, m, c); }};
}

Density density_h_higher_derivative(double eta) {
    return {"h_higher_derivative", [=](const ScalarField& p, const ScalarField&, const ConfigMetric& m) {
                return h_higher_derivative(p, m, eta);
            }};
}

Density density_counterexample() {
    return {"h_counterexample_universality", [](const ScalarField& p, const ScalarField&, const ConfigMetric&) {
                if (p.grid.dims() >= 2) return h_counterexample_universality(p, p.grid);
                ScalarField q(p.grid);
                for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::log(p[i]);
                auto d = gradient(q, 0);
                for (std::size_t i = 0; i < d.size(); ++i) d[i] /= p[i];
                return d;
            }};
}

Density density_linear_phase() {
    return {"h_linear_phase", [](const ScalarField&, const ScalarField& S, const ConfigMetric&) { return S; }};
}

Density density_anisotropic_probe() {
    return {"h_anisotropic_probe", [](const ScalarField& p, const ScalarField& S, const ConfigMetric& m) {
                std::vector<double> masses;
                for (int a = 0; a < m.dims(); ++a) masses.push_back(a == 0 ? 1.0 : 3.0);
                return h_diagonal(p, S, ConfigMetric(1, masses), 0.5, 0.125);
            }};
}

std::vector<Density> default_catalog() {
    return {density_h_diagonal(),
            density_h_general({0.3, 0.1, {{1.0, 0.2}, {-0.5, 0.3}}}),
            density_h_higher_derivative(0.5),
            density_counterexample(),
            density_linear_phase(),
            density_anisotropic_probe()};
}

AuditReport audit_scale_invariance(const Density& d, int trials, const std::vector<double>& lambdas,
                                   std::uint64_t seed, double tol) {
    const Grid g({kTwoPi, kTwoPi}, {32, 32});
    const ConfigMetric metric(1, {1.0, 2.0});
    auto rep = make_report("scale_invariance", d, trials, tol);
    for (double lam : lambdas) {
        if (!(lam > 0.0)) throw std::invalid_argument("scale audit: lambda must be positive");
        rep.per_lambda.push_back({lam, 0.0});
    }
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
        rep.seeds.push_back(s);
        const auto [p, S] = random_state(g, s);
        const auto h0 = d.eval(p, S, metric);
        const double scale = std::max(sup_abs(h0), 1e-300);
        for (std::size_t k = 0; k < lambdas.size(); ++k) {
            ScalarField lp = p;
            for (auto& x : lp.v) x *= lambdas[k];
            const auto h1 = d.eval(lp, S, metric);
            double dev = 0.0;
            for (std::size_t i = 0; i < h0.size(); ++i) dev = std::max(dev, std::abs(h1[i] - h0[i]));
            rep.max_abs = std::max(rep.max_abs, dev);
            rep.max_rel = std::max(rep.max_rel, dev / scale);
            rep.per_lambda[k].second = std::max(rep.per_lambda[k].second, dev / scale);
        }
    }
    rep.pass = rep.max_rel < tol;
    return rep;
}

AuditReport audit_separability(const Density& d, int trials, std::uint64_t seed, double tol) {
    const double m1 = 1.0, m2 = 3.0;
    const Grid g1({kTwoPi}, {64});
    const Grid g2({kTwoPi, kTwoPi}, {64, 64});
    const ConfigMetric metric1(1, {m1}), metric2(1, {m2}), metric12(1, {m1, m2});
    auto rep = make_report("separability", d, trials, tol);
    bool degenerate = true;
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t s = seed + 2 * static_cast<std::uint64_t>(t);
        rep.seeds.push_back(s);
        auto [p1, S1] = random_state(g1, s);
        auto [p2, S2] = random_state(g1, s + 1);
        p1 = normalized(p1);
        p2 = normalized(p2);
        ScalarField p(g2), S(g2);
        for (std::size_t i = 0; i < g2.size(); ++i) {
            const int a = g2.index(0, i), b = g2.index(1, i);
            p[i] = p1[a] * p2[b];
            S[i] = S1[a] + S2[b];
        }
        const double joint = weighted_total(p, d.eval(p, S, metric12));
        const double parts = weighted_total(p1, d.eval(p1, S1, metric1)) + weighted_total(p2, d.eval(p2, S2, metric2));
        const double dev = std::abs(joint - parts);
        const double scale = std::max(std::abs(joint), std::abs(parts));
        if (scale > 1e-12) degenerate = false;
        rep.max_abs = std::max(rep.max_abs, dev);
        rep.max_rel = std::max(rep.max_rel, scale > 1e-12 ? dev / scale : dev);
    }
    rep.pass = rep.max_rel < tol;
    if (degenerate && rep.pass)
        rep.note = "degenerate PASS: density integrates to zero on product states; see scale audit";
    return rep;
}

AuditReport audit_positivity(const Density& d, int trials, std::uint64_t seed, double tol) {
    const Grid g({kTwoPi, kTwoPi}, {32, 32});
    const ConfigMetric metric(1, {1.0, 2.0});
    auto rep = make_report("positivity", d, trials, tol);
    double worst_rel = 0.0;
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
        rep.seeds.push_back(s);
        const auto [p, S] = random_state(g, s);
        const auto h = d.eval(p, S, metric);
        const double scale = std::max(sup_abs(h), 1e-300);
        const double neg = std::max(0.0, -h.min());
        rep.max_abs = std::max(rep.max_abs, neg);
        worst_rel = std::max(worst_rel, neg / scale);
    }
    rep.max_rel = worst_rel;
    rep.pass = worst_rel <= tol;
    return rep;
}

AuditReport audit_rotation(const Density& d, int trials, std::uint64_t seed, double tol) {
    const int n = 32;
    const Grid g({kTwoPi, kTwoPi}, {n, n});
    const ConfigMetric metric(2, {1.0});
    auto rep = make_report("rotation", d, trials, tol);
    // f'(x, y) = f(y, -x): index (i, j) reads (j, -i mod n).
    auto rotate = [&](const ScalarField& f) {
        ScalarField r(g);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r[i * n + j] = f[j * n + (n - i) % n];
        return r;
    };
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
        rep.seeds.push_back(s);
        const auto [p, S] = random_state(g, s);
        const auto pr = rotate(p);
        const auto Sr = rotate(S);
        const double before = weighted_total(p, d.eval(p, S, metric));
        const double after = weighted_total(pr, d.eval(pr, Sr, metric));
        const double dev = std::abs(after - before);
        rep.max_abs = std::max(rep.max_abs, dev);
        rep.max_rel = std::max(rep.max_rel, dev / std::max(std::abs(before), 1e-300));
    }
    rep.pass = rep.max_rel < tol;
    return rep;
}

GaugeResult gauge_residual(const EnsembleState& s, const ConfigMetric& metric, double hbar, double C) {
    if (C == 0.0) throw std::invalid_argument("gauge check needs C != 0");
    const auto F = f_nonlinearity(s, metric, C);
    const auto Q = quantum_potential(s, metric, hbar);
    const auto p = s.p();
    double ff = 0.0, qq = 0.0, fq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        ff += p[i] * F[i] * F[i];
        qq += p[i] * Q[i] * Q[i];
        fq += p[i] * F[i] * Q[i];
    }
    const double dv = s.grid().cell_volume();
    GaugeResult r;
    r.normF = std::sqrt(ff * dv);
    r.normQ = std::sqrt(qq * dv);
    if (r.normF < 1e-12 || r.normQ < 1e-12)
        throw DegenerateState("gauge check: F or Q vanishes on this state");
    r.kappa = fq / qq;
    double res = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double e = F[i] - r.kappa * Q[i];
        res += p[i] * e * e;
    }
    r.residual = std::sqrt(res / ff);
    return r;
}

GaugeReport gauge_inequivalence_check(const std::vector<EnsembleState>& states, const ConfigMetric& metric,
                                      double hbar, double C, double threshold) {
    GaugeReport rep;
    for (const auto& s : states) {
        try {
            rep.results.push_back(gauge_residual(s, metric, hbar, C));
            if (rep.results.back().residual > threshold) ++rep.above_threshold;
        } catch (const DegenerateState&) {
            ++rep.degenerate;
        }
    }
    if (rep.results.empty()) throw DegenerateState("gauge check: every state is degenerate");
    rep.inequivalent = 2 * rep.above_threshold > static_cast<int>(rep.results.size());
    return rep;
}

}  // namespace enslab

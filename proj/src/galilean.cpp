#include "enslab/galilean.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "enslab/errors.hpp"

namespace enslab {

namespace {

double axis_velocity(const BoostSpec& b, const ConfigMetric& metric, int axis) {
    if (static_cast<int>(b.u.size()) != metric.particle_dim())
        throw std::invalid_argument("boost: velocity must have one component per particle dimension");
    return b.u[axis % metric.particle_dim()];
}

std::vector<long> node_shifts(const Grid& g, const BoostSpec& b, const ConfigMetric& metric, double t) {
    std::vector<long> shift(g.dims());
    for (int a = 0; a < g.dims(); ++a) {
        const double cells = axis_velocity(b, metric, a) * t / g.dx(a);
        const double r = std::nearbyint(cells);
        if (std::abs(cells - r) > 1e-9 * std::max(1.0, std::abs(cells)))
            throw IncommensurateBoost("boost: u t = " + std::to_string(cells) + " grid spacings on axis " +
                                      std::to_string(a));
        shift[a] = static_cast<long>(r);
    }
    return shift;
}

}  // namespace

EnsembleState boost_state(const EnsembleState& s, const BoostSpec& boost, double t,
                          const ConfigMetric& metric) {
    const Grid& g = s.grid();
    if (metric.dims() != g.dims()) throw std::invalid_argument("metric rank does not match grid");
    const auto shift = node_shifts(g, boost, metric, t);

    std::vector<double> q(g.size()), sigma(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        // Source node x = x' + u t.
        std::size_t src = 0;
        for (int a = 0; a < g.dims(); ++a) {
            const long n = g.count(a);
            long j = (g.index(a, i) + shift[a]) % n;
            if (j < 0) j += n;
            src += static_cast<std::size_t>(j) * g.stride(a);
        }
        q[i] = s.logp()[src];
        sigma[i] = s.phase()[src];
    }

    std::vector<double> drift = s.drift();
    double offset = boost.phi;
    for (int a = 0; a < g.dims(); ++a) {
        const double u = axis_velocity(boost, metric, a);
        const double m = metric.g_inv(a);
        offset += drift[a] * u * t - 0.5 * m * u * u * t;
        drift[a] -= m * u;
    }
    for (auto& x : sigma) x += offset;
    return EnsembleState::from_log(g, std::move(q), std::move(sigma), std::move(drift));
}

std::vector<double> mean_velocity(const EnsembleState& s, const ConfigMetric& metric) {
    const auto p = s.p();
    std::vector<double> v;
    for (int a = 0; a < s.grid().dims(); ++a) {
        const auto dS = s.phase_gradient(a);
        double acc = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * dS[i];
        v.push_back(acc * s.grid().cell_volume() * metric.g(a));
    }
    return v;
}

BoostReport boost_commutation_test(const EnsembleState& s0, const BoostSpec& boost,
                                   const EvolutionParams& params, double T, double tolerance) {
    if (params.coef.Abar != 0.5) throw std::invalid_argument("boost rule assumes Abar = 1/2");
    node_shifts(s0.grid(), boost, params.metric, T);
    EvolutionParams p = params;
    p.t_end = T;
    p.snapshot_times.clear();
    p.stride = std::max<long>(1, p.steps());

    const auto a = boost_state(evolve_madelung(s0, p).state, boost, T, params.metric);
    const auto b = evolve_madelung(boost_state(s0, boost, 0.0, params.metric), p).state;

    BoostReport rep;
    rep.tolerance = tolerance;
    const auto pa = a.p();
    const auto pb = b.p();
    const auto Sa = a.S();
    const auto Sb = b.S();
    double shift = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        rep.p_discrepancy = std::max(rep.p_discrepancy, std::abs(pa[i] - pb[i]));
        shift += pb[i] * (Sa[i] - Sb[i]);
    }
    shift *= s0.grid().cell_volume();
    for (std::size_t i = 0; i < pa.size(); ++i)
        rep.S_discrepancy = std::max(rep.S_discrepancy, std::abs(Sa[i] - Sb[i] - shift));
    rep.pass = rep.p_discrepancy < tolerance && rep.S_discrepancy < tolerance;
    return rep;
}

}  // namespace enslab

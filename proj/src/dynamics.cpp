#include "enslab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "enslab/errors.hpp"
#include "enslab/madelung.hpp"

namespace enslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Wavenumber of every node along every axis, flattened.
std::vector<std::vector<double>> node_wavenumbers(const Grid& g) {
    std::vector<std::vector<double>> out(g.dims(), std::vector<double>(g.size()));
    for (int a = 0; a < g.dims(); ++a) {
        const auto k = g.wavenumbers(a);
        for (std::size_t i = 0; i < g.size(); ++i) out[a][i] = k[g.index(a, i)];
    }
    return out;
}

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double omega_of(const HarmonicPotential& h, const ConfigMetric& metric, int axis) {
    const int k = metric.particle_of(axis);
    if (h.omega.size() == 1) return h.omega[0];
    if (static_cast<int>(h.omega.size()) != metric.particles())
        throw std::invalid_argument("harmonic potential: one omega per particle required");
    return h.omega[k];
}

}  // namespace

double harmonic_sigma(const HarmonicPotential& h, const ConfigMetric& metric, double hbar, int axis) {
    const double w = omega_of(h, metric, axis);
    if (!(w > 0.0)) throw std::invalid_argument("harmonic potential: omega must be positive");
    return std::sqrt(hbar / (2.0 * metric.mass(axis) * w));
}

Window harmonic_window(const HarmonicPotential& h, const Grid& grid, const ConfigMetric& metric,
                       double hbar, int axis) {
    const Window w = window_for_depth(harmonic_sigma(h, metric, hbar, axis), h.depth, h.ratio, grid.dx(axis));
    if (w.outer() + 4.0 * w.delta > 0.5 * grid.length(axis))
        throw std::invalid_argument("harmonic potential: trap window does not fit in the box");
    return w;
}

ScalarField potential_field(const PotentialSpec& spec, const Grid& grid, const ConfigMetric& metric,
                            double hbar) {
    if (metric.dims() != grid.dims()) throw std::invalid_argument("metric rank does not match grid");
    return std::visit(
        overloaded{
            [&](const ZeroPotential&) { return ScalarField(grid); },
            [&](const HarmonicPotential& h) {
                ScalarField V(grid);
                for (int a = 0; a < grid.dims(); ++a) {
                    const Window w = harmonic_window(h, grid, metric, hbar, a);
                    const double om = omega_of(h, metric, a);
                    const double m = metric.mass(a);
                    for (std::size_t i = 0; i < V.size(); ++i) {
                        const double d = wrap_displacement(grid.coord(a, i), grid.midpoint(a), grid.length(a));
                        const double l = w.lin(d);
                        V[i] += 0.5 * m * om * om * l * l + 0.5 * hbar * om * (1.0 - w.slope(d));
                    }
                }
                return V;
            },
            [&](const TabulatedPotential& t) {
                if (t.values.grid != grid) throw std::invalid_argument("tabulated potential: grid mismatch");
                if (!t.values.finite()) throw std::invalid_argument("tabulated potential: non-finite values");
                return t.values;
            }},
        spec);
}

void EvolutionParams::validate(const Grid& grid) const {
    if (metric.dims() != grid.dims()) throw std::invalid_argument("metric rank does not match grid");
    coef.validate();
    if (!(hbar > 0.0)) throw std::invalid_argument("hbar must be positive");
    if (!(dt > 0.0) || !(t_end >= dt)) throw std::invalid_argument("need dt > 0 and t_end >= dt");
    if (stride < 1) throw std::invalid_argument("observable stride must be >= 1");
    double dx_min = grid.dx(0);
    double m_min = metric.mass(0);
    for (int a = 1; a < grid.dims(); ++a) {
        dx_min = std::min(dx_min, grid.dx(a));
        m_min = std::min(m_min, metric.mass(a));
    }
    const double limit = dx_min * dx_min * m_min / (kTwoPi * hbar);
    if (!(dt < limit))
        throw std::invalid_argument("dt = " + std::to_string(dt) + " violates the kinetic phase guard dt < " +
                                    std::to_string(limit));
}

long EvolutionParams::steps() const { return std::lround(t_end / dt); }

double ObservableSeries::energy_drift() const {
    if (rows.empty()) return 0.0;
    const double H0 = rows.front().energy;
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, std::abs(r.energy - H0));
    return worst / (std::abs(H0) + energy_scale);
}

double ObservableSeries::norm_drift() const {
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, std::abs(r.norm - 1.0));
    return worst;
}

ObservableRow observe_density(const Grid& grid, const std::vector<double>& p, double t, double norm,
                              double energy) {
    ObservableRow row;
    row.t = t;
    row.norm = norm;
    row.energy = energy;
    row.min_p = *std::min_element(p.begin(), p.end());
    const double mass = integrate(grid, p);
    for (int a = 0; a < grid.dims(); ++a) {
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double x = grid.coord(a, i);
            m1 += p[i] * x;
            m2 += p[i] * x * x;
        }
        m1 *= grid.cell_volume() / mass;
        m2 *= grid.cell_volume() / mass;
        row.mean.push_back(m1);
        row.var.push_back(m2 - m1 * m1);
    }
    return row;
}

Rates eom_rhs(const EnsembleState& s, const EvolutionParams& params) {
    return eom_rhs(s, params, potential_field(params.potential, s.grid(), params.metric, params.hbar));
}

Rates eom_rhs(const EnsembleState& s, const EvolutionParams& params, const ScalarField& V) {
    const Grid& g = s.grid();
    const auto& c = params.coef;
    const auto p = s.p();
    Rates r{ScalarField(g), ScalarField(g)};
    for (int a = 0; a < g.dims(); ++a) {
        const double ga = params.metric.g(a);
        const auto dS = s.phase_gradient(a);
        const auto d2S = second_derivative(s.periodic_phase(), a);
        const auto dp = gradient(p, a);
        const auto d2p = second_derivative(p, a);
        ScalarField flux(g);
        for (std::size_t i = 0; i < flux.size(); ++i) flux[i] = p[i] * dS[i];
        const auto dflux = gradient(flux, a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            r.dp[i] -= ga * (2.0 * c.Abar * dflux[i] + c.C * d2p[i]);
            const double u = dp[i] / p[i];
            r.dS[i] -= ga * (c.Abar * dS[i] * dS[i] + c.Bbar * (u * u - 2.0 * d2p[i] / p[i]) - c.C * d2S[i]);
        }
    }
    for (std::size_t i = 0; i < g.size(); ++i) r.dS[i] -= V[i];
    return r;
}

double energy(const EnsembleState& s, const EvolutionParams& params, const ScalarField& V) {
    const auto h = h_reduced(s, params.metric, params.coef);
    double e = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) e += std::exp(s.logp()[i]) * (h[i] + V[i]);
    return e * s.grid().cell_volume();
}

double energy(const EnsembleState& s, const EvolutionParams& params) {
    return energy(s, params, potential_field(params.potential, s.grid(), params.metric, params.hbar));
}

double energy_wavefunction(const ComplexField& psi, const ConfigMetric& metric, double hbar,
                           const ScalarField& V) {
    const Grid& g = psi.grid;
    const auto k = node_wavenumbers(g);
    std::vector<cplx> spec = psi.v;
    fft_forward(g, spec);
    double kin = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        double k2 = 0.0;
        for (int a = 0; a < g.dims(); ++a) k2 += metric.g(a) * k[a][i] * k[a][i];
        kin += std::norm(spec[i]) * k2;
    }
    kin *= 0.5 * hbar * hbar * g.cell_volume() / static_cast<double>(g.size());
    double pot = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) pot += V[i] * std::norm(psi[i]);
    return kin + pot * g.cell_volume();
}

namespace {

// Discrete H as a function of (p, periodic phase) with derivatives of p taken
// directly, matching the p-form of eom_rhs.
double discrete_H(const ScalarField& p, const ScalarField& phase, const std::vector<double>& drift,
                  const EvolutionParams& params, const ScalarField& V) {
    const Grid& g = p.grid;
    const auto& c = params.coef;
    double e = 0.0;
    std::vector<double> dens(g.size(), 0.0);
    for (int a = 0; a < g.dims(); ++a) {
        const double ga = params.metric.g(a);
        const auto dp = gradient(p, a);
        const auto dS = gradient(phase, a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double s = dS[i] + drift[a];
            const double u = dp[i] / p[i];
            dens[i] += ga * (c.Abar * s * s + c.Bbar * u * u + c.C * u * s);
        }
    }
    for (std::size_t i = 0; i < g.size(); ++i) e += p[i] * (dens[i] + V[i]);
    return e * g.cell_volume();
}

double l2(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.v) s += x * x;
    return std::sqrt(s * f.grid.cell_volume());
}

double inner(const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * a.grid.cell_volume();
}

}  // namespace

FdReport functional_derivative_check(const EnsembleState& s, const EvolutionParams& params,
                                     int probe_count, double eps, std::uint64_t seed, const RhsFn& rhs) {
    if (!(eps >= 1e-7 && eps <= 1e-3)) throw std::invalid_argument("eps must lie in [1e-7, 1e-3]");
    const Grid& g = s.grid();
    const auto V = potential_field(params.potential, g, params.metric, params.hbar);
    const Rates rates = rhs ? rhs(s, params) : eom_rhs(s, params, V);
    const auto p = s.p();
    const auto phase = s.periodic_phase();
    int band = g.count(0) / 2 - 1;
    for (int a = 1; a < g.dims(); ++a) band = std::min(band, g.count(a) / 2 - 1);
    band = std::min(band, 4);

    FdReport rep;
    rep.probes = probe_count;
    for (int k = 0; k < probe_count; ++k) {
        const auto eta = random_smooth_field(g, seed + 7919ULL * static_cast<std::uint64_t>(k), band);

        ScalarField plus = phase, minus = phase;
        for (std::size_t i = 0; i < g.size(); ++i) {
            plus[i] += eps * eta[i];
            minus[i] -= eps * eta[i];
        }
        const double fdS = (discrete_H(p, plus, s.drift(), params, V) -
                            discrete_H(p, minus, s.drift(), params, V)) / (2.0 * eps);
        const double predS = inner(rates.dp, eta);
        const double mS = std::abs(fdS - predS) / (l2(rates.dp) * l2(eta));

        // Mass-preserving density probe.
        double w = inner(p, eta) / integrate(p);
        ScalarField etap(g);
        for (std::size_t i = 0; i < g.size(); ++i) etap[i] = p[i] * (eta[i] - w);
        ScalarField pp = p, pm = p;
        for (std::size_t i = 0; i < g.size(); ++i) {
            pp[i] += eps * etap[i];
            pm[i] -= eps * etap[i];
        }
        const double fdP = (discrete_H(pp, phase, s.drift(), params, V) -
                            discrete_H(pm, phase, s.drift(), params, V)) / (2.0 * eps);
        const double predP = -inner(rates.dS, etap);
        // Constant parts of dS/dt do not couple to mass-preserving probes.
        ScalarField dS0 = rates.dS;
        const double mean = integrate(dS0) / integrate(ScalarField(g, 1.0));
        for (auto& x : dS0.v) x -= mean;
        const double mP = std::abs(fdP - predP) / (l2(dS0) * l2(etap));

        rep.max_mismatch_S = std::max(rep.max_mismatch_S, mS);
        rep.max_mismatch_p = std::max(rep.max_mismatch_p, mP);
    }
    rep.max_mismatch = std::max(rep.max_mismatch_S, rep.max_mismatch_p);
    return rep;
}

MadelungStepper::MadelungStepper(const EnsembleState& s, const EvolutionParams& params)
    : state_(s), params_(params) {
    params_.validate(s.grid());
    const auto& c = params_.coef;
    if (!(c.Abar > 0.0)) throw std::invalid_argument("Madelung evolution needs Abar > 0");
    V_ = potential_field(params_.potential, s.grid(), params_.metric, params_.hbar);
    mu_ = c.C / (2.0 * c.Abar);
    Btilde_ = c.Bbar - c.C * c.C / (4.0 * c.Abar);
    if (Btilde_ > 0.0) {
        beta_ = 2.0 * std::sqrt(Btilde_ / c.Abar);
        const Grid& g = s.grid();
        const auto k = node_wavenumbers(g);
        mult_.assign(g.size(), 0.0);
        for (std::size_t i = 0; i < g.size(); ++i)
            for (int a = 0; a < g.dims(); ++a) {
                const double kk = k[a][i] + s.drift()[a] / beta_;
                mult_[i] -= params_.metric.g(a) * kk * kk;
            }
    }
}

void MadelungStepper::rhs(const std::vector<double>& q, const std::vector<double>& sigma,
                          std::vector<double>& dq, std::vector<double>& dsigma) const {
    if (Btilde_ > 0.0)
        rhs_similarity(q, sigma, dq, dsigma);
    else
        rhs_direct(q, sigma, dq, dsigma);
}

// With S~ = S + mu q the equations take the C = 0 form with Btilde; they are
// evaluated through phi = exp(q/2 + i S~/beta) and Z = g D^2 phi / phi.
void MadelungStepper::rhs_similarity(const std::vector<double>& q, const std::vector<double>& sigma,
                                     std::vector<double>& dq, std::vector<double>& dsigma) const {
    const Grid& g = state_.grid();
    const double A = params_.coef.Abar;
    const double qmax = *std::max_element(q.begin(), q.end());
    std::vector<cplx> phi(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        phi[i] = std::polar(std::exp(0.5 * (q[i] - qmax)), (sigma[i] + mu_ * q[i]) / beta_);
    std::vector<cplx> d2 = phi;
    fft_forward(g, d2);
    for (std::size_t i = 0; i < g.size(); ++i) d2[i] *= mult_[i];
    fft_backward(g, d2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx Z = d2[i] / phi[i];
        dq[i] = -2.0 * A * beta_ * Z.imag();
        const double dSt = A * beta_ * beta_ * Z.real() - V_[i];
        dsigma[i] = dSt - mu_ * dq[i];
    }
}

void MadelungStepper::rhs_direct(const std::vector<double>& q, const std::vector<double>& sigma,
                                 std::vector<double>& dq, std::vector<double>& dsigma) const {
    const Grid& g = state_.grid();
    const double A = params_.coef.Abar;
    ScalarField qf(g, q), st(g);
    for (std::size_t i = 0; i < g.size(); ++i) st[i] = sigma[i] + mu_ * q[i];
    std::vector<double> dSt(g.size(), 0.0);
    std::fill(dq.begin(), dq.end(), 0.0);
    for (int a = 0; a < g.dims(); ++a) {
        const double ga = params_.metric.g(a);
        const auto q1 = gradient(qf, a);
        const auto q2 = second_derivative(qf, a);
        const auto s1 = gradient(st, a);
        const auto s2 = second_derivative(st, a);
        const double kap = state_.drift()[a];
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double sx = s1[i] + kap;
            dq[i] -= 2.0 * A * ga * (s2[i] + q1[i] * sx);
            dSt[i] -= ga * (A * sx * sx - Btilde_ * (q1[i] * q1[i] + 2.0 * q2[i]));
        }
    }
    for (std::size_t i = 0; i < g.size(); ++i) dsigma[i] = dSt[i] - V_[i] - mu_ * dq[i];
}

void MadelungStepper::step() {
    const std::size_t N = state_.grid().size();
    const double dt = params_.dt;
    const auto& q0 = state_.logp();
    const auto& s0 = state_.phase();
    std::vector<double> k1q(N), k1s(N), k2q(N), k2s(N), k3q(N), k3s(N), k4q(N), k4s(N), tq(N), ts(N);
    rhs(q0, s0, k1q, k1s);
    for (std::size_t i = 0; i < N; ++i) {
        tq[i] = q0[i] + 0.5 * dt * k1q[i];
        ts[i] = s0[i] + 0.5 * dt * k1s[i];
    }
    rhs(tq, ts, k2q, k2s);
    for (std::size_t i = 0; i < N; ++i) {
        tq[i] = q0[i] + 0.5 * dt * k2q[i];
        ts[i] = s0[i] + 0.5 * dt * k2s[i];
    }
    rhs(tq, ts, k3q, k3s);
    for (std::size_t i = 0; i < N; ++i) {
        tq[i] = q0[i] + dt * k3q[i];
        ts[i] = s0[i] + dt * k3s[i];
    }
    rhs(tq, ts, k4q, k4s);
    for (std::size_t i = 0; i < N; ++i) {
        tq[i] = q0[i] + dt / 6.0 * (k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i]);
        ts[i] = s0[i] + dt / 6.0 * (k1s[i] + 2.0 * k2s[i] + 2.0 * k3s[i] + k4s[i]);
    }
    const double t_new = static_cast<double>(steps_ + 1) * dt;
    if (!all_finite(tq) || !all_finite(ts)) throw StateBlowup("non-finite state after RK4 step", t_new);
    double mass = 0.0;
    for (double q : tq) mass += std::exp(q);
    mass *= state_.grid().cell_volume();
    if (!std::isfinite(mass) || !(mass > 0.0)) throw StateBlowup("density mass not finite", t_new);
    try {
        state_ = EnsembleState::from_log(state_.grid(), std::move(tq), std::move(ts), state_.drift());
    } catch (const NodeDetected&) {
        throw StateBlowup("density fell below the nodeless floor", t_new);
    }
    last_norm_ = mass;
    drift_ += std::abs(mass - 1.0);
    ++steps_;
}

ObservableRow MadelungStepper::observe() const {
    const auto p = state_.p();
    return observe_density(state_.grid(), p.v, time(), last_norm_, energy(state_, params_, V_));
}

EnsembleState step_rk4(const EnsembleState& s, const EvolutionParams& params, double* renorm_drift) {
    MadelungStepper st(s, params);
    st.step();
    if (renorm_drift) *renorm_drift = st.renorm_drift();
    return st.state();
}

namespace {

std::vector<long> snapshot_steps(const EvolutionParams& params) {
    std::vector<long> out;
    for (double t : params.snapshot_times) out.push_back(std::lround(t / params.dt));
    return out;
}

bool wanted(const std::vector<long>& steps, long k) {
    return std::find(steps.begin(), steps.end(), k) != steps.end();
}

}  // namespace

MadelungRun evolve_madelung(const EnsembleState& s, const EvolutionParams& params) {
    MadelungStepper st(s, params);
    MadelungRun run;
    run.series.energy_scale = params.energy_scale;
    const long n = params.steps();
    const auto snaps = snapshot_steps(params);
    auto snapshot = [&] {
        run.series.snapshots.push_back(
            {st.time(), st.state().p(), st.state().S(), to_wavefunction(st.state(), params.hbar)});
    };
    run.series.rows.push_back(st.observe());
    if (wanted(snaps, 0)) snapshot();
    for (long k = 1; k <= n; ++k) {
        st.step();
        if (k % params.stride == 0 || k == n) run.series.rows.push_back(st.observe());
        if (wanted(snaps, k)) snapshot();
    }
    run.state = st.state();
    run.renorm_drift = st.renorm_drift();
    return run;
}

SplitStepper::SplitStepper(const ComplexField& phi, const ScalarField& V, const ConfigMetric& metric,
                           double dt, double Acoef, double b, std::vector<double> shift)
    : phi_(phi), V_(V), dt_(dt), A_(Acoef), b_(b) {
    const Grid& g = phi.grid;
    if (V.grid != g) throw std::invalid_argument("split-step: potential grid mismatch");
    if (shift.empty()) shift.assign(g.dims(), 0.0);
    const auto k = node_wavenumbers(g);
    k2_.assign(g.size(), 0.0);
    kinetic_.resize(g.size());
    half_potential_.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (int a = 0; a < g.dims(); ++a) {
            const double kk = k[a][i] + shift[a];
            k2_[i] += metric.g(a) * kk * kk;
        }
        kinetic_[i] = std::polar(1.0, -dt_ * A_ * b_ * k2_[i]);
        half_potential_[i] = std::polar(1.0, -0.5 * dt_ * V_[i] / b_);
    }
}

void SplitStepper::step() {
    auto& v = phi_.v;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= half_potential_[i];
    fft_forward(phi_.grid, v);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= kinetic_[i];
    fft_backward(phi_.grid, v);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= half_potential_[i];
    ++steps_;
}

double SplitStepper::energy() const {
    const Grid& g = phi_.grid;
    std::vector<cplx> spec = phi_.v;
    fft_forward(g, spec);
    double kin = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) kin += std::norm(spec[i]) * k2_[i];
    kin *= A_ * b_ * b_ * g.cell_volume() / static_cast<double>(g.size());
    double pot = 0.0;
    for (std::size_t i = 0; i < phi_.size(); ++i) pot += V_[i] * std::norm(phi_[i]);
    return kin + pot * g.cell_volume();
}

namespace {

std::vector<double> density_of(const ComplexField& f) {
    std::vector<double> p(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) p[i] = std::norm(f[i]);
    return p;
}

}  // namespace

WaveRun evolve_schrodinger_splitstep(const ComplexField& psi, const EvolutionParams& params) {
    params.validate(psi.grid);
    if (params.coef.C != 0.0) throw std::invalid_argument("split-step evolver is linear: C must be 0");
    const auto V = potential_field(params.potential, psi.grid, params.metric, params.hbar);
    SplitStepper st(psi, V, params.metric, params.dt, 0.5, params.hbar);
    WaveRun run;
    run.series.energy_scale = params.energy_scale;
    const long n = params.steps();
    const auto snaps = snapshot_steps(params);
    auto snapshot = [&] {
        const auto& f = st.field();
        Snapshot sn{st.time(), ScalarField(f.grid, density_of(f)), ScalarField(f.grid), f};
        try {
            sn.S = from_wavefunction(f, params.hbar).S();
        } catch (const NodeDetected&) {
            for (std::size_t i = 0; i < f.size(); ++i) sn.S[i] = params.hbar * std::arg(f[i]);
        }
        run.series.snapshots.push_back(std::move(sn));
    };
    auto record = [&] {
        const auto p = density_of(st.field());
        run.series.rows.push_back(
            observe_density(psi.grid, p, st.time(), integrate(psi.grid, p), st.energy()));
    };
    record();
    if (wanted(snaps, 0)) snapshot();
    for (long k = 1; k <= n; ++k) {
        st.step();
        if (!st.field().finite()) throw StateBlowup("non-finite wavefunction", st.time());
        if (k % params.stride == 0 || k == n) record();
        if (wanted(snaps, k)) snapshot();
    }
    run.psi = st.field();
    return run;
}

WaveRun evolve_nonlinear(const ComplexField& psi, const EvolutionParams& params) {
    params.validate(psi.grid);
    const auto& c = params.coef;
    if (!(c.Abar > 0.0)) throw std::invalid_argument("nonlinear evolution needs Abar > 0");
    const double mu = c.C / (2.0 * c.Abar);
    const double Bt = c.Bbar - c.C * c.C / (4.0 * c.Abar);
    if (!(Bt > 0.0))
        throw StateBlowup("C^2 >= 4 Abar Bbar: the equation has no dispersive part and is ill-posed", 0.0);
    const double beta = 2.0 * std::sqrt(Bt / c.Abar);
    const Grid& g = psi.grid;

    const EnsembleState s0 = from_wavefunction(psi, params.hbar);
    std::vector<double> shift(g.dims());
    for (int a = 0; a < g.dims(); ++a) shift[a] = s0.drift()[a] / beta;
    ComplexField phi(g);
    std::size_t ref = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double q = s0.logp()[i];
        phi[i] = std::polar(std::exp(0.5 * q), (s0.phase()[i] + mu * q) / beta);
        if (q > s0.logp()[ref]) ref = i;
    }
    double theta = (s0.phase()[ref] + mu * s0.logp()[ref]) / beta;

    const auto V = potential_field(params.potential, g, params.metric, params.hbar);
    SplitStepper st(phi, V, params.metric, params.dt, c.Abar, beta, shift);

    // Back to (p, S) with the S~ branch fixed by the tracked reference phase.
    auto back = [&](const ComplexField& f) {
        const EnsembleState t = from_wavefunction(f, beta);
        std::vector<double> sigma = t.phase();
        const double target = beta * theta;
        const double n = std::nearbyint((target - sigma[ref]) / (kTwoPi * beta));
        std::vector<double> drift = s0.drift();
        for (int a = 0; a < g.dims(); ++a) drift[a] += t.drift()[a];
        for (std::size_t i = 0; i < sigma.size(); ++i) sigma[i] += kTwoPi * beta * n - mu * t.logp()[i];
        return EnsembleState::from_log(g, t.logp(), std::move(sigma), std::move(drift));
    };

    WaveRun run;
    run.series.energy_scale = params.energy_scale;
    const long n = params.steps();
    const auto snaps = snapshot_steps(params);
    auto record = [&] {
        const auto p = density_of(st.field());
        run.series.rows.push_back(observe_density(g, p, st.time(), integrate(g, p), st.energy()));
    };
    auto snapshot = [&] {
        const EnsembleState s = back(st.field());
        run.series.snapshots.push_back({st.time(), s.p(), s.S(), to_wavefunction(s, params.hbar)});
    };
    record();
    if (wanted(snaps, 0)) snapshot();
    double arg_prev = std::arg(st.field()[ref]);
    for (long k = 1; k <= n; ++k) {
        st.step();
        const auto& f = st.field();
        if (!f.finite()) throw StateBlowup("non-finite wavefunction", st.time());
        double peak = 0.0, low = std::numeric_limits<double>::infinity();
        for (const auto& z : f.v) {
            const double a2 = std::norm(z);
            peak = std::max(peak, a2);
            low = std::min(low, a2);
        }
        if (low < kNodelessFloor * peak) throw NodeDetected("wavefunction developed a near-node", st.time());
        const double arg_now = std::arg(f[ref]);
        double d = arg_now - arg_prev;
        d -= kTwoPi * std::nearbyint(d / kTwoPi);
        theta += d;
        arg_prev = arg_now;
        if (k % params.stride == 0 || k == n) record();
        if (wanted(snaps, k)) snapshot();
    }
    run.psi = to_wavefunction(back(st.field()), params.hbar);
    return run;
}

}  // namespace enslab

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "enslab/audit.hpp"
#include "enslab/dynamics.hpp"
#include "enslab/errors.hpp"
#include "enslab/galilean.hpp"
#include "enslab/madelung.hpp"
#include "enslab/scenario.hpp"
#include "enslab/states.hpp"

using namespace enslab;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

double sup_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

ScalarField density(const ComplexField& psi) {
    ScalarField p(psi.grid);
    for (std::size_t i = 0; i < psi.size(); ++i) p[i] = std::norm(psi[i]);
    return p;
}

// Shared trap setup: L = 16 pi, n = 512, m = hbar = omega = 1.
Grid trap_grid() { return Grid({16.0 * kPi}, {512}); }

EvolutionParams trap_params(double dt, double T) {
    EvolutionParams p;
    p.metric = ConfigMetric(1, {1.0});
    p.coef = ReducedCoefficients::quantum(1.0);
    p.hbar = 1.0;
    p.potential = HarmonicPotential{{1.0}, 10.0, 3.0};
    p.dt = dt;
    p.t_end = T;
    p.stride = 100;
    p.energy_scale = 1.0;
    return p;
}

EnsembleState trap_state(double offset) {
    GaussianSpec g;
    g.offset = {offset};
    g.sigma = {std::sqrt(0.5)};
    g.depth = 10.0;
    g.ratio = 3.0;
    return gaussian_state(trap_grid(), g, 1.0);
}

Outcome criterion1() {
    const auto s0 = trap_state(0.25);
    std::vector<double> errs;
    for (double dt : {1e-3, 5e-4}) {
        const auto params = trap_params(dt, 1.0);
        const auto mad = evolve_madelung(s0, params);
        const auto wave = evolve_schrodinger_splitstep(to_wavefunction(s0, 1.0), params);
        errs.push_back(sup_diff(mad.state.p(), density(wave.psi)));
    }
    const double ratio = errs[0] / errs[1];
    return {errs[0] < 1e-4 && ratio >= 3.5,
            "sup|p_M - p_S| = " + fmt("%.3e", errs[0]) + ", halving-dt ratio " + fmt("%.2f", ratio)};
}

Outcome criterion2() {
    const Grid g({40.0 * kPi}, {1024});
    GaussianSpec spec;
    spec.sigma = {1.0};
    EvolutionParams p;
    p.metric = ConfigMetric(1, {1.0});
    p.coef = ReducedCoefficients::quantum(1.0);
    p.dt = 1e-3;
    p.t_end = 2.0;
    p.stride = 500;
    const auto run = evolve_schrodinger_splitstep(gaussian_wavefunction(g, spec, 1.0), p);
    const double var = run.series.rows.back().var[0];
    const double t = run.series.rows.back().t;
    const double expect = 1.0 + t * t / 4.0;
    const double rel = std::abs(var - expect) / expect;
    return {rel < 1e-3, "sigma^2(2) = " + fmt("%.9f", var) + ", relative error " + fmt("%.2e", rel)};
}

Outcome criterion3() {
    const auto s0 = trap_state(0.0);
    const double T = 2.0 * kPi;
    auto params = trap_params(1e-3, T);
    const auto run = evolve_madelung(s0, params);
    const double dp = sup_diff(run.state.p(), s0.p());
    const auto rates = eom_rhs(s0, params);
    double rel_rate = 0.0;
    for (double x : rates.dS.v) rel_rate = std::max(rel_rate, std::abs(x + 0.5) / 0.5);
    // Phase advance measured from the evolution itself.
    const double t = run.series.rows.back().t;
    const auto S1 = run.state.S();
    const auto Sinit = s0.S();
    double rel_evolved = 0.0;
    for (std::size_t i = 0; i < S1.size(); ++i)
        rel_evolved = std::max(rel_evolved, std::abs((S1[i] - Sinit[i]) / t + 0.5) / 0.5);
    return {dp < 1e-6 && rel_rate < 1e-4 && rel_evolved < 1e-4,
            "sup|p(T) - p(0)| = " + fmt("%.2e", dp) + ", dS/dt rel. error " + fmt("%.2e", rel_rate) +
                " (rhs), " + fmt("%.2e", rel_evolved) + " (evolved)"};
}

Outcome criterion4() {
    const Grid g({80.0}, {800});
    const double sigma2 = 0.6, alpha = 1.0, m = 1.0;
    GaussianSpec spec;
    spec.sigma = {std::sqrt(sigma2)};
    spec.depth = 20.0;
    spec.ratio = 2.0;
    spec.alpha = {alpha};
    spec.phase_a = 13.0;
    spec.phase_ratio = 0.5;
    const auto s0 = gaussian_state(g, spec, 1.0);
    EvolutionParams p;
    p.metric = ConfigMetric(1, {m});
    p.coef = ReducedCoefficients::classical();
    p.dt = 1e-3;
    p.t_end = 1.0;
    p.stride = 1000;
    const auto run = evolve_madelung(s0, p);
    const double t = run.series.rows.back().t;
    const double s = 1.0 + alpha * t / m;
    const Window w = window_for_depth(std::sqrt(sigma2), 20.0, 2.0, g.dx(0));
    auto logp0 = [&](double x) { return -w.quad(wrap_displacement(x, 0.0, 80.0)) / sigma2; };
    double Z = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) Z += std::exp(logp0(g.coord(0, i)));
    Z *= g.dx(0);
    const auto pn = run.state.p();
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.coord(0, i);
        err = std::max(err, std::abs(pn[i] - std::exp(logp0(x / s)) / (Z * s)));
    }
    return {err < 1e-4, "sup|p - p0(x/s)/s| = " + fmt("%.3e", err)};
}

Outcome criterion5() {
    // Split-step: free packet and trapped packet.
    const Grid g({40.0 * kPi}, {1024});
    GaussianSpec spec;
    EvolutionParams fp;
    fp.metric = ConfigMetric(1, {1.0});
    fp.dt = 1e-3;
    fp.t_end = 2.0;
    fp.stride = 50;
    const auto free_run = evolve_schrodinger_splitstep(gaussian_wavefunction(g, spec, 1.0), fp);
    const double norm_split = free_run.series.norm_drift();

    const auto s0 = trap_state(0.25);
    auto params = trap_params(1e-3, 1.0);
    params.stride = 50;
    const auto split = evolve_schrodinger_splitstep(to_wavefunction(s0, 1.0), params);
    const auto mad = evolve_madelung(s0, params);
    auto nl_params = params;
    nl_params.coef = {0.5, 0.125, 0.2};
    const auto nl = evolve_nonlinear(to_wavefunction(s0, 1.0), nl_params);

    const double e_split = std::max(split.series.energy_drift(), free_run.series.energy_drift());
    const double e_mad = mad.series.energy_drift();
    const double e_nl = nl.series.energy_drift();
    const double norm_mad = mad.series.norm_drift();
    const double norm_nl = nl.series.norm_drift();
    const bool ok = norm_split < 1e-9 && split.series.norm_drift() < 1e-9 && norm_mad < 1e-6 && norm_nl < 1e-7 &&
                    e_split < 1e-6 && e_mad < 1e-6 && e_nl < 1e-6;
    return {ok, "norm drift split " + fmt("%.1e", std::max(norm_split, split.series.norm_drift())) + ", Madelung " +
                    fmt("%.1e", norm_mad) + " (renorm total " + fmt("%.1e", mad.renorm_drift) + "), nonlinear " +
                    fmt("%.1e", norm_nl) + "; H drift split " + fmt("%.1e", e_split) + ", Madelung " +
                    fmt("%.1e", e_mad) + ", nonlinear C=0.2 " + fmt("%.1e", e_nl)};
}

EnsembleState random_state(const Grid& g, std::uint64_t seed) {
    auto p = random_smooth_field(g, seed, 3, 0.5);
    auto S = random_smooth_field(g, seed + 100, 3);
    return EnsembleState::from_density(p, S);
}

Outcome criterion6() {
    const Grid g({2.0 * kPi}, {128});
    EvolutionParams p;
    p.metric = ConfigMetric(1, {1.3});
    p.potential = TabulatedPotential{random_smooth_field(g, 77, 2)};
    const auto s = random_state(g, 5);
    double worst = 0.0;
    for (auto coef : {ReducedCoefficients::classical(), ReducedCoefficients::quantum(1.0),
                      ReducedCoefficients{0.5, 0.125, 0.2}}) {
        p.coef = coef;
        worst = std::max(worst, functional_derivative_check(s, p, 16, 1e-4, 3).max_mismatch);
    }
    p.coef = {0.5, 0.125, 0.2};
    const RhsFn flipped = [](const EnsembleState& st, const EvolutionParams& q) {
        auto r = q;
        r.coef.C = -r.coef.C;
        return eom_rhs(st, r);
    };
    const double neg = functional_derivative_check(s, p, 16, 1e-4, 3, flipped).max_mismatch;
    return {worst < 1e-6 && neg > 1e-2,
            "max mismatch " + fmt("%.2e", worst) + ", flipped-C control " + fmt("%.2e", neg)};
}

Outcome criterion7() {
    const Grid g = trap_grid();
    const double T = 1.0;
    const BoostSpec boost{{8.0 * g.dx(0) / T}, 0.0};
    struct Case {
        const char* name;
        ReducedCoefficients coef;
        double alpha;
        double tol;
    };
    const Case cases[] = {{"classical", ReducedCoefficients::classical(), 0.5, 1e-5},
                          {"quantum", ReducedCoefficients::quantum(1.0), 0.0, 1e-5},
                          {"C=0.2", {0.5, 0.125, 0.2}, 0.0, 1e-4}};
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        GaussianSpec spec;
        spec.sigma = {1.0};
        spec.alpha = {c.alpha};
        spec.phase_a = 8.0;
        spec.phase_ratio = 0.5;
        const auto s0 = gaussian_state(g, spec, 1.0);
        EvolutionParams p;
        p.metric = ConfigMetric(1, {1.0});
        p.coef = c.coef;
        p.dt = 1e-3;
        const auto rep = boost_commutation_test(s0, boost, p, T, c.tol);
        ok = ok && rep.pass;
        detail += std::string(c.name) + " " + fmt("%.1e", std::max(rep.p_discrepancy, rep.S_discrepancy)) + ", ";
    }
    GaussianSpec spec;
    spec.sigma = {1.0};
    spec.alpha = {0.3};
    spec.momentum = {0.75};
    spec.offset = {0.4};
    spec.phase_a = 8.0;
    const auto s = gaussian_state(g, spec, 1.0);
    const ConfigMetric metric(1, {1.0});
    const double v = mean_velocity(s, metric)[0];
    const double v2 = mean_velocity(boost_state(s, boost, T, metric), metric)[0];
    const double cov = std::abs(v2 - (v - boost.u[0]));
    ok = ok && cov < 1e-10;
    return {ok, detail + "velocity covariance " + fmt("%.1e", cov)};
}

Outcome criterion8() {
    const int trials = 4;
    const std::vector<double> lambdas{0.5, 2.0, 3.0, 10.0};
    bool ok = true;
    std::string detail;
    for (const auto& d : {density_h_diagonal(), density_h_general({0.3, 0.1, {{1.0, 0.2}, {-0.5, 0.3}}})}) {
        const auto a = audit_scale_invariance(d, trials, lambdas);
        const auto b = audit_separability(d, trials);
        const auto c = audit_positivity(d, trials);
        const auto r = audit_rotation(d, trials);
        ok = ok && a.pass && b.pass && c.pass && r.pass;
        detail += d.name + " " + fmt("%.0e", std::max({a.max_rel, b.max_rel, c.max_rel, r.max_rel})) + ", ";
    }
    const auto ce = audit_scale_invariance(density_counterexample(), trials, lambdas);
    double law = 0.0;
    for (const auto& [lam, dev] : ce.per_lambda) law = std::max(law, std::abs(dev - std::abs(1.0 - 1.0 / lam)));
    ok = ok && !ce.pass && law < 1e-10;
    const auto w1 = audit_positivity(density_linear_phase(), trials);
    ok = ok && !w1.pass;
    return {ok, detail + "counterexample FAIL (law error " + fmt("%.0e", law) + "), W1 positivity " +
                    (w1.pass ? "PASS" : "FAIL")};
}

Outcome criterion9() {
    const Grid g = trap_grid();
    GaussianSpec spec;
    spec.sigma = {1.0};
    spec.window_a = 6.0;
    spec.ratio = 3.0;
    spec.alpha = {1.0};
    spec.phase_a = 12.0;
    spec.phase_ratio = 1.0;
    const auto s = gaussian_state(g, spec, 1.0);
    const auto rep = gauge_inequivalence_check({s}, ConfigMetric(1, {1.0}), 1.0, 0.2);
    const double r = rep.results.at(0).residual;
    const double frozen = 0.8164966642743037;
    return {rep.inequivalent && std::abs(r - frozen) < 1e-8,
            "residual " + fmt("%.16f", r) + " (frozen " + fmt("%.16f", frozen) + ")"};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion10() {
    namespace fs = std::filesystem;
    const char* text = R"(evolver = "nonlinear"
seed = 7
hbar = 1.0
[grid]
L = [50.26548245743669]
n = [256]
[metric]
d = 1
masses = [1.0]
[state]
kind = "gaussian"
offset = [0.25]
sigma = [0.7071067811865476]
[coefficients]
Abar = 0.5
Bbar = 0.125
C = 0.2
[potential]
kind = "harmonic"
omega = [1.0]
[run]
dt = 0.001
t_end = 0.2
stride = 10
snapshots = [0.1, 0.2]
)";
    const fs::path root = fs::temp_directory_path() / "enslab_determinism";
    fs::remove_all(root);
    std::vector<fs::path> outs{root / "a", root / "b"};
    for (const auto& o : outs) {
        const auto cfg = parse_scenario(text, "determinism");
        if (run_scenario(cfg, o) != 0) return {false, "scenario run failed"};
    }
    int files = 0;
    for (const auto& e : fs::directory_iterator(outs[0])) {
        if (e.path().extension() != ".csv") continue;
        ++files;
        if (slurp(e.path()) != slurp(outs[1] / e.path().filename()))
            return {false, e.path().filename().string() + " differs"};
    }
    fs::remove_all(root);
    return {files >= 3, std::to_string(files) + " CSV files byte-identical across two runs"};
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<Outcome()>>> all{
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},  {5, criterion5},
        {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};
    int failures = 0;
    for (const auto& [id, fn] : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d: %s  %s  [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures;
}

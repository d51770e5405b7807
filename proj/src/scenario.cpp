#include "enslab/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "enslab/audit.hpp"
#include "enslab/errors.hpp"
#include "enslab/galilean.hpp"
#include "enslab/madelung.hpp"
#include "enslab/toml.hpp"

namespace enslab {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- parsing

class Reader {
public:
    explicit Reader(const TomlDoc& doc) : doc_(doc) {}

    bool has(const std::string& sec, const std::string& key) const {
        const auto s = doc_.find(sec);
        return s != doc_.end() && s->second.count(key);
    }
    bool has_section(const std::string& sec) const { return doc_.count(sec) > 0; }

    double num(const std::string& sec, const std::string& key) { return get<double>(sec, key, "a number"); }
    double num(const std::string& sec, const std::string& key, double def) {
        return has(sec, key) ? num(sec, key) : def;
    }
    std::string str(const std::string& sec, const std::string& key, const std::string& def) {
        return has(sec, key) ? get<std::string>(sec, key, "a string") : def;
    }
    bool flag(const std::string& sec, const std::string& key, bool def) {
        return has(sec, key) ? get<bool>(sec, key, "true or false") : def;
    }
    // Accepts a scalar as a one-element list.
    std::vector<double> nums(const std::string& sec, const std::string& key) {
        const auto& v = find(sec, key);
        if (const auto* d = std::get_if<double>(&v)) return {*d};
        if (const auto* a = std::get_if<std::vector<double>>(&v)) return *a;
        bad(sec, key, "a list of numbers");
    }
    std::vector<double> nums(const std::string& sec, const std::string& key, std::vector<double> def) {
        return has(sec, key) ? nums(sec, key) : def;
    }
    std::vector<std::string> strs(const std::string& sec, const std::string& key) {
        const auto& v = find(sec, key);
        if (const auto* s = std::get_if<std::string>(&v)) return {*s};
        if (const auto* a = std::get_if<std::vector<std::string>>(&v)) return *a;
        if (const auto* e = std::get_if<std::vector<double>>(&v); e && e->empty()) return {};
        bad(sec, key, "a list of strings");
    }
    int integer(const std::string& sec, const std::string& key, int def) {
        if (!has(sec, key)) return def;
        const double x = num(sec, key);
        if (x != std::floor(x) || std::abs(x) > 2e9) bad(sec, key, "an integer");
        return static_cast<int>(x);
    }

    void reject_unused() const {
        static const std::set<std::string> sections{"",          "grid",  "metric",  "state", "coefficients",
                                                    "potential", "run",   "compare", "audit", "boost"};
        for (const auto& [sec, table] : doc_) {
            if (!sections.count(sec)) throw ConfigError("unknown section [" + sec + "]");
            for (const auto& [key, v] : table)
                if (!used_.count({sec, key})) throw ConfigError("unknown key '" + key + "' in " + label(sec));
        }
    }

private:
    static std::string label(const std::string& sec) { return sec.empty() ? "top level" : "[" + sec + "]"; }

    [[noreturn]] static void bad(const std::string& sec, const std::string& key, const char* what) {
        throw ConfigError(label(sec) + " " + key + ": expected " + what);
    }

    const TomlValue& find(const std::string& sec, const std::string& key) {
        if (!has(sec, key)) throw ConfigError(label(sec) + ": missing required key '" + key + "'");
        used_.insert({sec, key});
        return doc_.at(sec).at(key);
    }

    template <class T>
    T get(const std::string& sec, const std::string& key, const char* what) {
        const auto& v = find(sec, key);
        if (const auto* x = std::get_if<T>(&v)) return *x;
        bad(sec, key, what);
    }

    const TomlDoc& doc_;
    std::set<std::pair<std::string, std::string>> used_;
};

template <class F>
auto as_config_error(F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::vector<double> read_column(const fs::path& file, const std::string& column, std::size_t rows) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open " + file.string());
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    std::size_t col = header.size();
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == column) col = j;
    if (col == header.size()) throw ConfigError(file.string() + ": no column '" + column + "'");
    std::vector<double> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        for (std::size_t j = 0; j <= col; ++j)
            if (!std::getline(ss, cell, ',')) throw ConfigError(file.string() + ": short row");
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str()) throw ConfigError(file.string() + ": bad number '" + cell + "'");
        out.push_back(v);
    }
    if (out.size() != rows)
        throw ConfigError(file.string() + ": expected " + std::to_string(rows) + " rows, found " +
                          std::to_string(out.size()));
    return out;
}

// ---------------------------------------------------------------- output

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string list(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + g17(v[i]);
    return s + "]";
}

std::string list(const std::vector<int>& v) {
    std::vector<double> d(v.begin(), v.end());
    return list(d);
}

std::string list(const std::vector<std::string>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::string("\"") + v[i] + "\"";
    return s + "]";
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + p.string());
}

void write_observables(const fs::path& p, const ObservableSeries& s, int D) {
    std::string out = "t,norm,energy";
    for (int a = 1; a <= D; ++a) out += ",mean_" + std::to_string(a);
    for (int a = 1; a <= D; ++a) out += ",var_" + std::to_string(a);
    out += ",min_p\n";
    for (const auto& r : s.rows) {
        out += g17(r.t) + "," + g17(r.norm) + "," + g17(r.energy);
        for (double m : r.mean) out += "," + g17(m);
        for (double v : r.var) out += "," + g17(v);
        out += "," + g17(r.min_p) + "\n";
    }
    write_text(p, out);
}

std::string snapshot_name(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "snapshot_t%.6g.csv", t);
    return buf;
}

void write_snapshot(const fs::path& dir, const Snapshot& s) {
    const Grid& g = s.p.grid;
    std::string out;
    for (int a = 1; a <= g.dims(); ++a) out += "x_" + std::to_string(a) + ",";
    out += "p,S,re_psi,im_psi\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (int a = 0; a < g.dims(); ++a) out += g17(g.coord(a, i)) + ",";
        out += g17(s.p[i]) + "," + g17(s.S[i]) + "," + g17(s.psi[i].real()) + "," + g17(s.psi[i].imag()) + "\n";
    }
    write_text(dir / snapshot_name(s.t), out);
}

void prepare_output(const ScenarioConfig& cfg, const fs::path& out) {
    fs::create_directories(out);
    write_text(out / "config.resolved.toml", cfg.resolved());
}

void write_json(const fs::path& p, const ordered_json& j) { write_text(p, j.dump(2) + "\n"); }

// Maps exceptions raised before any output exists to exit codes.
int guarded(const char* what, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << what << ": config error: " << e.what() << "\n";
        return 2;
    } catch (const IncommensurateBoost& e) {
        std::cerr << what << ": " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << what << ": config error: " << e.what() << "\n";
        return 2;
    } catch (const NodeDetected& e) {
        std::cerr << what << ": node detected at t = " << e.t << ": " << e.what() << "\n";
        return 1;
    } catch (const StateBlowup& e) {
        std::cerr << what << ": blowup at t = " << e.t << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << what << ": " << e.what() << "\n";
        return 1;
    }
}

void require_dynamics(const ScenarioConfig& c) {
    if (c.lengths.empty()) throw ConfigError("[grid] section is required");
    if (c.coef_form.empty()) throw ConfigError("[coefficients] section is required");
    if (!(c.dt > 0.0) || !(c.t_end > 0.0)) throw ConfigError("[run] dt and t_end are required and positive");
}

Density density_by_name(const std::string& name, const ScenarioConfig& cfg) {
    if (name == "h_general" && cfg.coef_form == "family") return density_h_general(cfg.family);
    for (auto& d : default_catalog())
        if (d.name == name) return d;
    throw ConfigError("[audit] unknown density '" + name + "'");
}

// Verdicts the catalog is known to produce; "-" means informational only.
std::string expected_verdict(const std::string& density, const std::string& axiom) {
    if (density == "h_diagonal" || density == "h_general" || density == "h_higher_derivative") return "PASS";
    if (density == "h_counterexample_universality") {
        if (axiom == "scale_invariance") return "FAIL";
        if (axiom == "separability") return "PASS";
    }
    if (density == "h_linear_phase" && axiom == "positivity") return "FAIL";
    if (density == "h_anisotropic_probe" && axiom == "rotation") return "FAIL";
    return "-";
}

}  // namespace

// ---------------------------------------------------------------- config

ScenarioConfig parse_scenario(const std::string& text, const std::string& name) {
    const TomlDoc doc = parse_toml(text);
    Reader r(doc);
    ScenarioConfig c;
    c.name = r.str("", "name", name);
    c.evolver = r.str("", "evolver", "madelung");
    if (c.evolver != "madelung" && c.evolver != "splitstep" && c.evolver != "nonlinear")
        throw ConfigError("evolver must be madelung, splitstep or nonlinear");
    const double seed = r.num("", "seed", 0.0);
    if (seed < 0.0 || seed != std::floor(seed) || seed > 9e15) throw ConfigError("seed must be a non-negative integer");
    c.seed = static_cast<std::uint64_t>(seed);
    c.hbar = r.num("", "hbar", 1.0);
    if (!(c.hbar > 0.0)) throw ConfigError("hbar must be positive");
    c.output = r.str("", "output", "");

    if (r.has_section("grid")) {
        c.lengths = r.nums("grid", "L");
        for (double n : r.nums("grid", "n")) {
            if (n != std::floor(n)) throw ConfigError("[grid] n must be integers");
            c.counts.push_back(static_cast<int>(n));
        }
        c.origin = r.nums("grid", "origin", {});
        if (!r.has_section("metric") || !r.has("metric", "masses"))
            throw ConfigError("[metric] masses is required");
        c.particle_dim = r.integer("metric", "d", 1);
        c.masses = r.nums("metric", "masses");
        as_config_error([&] { return c.grid(); });
        as_config_error([&] { return c.metric(); });
        if (c.metric().dims() != static_cast<int>(c.lengths.size()))
            throw ConfigError("metric d * len(masses) must equal the number of grid axes");
    }

    if (r.has_section("state")) {
        auto& s = c.state;
        s.kind = r.str("state", "kind", "gaussian");
        if (s.kind == "gaussian") {
            auto& g = s.gaussian;
            g.offset = r.nums("state", "offset", g.offset);
            g.sigma = r.nums("state", "sigma", g.sigma);
            g.momentum = r.nums("state", "momentum", g.momentum);
            g.alpha = r.nums("state", "alpha", g.alpha);
            g.depth = r.num("state", "depth", g.depth);
            g.ratio = r.num("state", "ratio", g.ratio);
            g.window_a = r.num("state", "window_a", g.window_a);
            g.phase_a = r.num("state", "phase_a", g.phase_a);
            g.phase_ratio = r.num("state", "phase_ratio", g.phase_ratio);
            const auto w = r.str("state", "window", "auto");
            if (w != "auto" && w != "none") throw ConfigError("[state] window must be \"auto\" or \"none\"");
            s.windowed = w == "auto";
        } else if (s.kind == "file") {
            s.file = r.str("state", "file", "");
            if (s.file.empty()) throw ConfigError("[state] file is required for kind = \"file\"");
        } else if (s.kind != "uniform") {
            throw ConfigError("[state] kind must be uniform, gaussian or file");
        }
    }

    if (r.has_section("coefficients")) {
        const bool q = r.has("coefficients", "quantum");
        const bool red = r.has("coefficients", "Abar") || r.has("coefficients", "Bbar") || r.has("coefficients", "C");
        const bool fam = r.has("coefficients", "A") || r.has("coefficients", "B") || r.has("coefficients", "a") ||
                         r.has("coefficients", "b");
        if (q + red + fam != 1)
            throw ConfigError("[coefficients]: give exactly one of quantum = true, {Abar, Bbar, C} or {A, B, a, b}");
        if (q) {
            if (!r.flag("coefficients", "quantum", true)) throw ConfigError("[coefficients] quantum must be true");
            c.coef_form = "quantum";
            c.coef = ReducedCoefficients::quantum(c.hbar);
        } else if (red) {
            c.coef_form = "reduced";
            c.coef = {r.num("coefficients", "Abar", 0.5), r.num("coefficients", "Bbar"), r.num("coefficients", "C")};
        } else {
            c.coef_form = "family";
            c.family.A = r.num("coefficients", "A");
            c.family.B = r.num("coefficients", "B");
            const auto a = r.nums("coefficients", "a", {});
            const auto b = r.nums("coefficients", "b", {});
            if (a.size() != b.size()) throw ConfigError("[coefficients] a and b must have equal length");
            for (std::size_t i = 0; i < a.size(); ++i) c.family.pairs.push_back({a[i], b[i]});
            as_config_error([&] {
                c.family.validate();
                return 0;
            });
            c.coef = reduce(c.family);
        }
        as_config_error([&] {
            c.coef.validate();
            return 0;
        });
    }

    if (r.has_section("potential")) {
        auto& p = c.potential;
        p.kind = r.str("potential", "kind", "zero");
        if (p.kind == "harmonic") {
            p.harmonic.omega = r.nums("potential", "omega");
            p.harmonic.depth = r.num("potential", "depth", 10.0);
            p.harmonic.ratio = r.num("potential", "ratio", 3.0);
            for (double w : p.harmonic.omega)
                if (!(w > 0.0)) throw ConfigError("[potential] omega must be positive");
        } else if (p.kind == "file") {
            p.file = r.str("potential", "file", "");
            if (p.file.empty()) throw ConfigError("[potential] file is required for kind = \"file\"");
        } else if (p.kind != "zero") {
            throw ConfigError("[potential] kind must be zero, harmonic or file");
        }
    }

    if (r.has_section("run")) {
        c.dt = r.num("run", "dt");
        c.t_end = r.num("run", "t_end");
        c.stride = r.integer("run", "stride", 1);
        c.energy_scale = r.num("run", "energy_scale", 1.0);
        c.snapshots = r.nums("run", "snapshots", {});
        if (!(c.dt > 0.0) || !(c.t_end >= c.dt)) throw ConfigError("[run] needs dt > 0 and t_end >= dt");
        if (c.stride < 1) throw ConfigError("[run] stride must be >= 1");
        if (!(c.energy_scale > 0.0)) throw ConfigError("[run] energy_scale must be positive");
        for (double t : c.snapshots)
            if (t < 0.0 || t > c.t_end + 0.5 * c.dt) throw ConfigError("[run] snapshot time outside [0, t_end]");
    }

    c.compare_tolerance = r.num("compare", "tolerance", c.compare_tolerance);

    if (r.has_section("audit")) {
        auto& a = c.audit;
        if (r.has("audit", "densities")) a.densities = r.strs("audit", "densities");
        if (r.has("audit", "axioms")) a.axioms = r.strs("audit", "axioms");
        a.trials = r.integer("audit", "trials", a.trials);
        a.lambdas = r.nums("audit", "lambdas", a.lambdas);
        if (r.has("audit", "tolerance")) a.tolerance = r.num("audit", "tolerance");
        if (r.has("audit", "gauge_C")) a.gauge_C = r.num("audit", "gauge_C");
        if (a.trials < 1) throw ConfigError("[audit] trials must be >= 1");
        for (const auto& ax : a.axioms)
            if (ax != "scale" && ax != "separability" && ax != "positivity" && ax != "rotation")
                throw ConfigError("[audit] unknown axiom '" + ax + "'");
        for (const auto& d : a.densities) density_by_name(d, c);
    }

    if (r.has_section("boost")) {
        auto& b = c.boost;
        b.u = r.nums("boost", "u");
        b.phi = r.num("boost", "phi", 0.0);
        b.T = r.num("boost", "T", 1.0);
        b.Bbar = r.nums("boost", "Bbar");
        b.C = r.nums("boost", "C", std::vector<double>(b.Bbar.size(), 0.0));
        b.tolerance = r.nums("boost", "tolerance", b.tolerance);
        if (b.Bbar.empty() || b.Bbar.size() != b.C.size())
            throw ConfigError("[boost] Bbar and C must be non-empty lists of equal length");
        if (b.tolerance.size() != 1 && b.tolerance.size() != b.Bbar.size())
            throw ConfigError("[boost] tolerance needs one entry or one per case");
        if (!(b.T > 0.0)) throw ConfigError("[boost] T must be positive");
    }

    r.reject_unused();
    return c;
}

ScenarioConfig load_scenario(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    auto c = parse_scenario(ss.str(), file.stem().string());
    c.base_dir = file.parent_path().empty() ? fs::path(".") : file.parent_path();
    return c;
}

fs::path default_output(const ScenarioConfig& cfg) {
    if (!cfg.output.empty()) return cfg.output;
    if (const char* root = std::getenv("ENSLAB_OUT_ROOT"); root && *root) return fs::path(root) / cfg.name;
    return fs::path("enslab_out") / cfg.name;
}

Grid ScenarioConfig::grid() const {
    if (lengths.size() != counts.size()) throw std::invalid_argument("[grid] L and n must have equal length");
    return Grid(lengths, counts, origin);
}

ConfigMetric ScenarioConfig::metric() const {
    if (masses.empty()) throw std::invalid_argument("[metric] masses must be non-empty");
    for (double m : masses)
        if (!(m > 0.0)) throw std::invalid_argument("[metric] masses must be positive");
    if (particle_dim < 1) throw std::invalid_argument("[metric] d must be >= 1");
    return ConfigMetric(particle_dim, masses);
}

PotentialSpec ScenarioConfig::potential_spec() const {
    if (potential.kind == "harmonic") return potential.harmonic;
    if (potential.kind == "file") {
        const Grid g = grid();
        const fs::path f = potential.file.is_absolute() ? potential.file : base_dir / potential.file;
        return TabulatedPotential{ScalarField(g, read_column(f, "V", g.size()))};
    }
    return ZeroPotential{};
}

EvolutionParams ScenarioConfig::params() const {
    EvolutionParams p;
    p.metric = metric();
    p.coef = coef;
    p.hbar = hbar;
    p.potential = potential_spec();
    p.dt = dt;
    p.t_end = t_end;
    p.stride = stride;
    p.energy_scale = energy_scale;
    p.snapshot_times = snapshots;
    return p;
}

EnsembleState ScenarioConfig::initial_state() const {
    const Grid g = grid();
    if (state.kind == "uniform") return uniform_state(g);
    if (state.kind == "file") {
        const fs::path f = state.file.is_absolute() ? state.file : base_dir / state.file;
        return EnsembleState::from_density(ScalarField(g, read_column(f, "p", g.size())),
                                           ScalarField(g, read_column(f, "S", g.size())));
    }
    if (!state.windowed) throw std::invalid_argument("[state] window = \"none\" is only valid for the splitstep evolver");
    return gaussian_state(g, state.gaussian, hbar);
}

ComplexField ScenarioConfig::initial_wavefunction() const {
    if (state.kind == "gaussian" && !state.windowed) return gaussian_wavefunction(grid(), state.gaussian, hbar);
    const auto s = initial_state();
    if (!drift_commensurate(s, hbar))
        throw std::invalid_argument("[state] momentum must be a multiple of 2 pi / L for wavefunction evolvers");
    return to_wavefunction(s, hbar);
}

std::string ScenarioConfig::resolved() const {
    std::ostringstream o;
    o << "name = " << quoted(name) << "\n";
    o << "evolver = " << quoted(evolver) << "\n";
    o << "seed = " << seed << "\n";
    o << "hbar = " << g17(hbar) << "\n";
    if (!lengths.empty()) {
        o << "\n[grid]\nL = " << list(lengths) << "\nn = " << list(counts) << "\n";
        std::vector<double> x0;
        const Grid g = grid();
        for (int a = 0; a < g.dims(); ++a) x0.push_back(g.origin(a));
        o << "origin = " << list(x0) << "\n";
        o << "\n[metric]\nd = " << particle_dim << "\nmasses = " << list(masses) << "\n";
    }
    o << "\n[state]\nkind = " << quoted(state.kind) << "\n";
    if (state.kind == "gaussian") {
        const auto& g = state.gaussian;
        o << "offset = " << list(g.offset) << "\nsigma = " << list(g.sigma) << "\nmomentum = " << list(g.momentum)
          << "\nalpha = " << list(g.alpha) << "\ndepth = " << g17(g.depth) << "\nratio = " << g17(g.ratio)
          << "\nwindow = " << quoted(state.windowed ? "auto" : "none") << "\nwindow_a = " << g17(g.window_a)
          << "\nphase_a = " << g17(g.phase_a) << "\nphase_ratio = " << g17(g.phase_ratio) << "\n";
    } else if (state.kind == "file") {
        o << "file = " << quoted((state.file.is_absolute() ? state.file : base_dir / state.file).string()) << "\n";
    }
    if (!coef_form.empty()) {
        o << "\n[coefficients]\n";
        if (coef_form == "family") {
            std::vector<double> a, b;
            for (const auto& [x, y] : family.pairs) {
                a.push_back(x);
                b.push_back(y);
            }
            o << "A = " << g17(family.A) << "\nB = " << g17(family.B) << "\na = " << list(a) << "\nb = " << list(b)
              << "\n# reduced: Abar = " << g17(coef.Abar) << ", Bbar = " << g17(coef.Bbar) << ", C = " << g17(coef.C)
              << "\n";
        } else {
            o << "Abar = " << g17(coef.Abar) << "\nBbar = " << g17(coef.Bbar) << "\nC = " << g17(coef.C) << "\n";
        }
    }
    o << "\n[potential]\nkind = " << quoted(potential.kind) << "\n";
    if (potential.kind == "harmonic")
        o << "omega = " << list(potential.harmonic.omega) << "\ndepth = " << g17(potential.harmonic.depth)
          << "\nratio = " << g17(potential.harmonic.ratio) << "\n";
    if (potential.kind == "file")
        o << "file = "
          << quoted((potential.file.is_absolute() ? potential.file : base_dir / potential.file).string()) << "\n";
    if (dt > 0.0)
        o << "\n[run]\ndt = " << g17(dt) << "\nt_end = " << g17(t_end) << "\nstride = " << stride
          << "\nenergy_scale = " << g17(energy_scale) << "\nsnapshots = " << list(snapshots) << "\n";
    o << "\n[compare]\ntolerance = " << g17(compare_tolerance) << "\n";
    o << "\n[audit]\ndensities = " << list(audit.densities) << "\naxioms = " << list(audit.axioms)
      << "\ntrials = " << audit.trials << "\nlambdas = " << list(audit.lambdas) << "\n";
    if (audit.tolerance) o << "tolerance = " << g17(*audit.tolerance) << "\n";
    if (audit.gauge_C) o << "gauge_C = " << g17(*audit.gauge_C) << "\n";
    if (!boost.u.empty())
        o << "\n[boost]\nu = " << list(boost.u) << "\nphi = " << g17(boost.phi) << "\nT = " << g17(boost.T)
          << "\nBbar = " << list(boost.Bbar) << "\nC = " << list(boost.C) << "\ntolerance = " << list(boost.tolerance)
          << "\n";
    return o.str();
}

// ---------------------------------------------------------------- commands

int run_scenario(const ScenarioConfig& cfg, const fs::path& out) {
    return guarded("run", [&] {
        require_dynamics(cfg);
        const Grid g = cfg.grid();
        const auto params = cfg.params();
        params.validate(g);
        if (cfg.evolver == "splitstep" && cfg.coef.C != 0.0)
            throw ConfigError("splitstep evolver is linear: C must be 0");
        std::optional<EnsembleState> s0;
        std::optional<ComplexField> psi0;
        if (cfg.evolver == "madelung")
            s0 = cfg.initial_state();
        else
            psi0 = cfg.initial_wavefunction();

        prepare_output(cfg, out);
        const auto t0 = std::chrono::steady_clock::now();
        ordered_json summary{{"scenario", cfg.name}, {"evolver", cfg.evolver}, {"steps", params.steps()}};
        ObservableSeries series;
        int code = 0;
        try {
            if (s0) {
                auto run = evolve_madelung(*s0, params);
                summary["renorm_drift"] = run.renorm_drift;
                series = std::move(run.series);
            } else if (cfg.evolver == "splitstep") {
                series = evolve_schrodinger_splitstep(*psi0, params).series;
            } else {
                series = evolve_nonlinear(*psi0, params).series;
            }
            summary["status"] = "ok";
        } catch (const NodeDetected& e) {
            summary["status"] = "node_detected";
            summary["failure_time"] = e.t;
            summary["message"] = e.what();
            std::cerr << "run: node detected at t = " << e.t << ": " << e.what() << "\n";
            code = 1;
        } catch (const StateBlowup& e) {
            summary["status"] = "blowup";
            summary["failure_time"] = e.t;
            summary["message"] = e.what();
            std::cerr << "run: blowup at t = " << e.t << ": " << e.what() << "\n";
            code = 1;
        }
        if (code == 0) {
            write_observables(out / "observables.csv", series, g.dims());
            for (const auto& sn : series.snapshots) write_snapshot(out, sn);
            summary["final_time"] = series.rows.back().t;
            summary["final_norm"] = series.rows.back().norm;
            summary["norm_drift"] = series.norm_drift();
            summary["energy_drift"] = series.energy_drift();
            summary["initial_energy"] = series.rows.front().energy;
            summary["final_energy"] = series.rows.back().energy;
        }
        summary["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_json(out / "run.json", summary);
        return code;
    });
}

int compare_scenario(const ScenarioConfig& cfg, const fs::path& out, std::optional<double> tolerance) {
    return guarded("compare", [&] {
        require_dynamics(cfg);
        const double tol = tolerance.value_or(cfg.compare_tolerance);
        const auto& c = cfg.coef;
        if (c.Abar != 0.5 || c.C != 0.0 || std::abs(c.Bbar - cfg.hbar * cfg.hbar / 8.0) > 1e-12 * cfg.hbar * cfg.hbar)
            throw ConfigError("compare needs Abar = 1/2, C = 0 and Bbar = hbar^2/8");
        const Grid g = cfg.grid();
        const auto params = cfg.params();
        params.validate(g);
        const auto s0 = cfg.initial_state();
        const auto psi0 = cfg.initial_wavefunction();

        prepare_output(cfg, out);
        MadelungStepper mad(s0, params);
        SplitStepper split(psi0, mad.potential(), params.metric, params.dt, 0.5, cfg.hbar);
        std::string csv = "t,p_discrepancy,norm_madelung,norm_splitstep\n";
        double last = 0.0;
        auto record = [&] {
            const auto pm = mad.state().p();
            std::vector<double> ps(g.size());
            double worst = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                ps[i] = std::norm(split.field()[i]);
                worst = std::max(worst, std::abs(pm[i] - ps[i]));
            }
            last = worst;
            csv += g17(mad.time()) + "," + g17(worst) + "," + g17(mad.last_norm()) + "," + g17(integrate(g, ps)) + "\n";
        };
        ordered_json summary{{"scenario", cfg.name}, {"tolerance", tol}};
        int code = 0;
        try {
            record();
            const long n = params.steps();
            for (long k = 1; k <= n; ++k) {
                mad.step();
                split.step();
                if (k % params.stride == 0 || k == n) record();
            }
            summary["final_p_discrepancy"] = last;
            summary["pass"] = last < tol;
            if (!(last < tol)) {
                std::cerr << "compare: final discrepancy " << last << " exceeds tolerance " << tol << "\n";
                code = 1;
            }
        } catch (const StateBlowup& e) {
            summary["status"] = "blowup";
            summary["failure_time"] = e.t;
            std::cerr << "compare: blowup at t = " << e.t << ": " << e.what() << "\n";
            code = 1;
        }
        write_text(out / "compare.csv", csv);
        write_json(out / "compare.json", summary);
        return code;
    });
}

int audit_scenario(const ScenarioConfig& cfg, const fs::path& out, std::optional<double> tolerance) {
    return guarded("audit", [&] {
        const auto& a = cfg.audit;
        const auto tol = tolerance ? tolerance : a.tolerance;
        std::vector<Density> densities;
        if (a.densities.empty())
            for (const auto& d : default_catalog()) densities.push_back(density_by_name(d.name, cfg));
        else
            for (const auto& n : a.densities) densities.push_back(density_by_name(n, cfg));
        std::optional<EnsembleState> gauge_state;
        if (a.gauge_C) {
            if (cfg.lengths.empty()) throw ConfigError("[audit] gauge_C needs [grid], [metric] and [state]");
            gauge_state = cfg.initial_state();
        }

        prepare_output(cfg, out);
        std::string csv = "density,axiom,trials,max_abs,max_rel,tolerance,verdict,expected,seeds,note\n";
        int unexpected = 0, rows = 0;
        auto add = [&](const AuditReport& rep) {
            const std::string verdict = rep.pass ? "PASS" : "FAIL";
            const std::string expect = expected_verdict(rep.density, rep.axiom);
            if (expect != "-" && expect != verdict) {
                ++unexpected;
                std::cerr << "audit: " << rep.density << " " << rep.axiom << " gave " << verdict << ", expected "
                          << expect << "\n";
            }
            std::string seeds;
            for (auto s : rep.seeds) seeds += (seeds.empty() ? "" : " ") + std::to_string(s);
            csv += rep.density + "," + rep.axiom + "," + std::to_string(rep.trials) + "," + g17(rep.max_abs) + "," +
                   g17(rep.max_rel) + "," + g17(rep.tolerance) + "," + verdict + "," + expect + "," + seeds + "," +
                   rep.note + "\n";
            ++rows;
        };
        for (const auto& d : densities) {
            for (const auto& ax : a.axioms) {
                if (ax == "scale")
                    add(audit_scale_invariance(d, a.trials, a.lambdas, cfg.seed + 11, tol.value_or(1e-12)));
                else if (ax == "separability")
                    add(audit_separability(d, a.trials, cfg.seed + 23, tol.value_or(1e-10)));
                else if (ax == "positivity")
                    add(audit_positivity(d, a.trials, cfg.seed + 37, tol.value_or(1e-12)));
                else
                    add(audit_rotation(d, a.trials, cfg.seed + 53, tol.value_or(1e-12)));
            }
        }
        ordered_json summary{{"rows", rows}};
        if (gauge_state) {
            std::string verdict;
            double residual = 0.0, kappa = 0.0;
            try {
                const auto gr = gauge_residual(*gauge_state, cfg.metric(), cfg.hbar, *a.gauge_C);
                residual = gr.residual;
                kappa = gr.kappa;
                verdict = residual > 0.1 ? "INEQUIVALENT" : "EQUIVALENT";
            } catch (const DegenerateState&) {
                verdict = "DEGENERATE";
            }
            if (verdict != "INEQUIVALENT") ++unexpected;
            csv += "F_vs_Q,gauge_inequivalence,1," + g17(residual) + "," + g17(residual) + ",0.1," + verdict +
                   ",INEQUIVALENT," + std::to_string(cfg.seed) + ",kappa=" + g17(kappa) + "\n";
            summary["gauge_residual"] = residual;
            summary["gauge_kappa"] = kappa;
        }
        summary["unexpected"] = unexpected;
        write_text(out / "audit.csv", csv);
        write_json(out / "audit.json", summary);
        return unexpected == 0 ? 0 : 1;
    });
}

int boost_check_scenario(const ScenarioConfig& cfg, const fs::path& out) {
    return guarded("boost-check", [&] {
        const auto& b = cfg.boost;
        if (b.u.empty()) throw ConfigError("[boost] section is required");
        if (cfg.lengths.empty()) throw ConfigError("[grid] section is required");
        if (!(cfg.dt > 0.0)) throw ConfigError("[run] dt is required");
        if (cfg.potential.kind != "zero") throw ConfigError("boost-check runs with zero potential");
        const BoostSpec spec{b.u, b.phi};
        const auto s0 = cfg.initial_state();
        auto params = cfg.params();
        params.t_end = b.T;
        params.validate(cfg.grid());
        boost_state(s0, spec, b.T, params.metric);  // commensurability

        prepare_output(cfg, out);
        std::string csv = "Bbar,C,p_discrepancy,S_discrepancy,tolerance,verdict\n";
        int failures = 0;
        for (std::size_t i = 0; i < b.Bbar.size(); ++i) {
            params.coef = {0.5, b.Bbar[i], b.C[i]};
            const double tol = b.tolerance.size() == 1 ? b.tolerance[0] : b.tolerance[i];
            std::string verdict;
            BoostReport rep;
            try {
                rep = boost_commutation_test(s0, spec, params, b.T, tol);
                verdict = rep.pass ? "PASS" : "FAIL";
            } catch (const StateBlowup& e) {
                verdict = "BLOWUP";
                std::cerr << "boost-check: case " << i << " blew up at t = " << e.t << "\n";
            }
            if (verdict != "PASS") ++failures;
            csv += g17(b.Bbar[i]) + "," + g17(b.C[i]) + "," + g17(rep.p_discrepancy) + "," + g17(rep.S_discrepancy) +
                   "," + g17(tol) + "," + verdict + "\n";
        }
        write_text(out / "boost.csv", csv);
        return failures == 0 ? 0 : 1;
    });
}

}  // namespace enslab

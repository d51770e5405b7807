#include "enslab/fields.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>

namespace enslab {

Grid::Grid(std::vector<double> lengths, std::vector<int> counts, std::vector<double> origin)
    : L_(std::move(lengths)), n_(std::move(counts)), x0_(std::move(origin)) {
    if (L_.empty() || L_.size() != n_.size())
        throw std::invalid_argument("grid: lengths and counts must be non-empty and match");
    if (x0_.empty()) {
        for (double L : L_) x0_.push_back(-0.5 * L);
    }
    if (x0_.size() != L_.size()) throw std::invalid_argument("grid: origin has wrong rank");
    for (std::size_t a = 0; a < L_.size(); ++a) {
        if (!(L_[a] > 0.0) || !std::isfinite(L_[a]))
            throw std::invalid_argument("grid: axis length must be positive");
        if (n_[a] < 8 || n_[a] % 2 != 0)
            throw std::invalid_argument("grid: point counts must be even and >= 8");
    }
    stride_.assign(n_.size(), 1);
    std::size_t total = 1;
    for (int a = static_cast<int>(n_.size()) - 1; a >= 0; --a) {
        stride_[a] = total;
        if (total > (std::size_t{1} << 40) / static_cast<std::size_t>(n_[a]))
            throw std::invalid_argument("grid: too many nodes");
        total *= static_cast<std::size_t>(n_[a]);
    }
    size_ = total;
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dims(); ++a) v *= dx(a);
    return v;
}

std::vector<double> Grid::wavenumbers(int a) const {
    const int n = n_[a];
    std::vector<double> k(n);
    const double base = 2.0 * std::numbers::pi / L_[a];
    for (int j = 0; j < n; ++j) k[j] = base * (j <= n / 2 - 1 ? j : j - n);
    // Nyquist index n/2 maps to -n/2, matching numpy's fftfreq.
    return k;
}

ConfigMetric::ConfigMetric(int particle_dim, std::vector<double> masses)
    : d_(particle_dim), m_(std::move(masses)) {
    if (d_ < 1) throw std::invalid_argument("metric: particle dimension must be >= 1");
    if (m_.empty()) throw std::invalid_argument("metric: at least one mass required");
    for (double m : m_)
        if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("metric: masses must be positive");
}

ScalarField::ScalarField(const Grid& g, std::vector<double> values) : grid(g), v(std::move(values)) {
    if (v.size() != g.size()) throw std::invalid_argument("field size does not match grid");
}

double ScalarField::max() const { return *std::max_element(v.begin(), v.end()); }
double ScalarField::min() const { return *std::min_element(v.begin(), v.end()); }
bool ScalarField::finite() const {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

ComplexField::ComplexField(const Grid& g, std::vector<cplx> values) : grid(g), v(std::move(values)) {
    if (v.size() != g.size()) throw std::invalid_argument("field size does not match grid");
}

bool ComplexField::finite() const {
    return std::all_of(v.begin(), v.end(),
                       [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

ScalarField sample(const Grid& grid, const std::function<double(const std::vector<double>&)>& f) {
    ScalarField out(grid);
    std::vector<double> x(grid.dims());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (int a = 0; a < grid.dims(); ++a) x[a] = grid.coord(a, i);
        out[i] = f(x);
    }
    return out;
}

namespace {

struct Plans {
    fftw_plan fwd;
    fftw_plan bwd;
};

std::mutex plan_mutex;

const Plans& plans_for(const std::vector<int>& n) {
    static std::map<std::vector<int>, Plans> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::size_t total = 1;
    for (int c : n) total *= static_cast<std::size_t>(c);
    fftw_complex* buf = fftw_alloc_complex(total);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Plans p{fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, FFTW_FORWARD, flags),
            fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, FFTW_BACKWARD, flags)};
    fftw_free(buf);
    return cache.emplace(n, p).first->second;
}

}  // namespace

void fft_forward(const Grid& grid, std::vector<cplx>& data) {
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plans_for(grid.counts()).fwd, p, p);
}

void fft_backward(const Grid& grid, std::vector<cplx>& data) {
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plans_for(grid.counts()).bwd, p, p);
    const double s = 1.0 / static_cast<double>(grid.size());
    for (auto& z : data) z *= s;
}

void apply_spectral(const Grid& grid, std::vector<cplx>& data,
                    const std::function<cplx(std::size_t)>& m) {
    fft_forward(grid, data);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] *= m(i);
    fft_backward(grid, data);
}

namespace {

enum class Op { First, Second };

std::vector<cplx> spectral_axis(const Grid& g, std::vector<cplx> data, int axis, Op op) {
    if (axis < 0 || axis >= g.dims()) throw std::out_of_range("axis out of range");
    const auto k = g.wavenumbers(axis);
    const int nyq = g.count(axis) / 2;
    apply_spectral(g, data, [&](std::size_t i) -> cplx {
        const int j = g.index(axis, i);
        if (op == Op::First) return j == nyq ? cplx{0.0} : cplx{0.0, k[j]};
        return cplx{-k[j] * k[j]};
    });
    return data;
}

std::vector<cplx> to_complex(const std::vector<double>& v) { return {v.begin(), v.end()}; }

ScalarField real_part(const Grid& g, const std::vector<cplx>& d) {
    ScalarField out(g);
    for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i].real();
    return out;
}

}  // namespace

ScalarField gradient(const ScalarField& f, int axis) {
    return real_part(f.grid, spectral_axis(f.grid, to_complex(f.v), axis, Op::First));
}

ComplexField gradient(const ComplexField& f, int axis) {
    return ComplexField(f.grid, spectral_axis(f.grid, f.v, axis, Op::First));
}

ScalarField second_derivative(const ScalarField& f, int axis) {
    return real_part(f.grid, spectral_axis(f.grid, to_complex(f.v), axis, Op::Second));
}

ComplexField second_derivative(const ComplexField& f, int axis) {
    return ComplexField(f.grid, spectral_axis(f.grid, f.v, axis, Op::Second));
}

namespace {

std::vector<cplx> metric_laplacian(const Grid& g, std::vector<cplx> data, const ConfigMetric& metric) {
    if (metric.dims() != g.dims()) throw std::invalid_argument("metric rank does not match grid");
    std::vector<std::vector<double>> k(g.dims());
    for (int a = 0; a < g.dims(); ++a) k[a] = g.wavenumbers(a);
    apply_spectral(g, data, [&](std::size_t i) {
        double s = 0.0;
        for (int a = 0; a < g.dims(); ++a) {
            const double ka = k[a][g.index(a, i)];
            s -= metric.g(a) * ka * ka;
        }
        return cplx{s};
    });
    return data;
}

}  // namespace

ScalarField laplacian_metric(const ScalarField& f, const ConfigMetric& metric) {
    return real_part(f.grid, metric_laplacian(f.grid, to_complex(f.v), metric));
}

ComplexField laplacian_metric(const ComplexField& f, const ConfigMetric& metric) {
    return ComplexField(f.grid, metric_laplacian(f.grid, f.v, metric));
}

double integrate(const Grid& grid, const std::vector<double>& values) {
    double s = 0.0;
    for (double x : values) s += x;
    return s * grid.cell_volume();
}

double integrate(const ScalarField& f) { return integrate(f.grid, f.v); }

ScalarField random_smooth_field(const Grid& grid, std::uint64_t seed, int band_limit, double floor) {
    for (int a = 0; a < grid.dims(); ++a)
        if (band_limit < 0 || band_limit >= grid.count(a) / 2)
            throw std::invalid_argument("random_smooth_field: band limit must be below n/2");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<cplx> spec(grid.size(), cplx{0.0});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double m2 = 0.0;
        bool inside = true;
        for (int a = 0; a < grid.dims(); ++a) {
            int j = grid.index(a, i);
            if (j > grid.count(a) / 2) j -= grid.count(a);
            if (std::abs(j) > band_limit) inside = false;
            m2 += static_cast<double>(j) * j;
        }
        if (!inside) continue;
        const double re = normal(rng);
        const double im = normal(rng);
        spec[i] = cplx{re, im} / (1.0 + m2);
    }
    fft_backward(grid, spec);
    ScalarField f(grid);
    double peak = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = spec[i].real();
        peak = std::max(peak, std::abs(f[i]));
    }
    if (peak > 0.0)
        for (auto& x : f.v) x /= peak;
    if (floor > 0.0)
        for (auto& x : f.v) x = std::exp(x) + floor;
    return f;
}

namespace {

double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }
double normal_pdf(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

Window::Window(double half_width, double ratio, double blur) : a(half_width), r(ratio), delta(blur) {
    if (!(a > 0.0) || !(r > 0.0) || !(delta > 0.0))
        throw std::invalid_argument("window parameters must be positive");
    q0_ = quad_raw(0.0);
}

namespace {

// Kinks at -b, -a, a, b with slope jumps -r, 1+r, -(1+r), r.
struct Kinks {
    double pos[4];
    double jump[4];
    Kinks(double a, double r, double b) : pos{-b, -a, a, b}, jump{-r, 1.0 + r, -(1.0 + r), r} {}
};

}  // namespace

double Window::lin(double d) const {
    const Kinks k(a, r, outer());
    double s = 0.0;
    for (int j = 0; j < 4; ++j) {
        const double u = (d - k.pos[j]) / delta;
        s += k.jump[j] * delta * (u * normal_cdf(u) + normal_pdf(u));
    }
    return s;
}

double Window::slope(double d) const {
    const Kinks k(a, r, outer());
    double s = 0.0;
    for (int j = 0; j < 4; ++j) s += k.jump[j] * normal_cdf((d - k.pos[j]) / delta);
    return s;
}

double Window::quad_raw(double d) const {
    const Kinks k(a, r, outer());
    double s = 0.0;
    for (int j = 0; j < 4; ++j) {
        const double u = (d - k.pos[j]) / delta;
        s += k.jump[j] * delta * delta * (0.5 * (u * u + 1.0) * normal_cdf(u) + 0.5 * u * normal_pdf(u));
    }
    return s;
}

double Window::quad(double d) const { return quad_raw(d) - q0_; }

Window window_for_depth(double sigma, double depth, double ratio, double dx) {
    const double a = sigma * std::sqrt(2.0 * depth / (1.0 + 1.0 / ratio));
    return Window(a, ratio, 3.0 * dx);
}

double wrap_displacement(double x, double c, double L) {
    double d = std::fmod(x - c + 0.5 * L, L);
    if (d < 0.0) d += L;
    return d - 0.5 * L;
}

}  // namespace enslab

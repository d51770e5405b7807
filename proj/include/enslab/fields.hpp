#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace enslab {

using cplx = std::complex<double>;

// Uniform periodic lattice. Row-major storage, last axis fastest.
class Grid {
public:
    Grid() = default;
    Grid(std::vector<double> lengths, std::vector<int> counts,
         std::vector<double> origin = {});

    int dims() const { return static_cast<int>(n_.size()); }
    double length(int a) const { return L_[a]; }
    int count(int a) const { return n_[a]; }
    double origin(int a) const { return x0_[a]; }
    double dx(int a) const { return L_[a] / n_[a]; }
    double cell_volume() const;
    std::size_t size() const { return size_; }
    std::size_t stride(int a) const { return stride_[a]; }
    int index(int a, std::size_t flat) const {
        return static_cast<int>((flat / stride_[a]) % static_cast<std::size_t>(n_[a]));
    }
    double coord(int a, std::size_t flat) const { return x0_[a] + index(a, flat) * dx(a); }
    double midpoint(int a) const { return x0_[a] + 0.5 * L_[a]; }
    // Angular wavenumbers in FFT order for axis a.
    std::vector<double> wavenumbers(int a) const;
    const std::vector<int>& counts() const { return n_; }

    bool operator==(const Grid& o) const {
        return L_ == o.L_ && n_ == o.n_ && x0_ == o.x0_;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

private:
    std::vector<double> L_;
    std::vector<int> n_;
    std::vector<double> x0_;
    std::vector<std::size_t> stride_;
    std::size_t size_ = 0;
};

// Diagonal mass metric over N particles in d dimensions.
class ConfigMetric {
public:
    ConfigMetric() = default;
    ConfigMetric(int particle_dim, std::vector<double> masses);

    int particle_dim() const { return d_; }
    int particles() const { return static_cast<int>(m_.size()); }
    int dims() const { return d_ * particles(); }
    int particle_of(int axis) const { return axis / d_; }
    double mass(int axis) const { return m_[particle_of(axis)]; }
    double g(int axis) const { return 1.0 / mass(axis); }
    double g_inv(int axis) const { return mass(axis); }
    const std::vector<double>& masses() const { return m_; }

private:
    int d_ = 1;
    std::vector<double> m_;
};

struct ScalarField {
    Grid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}
    ScalarField(const Grid& g, std::vector<double> values);

    std::size_t size() const { return v.size(); }
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    double max() const;
    double min() const;
    bool finite() const;
};

struct ComplexField {
    Grid grid;
    std::vector<cplx> v;

    ComplexField() = default;
    explicit ComplexField(const Grid& g, cplx fill = 0.0) : grid(g), v(g.size(), fill) {}
    ComplexField(const Grid& g, std::vector<cplx> values);

    std::size_t size() const { return v.size(); }
    cplx& operator[](std::size_t i) { return v[i]; }
    cplx operator[](std::size_t i) const { return v[i]; }
    bool finite() const;
};

ScalarField sample(const Grid& grid, const std::function<double(const std::vector<double>&)>& f);

// In-place transforms. backward() includes the 1/N factor.
void fft_forward(const Grid& grid, std::vector<cplx>& data);
void fft_backward(const Grid& grid, std::vector<cplx>& data);

// Multiplies the spectrum of data by m(flat spectral index).
void apply_spectral(const Grid& grid, std::vector<cplx>& data,
                    const std::function<cplx(std::size_t)>& m);

ScalarField gradient(const ScalarField& f, int axis);
ComplexField gradient(const ComplexField& f, int axis);
ScalarField second_derivative(const ScalarField& f, int axis);
ComplexField second_derivative(const ComplexField& f, int axis);
ScalarField laplacian_metric(const ScalarField& f, const ConfigMetric& metric);
ComplexField laplacian_metric(const ComplexField& f, const ConfigMetric& metric);

double integrate(const ScalarField& f);
double integrate(const Grid& grid, const std::vector<double>& values);

ScalarField random_smooth_field(const Grid& grid, std::uint64_t seed, int band_limit,
                                double floor = 0.0);

// Smoothed periodic ramp used to build Gaussians and quadratic potentials on a
// periodic box. lin(d) = d for |d| < a, returns to zero with slope -r, and is
// flat beyond a + a/r; kinks are blurred with a Gaussian of width delta.
// quad is the antiderivative of lin with quad(0) = 0, slope its derivative.
struct Window {
    double a = 1.0;
    double r = 1.0;
    double delta = 0.1;

    Window() = default;
    Window(double half_width, double ratio, double blur);

    double outer() const { return a + a / r; }
    double lin(double d) const;
    double slope(double d) const;
    double quad(double d) const;
    // The blur lowers the sharp-kink value by delta^2 / 2.
    double plateau() const { return 0.5 * a * a * (1.0 + 1.0 / r) - 0.5 * delta * delta; }

private:
    double quad_raw(double d) const;
    double q0_ = 0.0;
};

// Window whose sharp-kink plateau sits at the given depth for log p = -quad/sigma^2.
// Blur width is 3 dx.
Window window_for_depth(double sigma, double depth, double ratio, double dx);

// Minimum-image displacement x - c on a periodic axis, in [-L/2, L/2).
double wrap_displacement(double x, double c, double L);

}  // namespace enslab

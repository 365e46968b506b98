#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace anisonorm {

using cplx = std::complex<double>;

enum class Side { Plus, Minus };

/// Periodic sampling box [-L_i, L_i) with N_i samples per axis (row-major, last axis fastest).
/// Each axis also carries its anisotropy weight so that grid files are self-describing.
/// When a time axis is present it is the last axis.
class Grid {
public:
    Grid(std::vector<std::size_t> samples, std::vector<double> half_extents,
         std::vector<double> weights = {}, std::optional<std::size_t> time_axis = std::nullopt);

    std::size_t dim() const { return n_.size(); }
    std::size_t size() const { return total_; }
    std::size_t samples(std::size_t axis) const { return n_[axis]; }
    const std::vector<std::size_t>& samples() const { return n_; }
    double half_extent(std::size_t axis) const { return half_[axis]; }
    const std::vector<double>& half_extents() const { return half_; }
    double weight(std::size_t axis) const { return w_[axis]; }
    const std::vector<double>& weights() const { return w_; }
    std::optional<std::size_t> time_axis() const { return time_axis_; }
    std::size_t stride(std::size_t axis) const { return stride_[axis]; }

    double spacing(std::size_t axis) const { return 2.0 * half_[axis] / static_cast<double>(n_[axis]); }
    /// Product of the spacings: the quadrature weight of one sample.
    double cell_volume() const;
    /// x_m = -L + m h.
    double coordinate(std::size_t axis, std::size_t m) const { return -half_[axis] + static_cast<double>(m) * spacing(axis); }
    /// Signed lattice index k in [-N/2, N/2) of FFT bin b.
    long frequency_index(std::size_t axis, std::size_t bin) const;
    /// xi_k = pi k / L for FFT bin b.
    double frequency(std::size_t axis, std::size_t bin) const;
    double nyquist(std::size_t axis) const;
    /// Index of the sample at x = 0 on this axis.
    std::size_t origin_index(std::size_t axis) const { return n_[axis] / 2; }
    /// Sample index whose coordinate equals x exactly (within 1e-12 h), if any.
    std::optional<std::size_t> lattice_index(std::size_t axis, double x) const;

    std::vector<std::size_t> unravel(std::size_t flat) const;
    std::vector<double> point(std::size_t flat) const;
    std::vector<double> frequency_point(std::size_t flat) const;

    Grid without_axis(std::size_t axis) const;
    /// Inserts a new axis at position `axis` (existing axes from there on shift right).
    Grid with_axis(std::size_t axis, std::size_t samples, double half_extent, double weight,
                   bool is_time = false) const;
    Grid refined(std::size_t factor) const;

    friend bool operator==(const Grid& x, const Grid& y);

private:
    std::vector<std::size_t> n_;
    std::vector<double> half_;
    std::vector<double> w_;
    std::optional<std::size_t> time_axis_;
    std::vector<std::size_t> stride_;
    std::size_t total_ = 1;
};

/// Complex samples on a Grid. Values are finite and immutable once constructed.
class GridFunction {
public:
    GridFunction(Grid grid, std::vector<cplx> values);
    static GridFunction zeros(const Grid& grid);
    static GridFunction sample(const Grid& grid, const std::function<cplx(std::span<const double>)>& f);

    const Grid& grid() const { return grid_; }
    std::span<const cplx> values() const { return values_; }
    const cplx& operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    double sup_norm() const;

    GridFunction operator+(const GridFunction& other) const;
    GridFunction operator-(const GridFunction& other) const;
    GridFunction scaled(cplx factor) const;
    GridFunction pointwise_product(const GridFunction& other) const;
    GridFunction conjugate() const;

private:
    Grid grid_;
    std::vector<cplx> values_;
};

/// Coefficients on the frequency lattice xi_k = pi k / L, stored in FFT bin order.
struct SpectralFunction {
    Grid grid;
    std::vector<cplx> coeffs;
};

/// Forward transform with quadrature weight prod h_i, so it approximates
/// the continuum transform  int e^{-i x.xi} u(x) dx  at the lattice frequencies.
SpectralFunction dft(const GridFunction& u);
GridFunction idft(const SpectralFunction& spectrum);

/// idft(m * dft(u)) for a multiplier given on the lattice in FFT bin order.
GridFunction apply_multiplier(const GridFunction& u, std::span<const cplx> multiplier);

/// Periodic convolution with quadrature weight prod h_i.
GridFunction convolve(const GridFunction& f, const GridFunction& g);

/// Continuous-frequency transform of the samples, evaluated on the lattice scaled per axis:
/// returns U(s_1 xi_1, ..., s_d xi_d) for every lattice xi, U(eta) = h sum_x u(x) e^{-i x.eta}.
std::vector<cplx> dtft_scaled(const GridFunction& u, std::span<const double> scales);

/// Iterated L_p quadrature: axis 0 innermost, the last axis outermost; p_i may be infinite.
double mixed_lp_norm(const GridFunction& u, std::span<const double> p);
double mixed_lp_norm(const Grid& grid, std::span<const double> magnitudes, std::span<const double> p);

/// Pointwise l_q over the sequence index (sup for q = infinity), then mixed_lp_norm.
double mixed_lp_lq_norm(std::span<const GridFunction> seq, std::span<const double> p, double q);

/// Zeroes the samples strictly on the opposite side of {x_axis = offset}; the closed chosen side is kept.
GridFunction truncate_halfspace(const GridFunction& u, std::size_t axis, Side side, double offset);

/// D^alpha = (-i d)^alpha as the Fourier multiplier prod xi_i^{alpha_i}.
GridFunction spectral_derivative(const GridFunction& u, std::span<const int> alpha);

/// Euclidean Laplacian applied `power` times, spectrally.
GridFunction spectral_laplacian(const GridFunction& u, int power = 1, std::span<const std::size_t> axes = {});

/// Restriction to the lattice hyperplane x_axis = x; returns a function with one axis fewer.
GridFunction slice(const GridFunction& u, std::size_t axis, double x);

/// Periodic shift by a whole number of samples per axis: result(x) = u(x - shift*h).
GridFunction lattice_shift(const GridFunction& u, std::span<const long> shift);

/// Moves axis `from` to position `to`, permuting the sample layout accordingly.
GridFunction move_axis(const GridFunction& u, std::size_t from, std::size_t to);

/// Sets the worker cap used by the data-parallel loops (0 = hardware concurrency).
void set_max_threads(unsigned count);
unsigned max_threads();

}  // namespace anisonorm

#include "anisonorm/grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>

#include "anisonorm/errors.hpp"
#include "fft.hpp"
#include "parallel.hpp"

namespace anisonorm {
namespace {

std::atomic<unsigned> g_max_threads{1};

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// (-1)^{sum of bins}: the phase that moves the transform origin from x = -L to x = 0.
double origin_phase(const Grid& grid, std::size_t flat) {
    int parity = 0;
    for (std::size_t i = 0; i < grid.dim(); ++i) parity += static_cast<int>((flat / grid.stride(i)) % grid.samples(i));
    return (parity % 2 == 0) ? 1.0 : -1.0;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw ValidationError(std::string(what) + ": grids do not match");
}

}  // namespace

void set_max_threads(unsigned count) {
    g_max_threads = count == 0 ? std::max(1u, std::thread::hardware_concurrency()) : count;
}

unsigned max_threads() { return g_max_threads; }

// ---------------------------------------------------------------------------- Grid

Grid::Grid(std::vector<std::size_t> samples, std::vector<double> half_extents, std::vector<double> weights,
           std::optional<std::size_t> time_axis)
    : n_(std::move(samples)), half_(std::move(half_extents)), w_(std::move(weights)), time_axis_(time_axis) {
    if (n_.empty()) throw ValidationError("grid needs at least one axis");
    if (half_.size() != n_.size()) throw ValidationError("grid: extents and sample counts differ in length");
    if (w_.empty()) w_.assign(n_.size(), 1.0);
    if (w_.size() != n_.size()) throw ValidationError("grid: weights and sample counts differ in length");
    for (std::size_t i = 0; i < n_.size(); ++i) {
        if (n_[i] < 4 || !is_power_of_two(n_[i])) {
            std::ostringstream msg;
            msg << "grid: axis " << i << " has " << n_[i] << " samples; need a power of two >= 4";
            throw ValidationError(msg.str());
        }
        if (!(half_[i] > 0.0) || !std::isfinite(half_[i])) throw ValidationError("grid: half-extents must be positive");
        if (!(w_[i] >= 1.0) || !std::isfinite(w_[i])) throw ValidationError("grid: axis weights must be >= 1");
    }
    if (time_axis_ && *time_axis_ != n_.size() - 1) throw ValidationError("grid: the time axis must be the last axis");

    stride_.assign(n_.size(), 1);
    for (std::size_t i = n_.size(); i-- > 1;) stride_[i - 1] = stride_[i] * n_[i];
    total_ = stride_[0] * n_[0];
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < dim(); ++i) v *= spacing(i);
    return v;
}

long Grid::frequency_index(std::size_t axis, std::size_t bin) const {
    const long n = static_cast<long>(n_[axis]);
    const long b = static_cast<long>(bin);
    return b < n / 2 ? b : b - n;
}

double Grid::frequency(std::size_t axis, std::size_t bin) const {
    return std::numbers::pi * static_cast<double>(frequency_index(axis, bin)) / half_[axis];
}

double Grid::nyquist(std::size_t axis) const { return std::numbers::pi / spacing(axis); }

std::optional<std::size_t> Grid::lattice_index(std::size_t axis, double x) const {
    if (axis >= dim()) throw ValidationError("axis out of range");
    const double h = spacing(axis);
    const double m = (x + half_[axis]) / h;
    const double rounded = std::round(m);
    if (std::abs(m - rounded) > 1e-9 || rounded < 0.0 || rounded >= static_cast<double>(n_[axis])) return std::nullopt;
    return static_cast<std::size_t>(rounded);
}

std::vector<std::size_t> Grid::unravel(std::size_t flat) const {
    std::vector<std::size_t> idx(dim());
    for (std::size_t i = 0; i < dim(); ++i) idx[i] = (flat / stride_[i]) % n_[i];
    return idx;
}

std::vector<double> Grid::point(std::size_t flat) const {
    std::vector<double> x(dim());
    for (std::size_t i = 0; i < dim(); ++i) x[i] = coordinate(i, (flat / stride_[i]) % n_[i]);
    return x;
}

std::vector<double> Grid::frequency_point(std::size_t flat) const {
    std::vector<double> xi(dim());
    for (std::size_t i = 0; i < dim(); ++i) xi[i] = frequency(i, (flat / stride_[i]) % n_[i]);
    return xi;
}

Grid Grid::without_axis(std::size_t axis) const {
    if (axis >= dim()) throw ValidationError("axis out of range");
    if (dim() == 1) throw ValidationError("cannot drop the only axis of a grid");
    std::vector<std::size_t> n;
    std::vector<double> half, w;
    for (std::size_t i = 0; i < dim(); ++i) {
        if (i == axis) continue;
        n.push_back(n_[i]);
        half.push_back(half_[i]);
        w.push_back(w_[i]);
    }
    std::optional<std::size_t> t;
    if (time_axis_ && *time_axis_ != axis) t = n.size() - 1;
    return Grid(std::move(n), std::move(half), std::move(w), t);
}

Grid Grid::with_axis(std::size_t axis, std::size_t samples, double half_extent, double weight, bool is_time) const {
    if (axis > dim()) throw ValidationError("axis out of range");
    auto n = n_;
    auto half = half_;
    auto w = w_;
    n.insert(n.begin() + static_cast<long>(axis), samples);
    half.insert(half.begin() + static_cast<long>(axis), half_extent);
    w.insert(w.begin() + static_cast<long>(axis), weight);
    std::optional<std::size_t> t;
    if (is_time) {
        if (time_axis_) throw ValidationError("grid already has a time axis");
        t = axis;
    } else if (time_axis_) {
        t = *time_axis_ + (axis <= *time_axis_ ? 1 : 0);
    }
    return Grid(std::move(n), std::move(half), std::move(w), t);
}

Grid Grid::refined(std::size_t factor) const {
    auto n = n_;
    for (auto& ni : n) ni *= factor;
    return Grid(std::move(n), half_, w_, time_axis_);
}

bool operator==(const Grid& x, const Grid& y) {
    return x.n_ == y.n_ && x.half_ == y.half_ && x.w_ == y.w_ && x.time_axis_ == y.time_axis_;
}

// ---------------------------------------------------------------------------- GridFunction

GridFunction::GridFunction(Grid grid, std::vector<cplx> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw ValidationError("grid function: value count does not match the grid");
    for (const auto& v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw ValidationError("grid function: non-finite sample");
}

GridFunction GridFunction::zeros(const Grid& grid) { return GridFunction(grid, std::vector<cplx>(grid.size())); }

GridFunction GridFunction::sample(const Grid& grid, const std::function<cplx(std::span<const double>)>& f) {
    std::vector<cplx> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto x = grid.point(i);
        v[i] = f(x);
    }
    return GridFunction(grid, std::move(v));
}

double GridFunction::sup_norm() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
}

GridFunction GridFunction::operator+(const GridFunction& other) const {
    require_same_grid(grid_, other.grid_, "sum");
    std::vector<cplx> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.values_[i];
    return GridFunction(grid_, std::move(v));
}

GridFunction GridFunction::operator-(const GridFunction& other) const {
    require_same_grid(grid_, other.grid_, "difference");
    std::vector<cplx> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= other.values_[i];
    return GridFunction(grid_, std::move(v));
}

GridFunction GridFunction::scaled(cplx factor) const {
    std::vector<cplx> v(values_);
    for (auto& x : v) x *= factor;
    return GridFunction(grid_, std::move(v));
}

GridFunction GridFunction::pointwise_product(const GridFunction& other) const {
    require_same_grid(grid_, other.grid_, "product");
    std::vector<cplx> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= other.values_[i];
    return GridFunction(grid_, std::move(v));
}

GridFunction GridFunction::conjugate() const {
    std::vector<cplx> v(values_);
    for (auto& x : v) x = std::conj(x);
    return GridFunction(grid_, std::move(v));
}

// ---------------------------------------------------------------------------- transforms

SpectralFunction dft(const GridFunction& u) {
    const Grid& grid = u.grid();
    std::vector<cplx> out(grid.size());
    detail::fft(grid.samples(), u.values(), out, -1);
    const double h = grid.cell_volume();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= h * origin_phase(grid, i);
    return SpectralFunction{grid, std::move(out)};
}

GridFunction idft(const SpectralFunction& spectrum) {
    const Grid& grid = spectrum.grid;
    if (spectrum.coeffs.size() != grid.size()) throw ValidationError("spectral function: coefficient count mismatch");
    double volume = 1.0;
    for (std::size_t i = 0; i < grid.dim(); ++i) volume *= 2.0 * grid.half_extent(i);
    std::vector<cplx> in(spectrum.coeffs);
    for (std::size_t i = 0; i < in.size(); ++i) in[i] *= origin_phase(grid, i) / volume;
    std::vector<cplx> out(grid.size());
    detail::fft(grid.samples(), in, out, +1);
    return GridFunction(grid, std::move(out));
}

GridFunction apply_multiplier(const GridFunction& u, std::span<const cplx> multiplier) {
    auto spec = dft(u);
    if (multiplier.size() != spec.coeffs.size()) throw ValidationError("multiplier size does not match the grid");
    for (std::size_t i = 0; i < spec.coeffs.size(); ++i) spec.coeffs[i] *= multiplier[i];
    return idft(spec);
}

GridFunction convolve(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f.grid(), g.grid(), "convolve");
    auto F = dft(f);
    const auto G = dft(g);
    for (std::size_t i = 0; i < F.coeffs.size(); ++i) F.coeffs[i] *= G.coeffs[i];
    return idft(F);
}

std::vector<cplx> dtft_scaled(const GridFunction& u, std::span<const double> scales) {
    const Grid& grid = u.grid();
    if (scales.size() != grid.dim()) throw ValidationError("dtft_scaled: one scale per axis required");
    std::vector<cplx> data(u.values().begin(), u.values().end());
    std::vector<cplx> next(data.size());
    for (std::size_t axis = 0; axis < grid.dim(); ++axis) {
        const std::size_t n = grid.samples(axis);
        const std::size_t stride = grid.stride(axis);
        const double h = grid.spacing(axis);
        std::vector<cplx> kernel(n * n);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t m = 0; m < n; ++m)
                kernel[k * n + m] = h * std::polar(1.0, -scales[axis] * grid.frequency(axis, k) * grid.coordinate(axis, m));
        const std::size_t outer = data.size() / (n * stride);
        detail::parallel_for(outer, [&](std::size_t o) {
            for (std::size_t r = 0; r < stride; ++r) {
                const std::size_t base = o * n * stride + r;
                for (std::size_t k = 0; k < n; ++k) {
                    cplx acc = 0.0;
                    for (std::size_t m = 0; m < n; ++m) acc += kernel[k * n + m] * data[base + m * stride];
                    next[base + k * stride] = acc;
                }
            }
        });
        std::swap(data, next);
    }
    return data;
}

// ---------------------------------------------------------------------------- norms

double mixed_lp_norm(const Grid& grid, std::span<const double> magnitudes, std::span<const double> p) {
    if (p.size() != grid.dim()) throw ValidationError("mixed norm: one exponent per axis required");
    if (magnitudes.size() != grid.size()) throw ValidationError("mixed norm: sample count mismatch");
    for (double pi : p)
        if (!(pi > 0.0)) throw ValidationError("mixed norm: exponents must be positive");

    std::vector<double> cur(magnitudes.begin(), magnitudes.end());
    std::size_t rest = grid.size();
    for (std::size_t axis = 0; axis < grid.dim(); ++axis) {
        const std::size_t n = grid.samples(axis);
        rest /= n;
        const double h = grid.spacing(axis);
        const double pi = p[axis];
        std::vector<double> next(rest);
        for (std::size_t r = 0; r < rest; ++r) {
            double acc = 0.0;
            if (std::isinf(pi)) {
                for (std::size_t m = 0; m < n; ++m) acc = std::max(acc, cur[m * rest + r]);
            } else if (pi == 1.0) {
                for (std::size_t m = 0; m < n; ++m) acc += cur[m * rest + r];
                acc *= h;
            } else {
                for (std::size_t m = 0; m < n; ++m) acc += std::pow(cur[m * rest + r], pi);
                acc = std::pow(h * acc, 1.0 / pi);
            }
            next[r] = acc;
        }
        cur = std::move(next);
    }
    return cur.front();
}

double mixed_lp_norm(const GridFunction& u, std::span<const double> p) {
    std::vector<double> mag(u.size());
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(u[i]);
    return mixed_lp_norm(u.grid(), mag, p);
}

double mixed_lp_lq_norm(std::span<const GridFunction> seq, std::span<const double> p, double q) {
    if (seq.empty()) throw ValidationError("mixed norm of an empty sequence");
    if (!(q > 0.0)) throw ValidationError("sum exponent q must be positive");
    const Grid& grid = seq.front().grid();
    for (const auto& u : seq) require_same_grid(grid, u.grid(), "mixed_lp_lq_norm");

    std::vector<double> pointwise(grid.size(), 0.0);
    for (const auto& u : seq) {
        for (std::size_t i = 0; i < pointwise.size(); ++i) {
            const double m = std::abs(u[i]);
            if (std::isinf(q))
                pointwise[i] = std::max(pointwise[i], m);
            else
                pointwise[i] += std::pow(m, q);
        }
    }
    if (!std::isinf(q))
        for (auto& v : pointwise) v = std::pow(v, 1.0 / q);
    return mixed_lp_norm(grid, pointwise, p);
}

// ---------------------------------------------------------------------------- pointwise operations

GridFunction truncate_halfspace(const GridFunction& u, std::size_t axis, Side side, double offset) {
    const Grid& grid = u.grid();
    if (axis >= grid.dim()) throw ValidationError("truncate_halfspace: axis out of range");
    if (offset < -grid.half_extent(axis) || offset >= grid.half_extent(axis))
        throw ValidationError("truncate_halfspace: offset lies outside the box");
    const double slack = 1e-9 * grid.spacing(axis);
    std::vector<cplx> v(u.values().begin(), u.values().end());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = grid.coordinate(axis, (i / grid.stride(axis)) % grid.samples(axis));
        const bool keep = side == Side::Plus ? x >= offset - slack : x <= offset + slack;
        if (!keep) v[i] = 0.0;
    }
    return GridFunction(grid, std::move(v));
}

GridFunction spectral_derivative(const GridFunction& u, std::span<const int> alpha) {
    const Grid& grid = u.grid();
    if (alpha.size() != grid.dim()) throw ValidationError("spectral_derivative: multi-index length mismatch");
    for (int a : alpha)
        if (a < 0) throw ValidationError("spectral_derivative: negative order");
    if (std::all_of(alpha.begin(), alpha.end(), [](int a) { return a == 0; })) return u;
    std::vector<cplx> symbol(grid.size(), 1.0);
    for (std::size_t i = 0; i < symbol.size(); ++i) {
        double s = 1.0;
        for (std::size_t axis = 0; axis < grid.dim(); ++axis) {
            if (alpha[axis] == 0) continue;
            s *= std::pow(grid.frequency(axis, (i / grid.stride(axis)) % grid.samples(axis)), alpha[axis]);
        }
        symbol[i] = s;
    }
    return apply_multiplier(u, symbol);
}

GridFunction spectral_laplacian(const GridFunction& u, int power, std::span<const std::size_t> axes) {
    const Grid& grid = u.grid();
    if (power < 0) throw ValidationError("spectral_laplacian: negative power");
    if (power == 0) return u;
    std::vector<std::size_t> used(axes.begin(), axes.end());
    if (used.empty())
        for (std::size_t a = 0; a < grid.dim(); ++a) used.push_back(a);
    std::vector<cplx> symbol(grid.size());
    for (std::size_t i = 0; i < symbol.size(); ++i) {
        double r2 = 0.0;
        for (auto axis : used) {
            if (axis >= grid.dim()) throw ValidationError("spectral_laplacian: axis out of range");
            const double xi = grid.frequency(axis, (i / grid.stride(axis)) % grid.samples(axis));
            r2 += xi * xi;
        }
        symbol[i] = std::pow(-r2, power);
    }
    return apply_multiplier(u, symbol);
}

GridFunction slice(const GridFunction& u, std::size_t axis, double x) {
    const Grid& grid = u.grid();
    if (axis >= grid.dim()) throw ValidationError("slice: axis out of range");
    const auto index = grid.lattice_index(axis, x);
    if (!index) {
        std::ostringstream msg;
        msg << "slice: no lattice point at x_" << axis << " = " << x;
        throw ValidationError(msg.str());
    }
    Grid reduced = grid.without_axis(axis);
    std::vector<cplx> v(reduced.size());
    const std::size_t stride = grid.stride(axis);
    const std::size_t n = grid.samples(axis);
    const std::size_t outer = grid.size() / (n * stride);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t r = 0; r < stride; ++r) v[o * stride + r] = u[o * n * stride + *index * stride + r];
    return GridFunction(std::move(reduced), std::move(v));
}

GridFunction lattice_shift(const GridFunction& u, std::span<const long> shift) {
    const Grid& grid = u.grid();
    if (shift.size() != grid.dim()) throw ValidationError("lattice_shift: one shift per axis required");
    std::vector<cplx> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t src = 0;
        for (std::size_t a = 0; a < grid.dim(); ++a) {
            const long n = static_cast<long>(grid.samples(a));
            const long m = static_cast<long>((i / grid.stride(a)) % grid.samples(a));
            const long from = ((m - shift[a]) % n + n) % n;
            src += static_cast<std::size_t>(from) * grid.stride(a);
        }
        v[i] = u[src];
    }
    return GridFunction(grid, std::move(v));
}

GridFunction move_axis(const GridFunction& u, std::size_t from, std::size_t to) {
    const Grid& grid = u.grid();
    if (from >= grid.dim() || to >= grid.dim()) throw ValidationError("move_axis: axis out of range");
    std::vector<std::size_t> order;
    for (std::size_t a = 0; a < grid.dim(); ++a)
        if (a != from) order.push_back(a);
    order.insert(order.begin() + static_cast<long>(to), from);

    std::vector<std::size_t> n;
    std::vector<double> half, w;
    for (auto a : order) {
        n.push_back(grid.samples(a));
        half.push_back(grid.half_extent(a));
        w.push_back(grid.weight(a));
    }
    std::optional<std::size_t> t;
    if (grid.time_axis()) {
        const auto pos = std::find(order.begin(), order.end(), *grid.time_axis()) - order.begin();
        t = static_cast<std::size_t>(pos);
    }
    Grid target(std::move(n), std::move(half), std::move(w), t);
    std::vector<cplx> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t src = 0;
        for (std::size_t k = 0; k < order.size(); ++k)
            src += ((i / target.stride(k)) % target.samples(k)) * grid.stride(order[k]);
        v[i] = u[src];
    }
    return GridFunction(std::move(target), std::move(v));
}

}  // namespace anisonorm

#pragma once

// Independent reference computations used by the tests. Nothing here calls the FFT.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "anisonorm/grid.hpp"

namespace oracle {

using anisonorm::cplx;
using anisonorm::Grid;
using anisonorm::GridFunction;

inline double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

inline double max_abs_diff(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// conv[m] = prod h * sum_{m'} f[(m - m' + N/2) mod N] g[m'], by nested loops.
inline GridFunction direct_convolution(const GridFunction& f, const GridFunction& g) {
    const Grid& grid = f.grid();
    std::vector<cplx> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto mi = grid.unravel(i);
        cplx acc = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const auto mk = grid.unravel(k);
            std::size_t src = 0;
            for (std::size_t a = 0; a < grid.dim(); ++a) {
                const std::size_t n = grid.samples(a);
                src += ((mi[a] + n - mk[a] + n / 2) % n) * grid.stride(a);
            }
            acc += f[src] * g[k];
        }
        out[i] = acc * grid.cell_volume();
    }
    return GridFunction(grid, std::move(out));
}

/// Iterated Riemann sums by explicit recursion over axes, axis 0 innermost.
inline double nested_norm(const GridFunction& u, const std::vector<double>& p, std::size_t axis,
                          std::vector<std::size_t>& idx) {
    const Grid& grid = u.grid();
    const std::size_t n = grid.samples(axis);
    double acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        idx[axis] = m;
        double v;
        if (axis == 0) {
            std::size_t flat = 0;
            for (std::size_t a = 0; a < grid.dim(); ++a) flat += idx[a] * grid.stride(a);
            v = std::abs(u[flat]);
        } else {
            v = nested_norm(u, p, axis - 1, idx);
        }
        if (std::isinf(p[axis]))
            acc = std::max(acc, v);
        else
            acc += std::pow(v, p[axis]) * grid.spacing(axis);
    }
    return std::isinf(p[axis]) ? acc : std::pow(acc, 1.0 / p[axis]);
}

inline double nested_norm(const GridFunction& u, const std::vector<double>& p) {
    std::vector<std::size_t> idx(u.grid().dim(), 0);
    return nested_norm(u, p, u.grid().dim() - 1, idx);
}

/// Direct sum  prod h * sum_x u(x) e^{-i x.xi}  at one frequency.
inline cplx direct_transform(const GridFunction& u, const std::vector<double>& xi) {
    const Grid& grid = u.grid();
    cplx acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto x = grid.point(i);
        double phase = 0.0;
        for (std::size_t a = 0; a < x.size(); ++a) phase += x[a] * xi[a];
        acc += u[i] * std::polar(1.0, -phase);
    }
    return acc * grid.cell_volume();
}

/// exp(-|x - c|^2 / (2 var)) and its continuum transform.
inline double gaussian(std::span<const double> x, double var, std::span<const double> c = {}) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - (c.empty() ? 0.0 : c[i]);
        r2 += d * d;
    }
    return std::exp(-r2 / (2.0 * var));
}

inline double gaussian_transform(std::span<const double> xi, double var) {
    double r2 = 0.0;
    for (double v : xi) r2 += v * v;
    return std::pow(2.0 * std::numbers::pi * var, 0.5 * static_cast<double>(xi.size())) * std::exp(-0.5 * var * r2);
}

/// Random trigonometric polynomial whose frequencies satisfy |k_i| <= kmax_i.
inline GridFunction random_band_limited(const Grid& grid, const std::vector<int>& kmax, std::mt19937_64& rng,
                                        int terms = 12) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<std::vector<int>> ks;
    std::vector<cplx> amps;
    for (int t = 0; t < terms; ++t) {
        std::vector<int> k(grid.dim());
        for (std::size_t a = 0; a < grid.dim(); ++a) {
            std::uniform_int_distribution<int> pick(-kmax[a], kmax[a]);
            k[a] = pick(rng);
        }
        ks.push_back(k);
        amps.emplace_back(unit(rng), unit(rng));
    }
    return GridFunction::sample(grid, [&](std::span<const double> x) {
        cplx acc = 0.0;
        for (std::size_t t = 0; t < ks.size(); ++t) {
            double phase = 0.0;
            for (std::size_t a = 0; a < x.size(); ++a)
                phase += std::numbers::pi * ks[t][a] * x[a] / grid.half_extent(a);
            acc += amps[t] * std::polar(1.0, phase);
        }
        return acc;
    });
}

inline GridFunction random_samples(const Grid& grid, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    std::vector<cplx> v(grid.size());
    for (auto& x : v) x = {gauss(rng), gauss(rng)};
    return GridFunction(grid, std::move(v));
}

}  // namespace oracle

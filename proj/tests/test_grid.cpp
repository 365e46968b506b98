#include <cmath>
#include <numbers>
#include <random>
#include <cstring>
#include <sstream>

#include "anisonorm/agf.hpp"
#include "anisonorm/anisotropy.hpp"
#include "anisonorm/errors.hpp"
#include "anisonorm/grid.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace anisonorm;

namespace {

std::vector<Grid> small_grids() {
    return {
        Grid({16}, {3.0}),
        Grid({64}, {5.0}),
        Grid({8, 16}, {2.0, 3.0}),
        Grid({32, 32}, {4.0, 1.5}),
        Grid({4, 8, 16}, {1.0, 2.0, 3.0}),
        Grid({16, 16, 16}, {2.0, 2.0, 2.0}),
    };
}

}  // namespace

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(Grid({6}, {1.0}), ValidationError);
    CHECK_THROWS_AS(Grid({2}, {1.0}), ValidationError);
    CHECK_THROWS_AS(Grid({8}, {0.0}), ValidationError);
    CHECK_THROWS_AS(Grid({8, 8}, {1.0, 1.0}, {}, 0), ValidationError);
    const Grid g({8, 16}, {2.0, 4.0}, {1.0, 2.0}, 1);
    CHECK(g.spacing(0) == 0.5);
    CHECK(g.coordinate(0, g.origin_index(0)) == 0.0);
    CHECK(g.frequency(1, 1) == doctest::Approx(std::numbers::pi / 4.0));
    CHECK(g.frequency_index(0, 7) == -1);
    CHECK(g.lattice_index(1, 0.5) == std::optional<std::size_t>(9));
    CHECK_FALSE(g.lattice_index(1, 0.3).has_value());
    CHECK_THROWS_AS(GridFunction(g, std::vector<cplx>(3)), ValidationError);
    std::vector<cplx> bad(g.size());
    bad[5] = std::nan("");
    CHECK_THROWS_AS(GridFunction(g, bad), ValidationError);
}

TEST_CASE("dft round trip, zero input, pure exponential") {
    std::mt19937_64 rng(1);
    for (const auto& grid : small_grids()) {
        const auto u = oracle::random_samples(grid, rng);
        const auto back = idft(dft(u));
        CHECK(oracle::max_abs_diff(back, u) <= 1e-12 * u.sup_norm());

        const auto zero = dft(GridFunction::zeros(grid));
        for (const auto& c : zero.coeffs) CHECK(c == cplx(0.0));
    }

    const Grid grid({16, 8}, {2.0, 3.0});
    const std::size_t b0 = 3, b1 = 6;  // bins k = (3, -2)
    const auto e = GridFunction::sample(grid, [&](std::span<const double> x) {
        return std::polar(1.0, grid.frequency(0, b0) * x[0] + grid.frequency(1, b1) * x[1]);
    });
    const auto spec = dft(e);
    for (std::size_t i = 0; i < spec.coeffs.size(); ++i) {
        const bool hit = i == b0 * grid.stride(0) + b1 * grid.stride(1);
        if (hit)
            CHECK(std::abs(spec.coeffs[i] - cplx(2.0 * 2.0 * 2.0 * 3.0)) < 1e-12);
        else
            CHECK(std::abs(spec.coeffs[i]) < 1e-12);
    }
}

TEST_CASE("dft agrees with the direct sum and with the Gaussian transform") {
    std::mt19937_64 rng(2);
    const Grid grid({8, 16}, {2.0, 3.0});
    const auto u = oracle::random_samples(grid, rng);
    const auto spec = dft(u);
    for (std::size_t i = 0; i < grid.size(); i += 5) {
        const auto want = oracle::direct_transform(u, grid.frequency_point(i));
        CHECK(std::abs(spec.coeffs[i] - want) <= 1e-12 * std::abs(want) + 1e-12);
    }

    const Grid wide({128, 128}, {12.0, 12.0});
    const double var = 1.3;
    const auto g = GridFunction::sample(wide, [&](std::span<const double> x) { return oracle::gaussian(x, var); });
    const auto G = dft(g);
    for (std::size_t i = 0; i < wide.size(); ++i) {
        const double want = oracle::gaussian_transform(wide.frequency_point(i), var);
        if (want > 1e-3) CHECK(std::abs(G.coeffs[i] - want) <= 1e-8 * want);
    }
}

TEST_CASE("Parseval") {
    std::mt19937_64 rng(3);
    for (const auto& grid : small_grids()) {
        const auto u = oracle::random_samples(grid, rng);
        const auto U = dft(u);
        double lhs = 0.0, rhs = 0.0, volume = 1.0;
        for (const auto& v : u.values()) lhs += std::norm(v);
        for (const auto& v : U.coeffs) rhs += std::norm(v);
        for (std::size_t a = 0; a < grid.dim(); ++a) volume *= 2.0 * grid.half_extent(a);
        lhs *= grid.cell_volume();
        rhs /= volume;
        CHECK(oracle::rel_err(lhs, rhs) <= 1e-12);
    }
}

TEST_CASE("convolution equals the nested-sum oracle on every grid up to 4096 points") {
    std::mt19937_64 rng(4);
    for (const auto& grid : small_grids()) {
        REQUIRE(grid.size() <= 4096);
        const auto f = oracle::random_samples(grid, rng);
        const auto g = oracle::random_samples(grid, rng);
        const auto fast = convolve(f, g);
        const auto slow = oracle::direct_convolution(f, g);
        CHECK(oracle::max_abs_diff(fast, slow) <= 1e-12 * slow.sup_norm());
    }
}

TEST_CASE("convolution identities") {
    std::mt19937_64 rng(5);
    const Grid grid({16, 32}, {2.0, 4.0});
    const auto f = oracle::random_samples(grid, rng);
    std::vector<cplx> d(grid.size());
    d[grid.origin_index(0) * grid.stride(0) + grid.origin_index(1)] = 1.0 / grid.cell_volume();
    const GridFunction delta(grid, d);
    CHECK(oracle::max_abs_diff(convolve(f, delta), f) <= 1e-12 * f.sup_norm());

    const auto g = oracle::random_samples(grid, rng);
    const std::vector<long> shift{3, -5};
    const auto lhs = convolve(lattice_shift(f, shift), g);
    const auto rhs = lattice_shift(convolve(f, g), shift);
    CHECK(oracle::max_abs_diff(lhs, rhs) <= 1e-12 * rhs.sup_norm());

    CHECK_THROWS_AS(convolve(f, GridFunction::zeros(Grid({16, 32}, {2.0, 5.0}))), ValidationError);

    // Gaussians: variances add.
    const Grid wide({128, 128}, {14.0, 14.0});
    const double v1 = 0.8, v2 = 1.7;
    const auto g1 = GridFunction::sample(wide, [&](std::span<const double> x) { return oracle::gaussian(x, v1); });
    const auto g2 = GridFunction::sample(wide, [&](std::span<const double> x) { return oracle::gaussian(x, v2); });
    const auto conv = convolve(g1, g2);
    const double c = 2.0 * std::numbers::pi * v1 * v2 / (v1 + v2);
    const auto want = GridFunction::sample(wide, [&](std::span<const double> x) { return c * oracle::gaussian(x, v1 + v2); });
    CHECK(oracle::max_abs_diff(conv, want) <= 1e-8 * want.sup_norm());
}

TEST_CASE("mixed norms") {
    const Grid grid({32, 32}, {2.0, 2.0});
    const auto indicator = GridFunction::sample(grid, [](std::span<const double> x) {
        return (x[0] >= 0.0 && x[0] < 1.0 && x[1] >= 0.0 && x[1] < 1.0) ? 1.0 : 0.0;
    });
    const std::vector<double> p12{1.0, 2.0};
    CHECK(mixed_lp_norm(indicator, p12) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(oracle::nested_norm(indicator, p12) == doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937_64 rng(6);
    const std::vector<std::vector<double>> exponents{{1.0, 2.0}, {3.0, 0.5}, {kInf, 1.5}, {2.0, kInf}, {0.7, 0.7}};
    for (const auto& grid2 : {Grid({16, 8}, {1.0, 3.0}), Grid({4, 32}, {2.0, 0.5})}) {
        const auto u = oracle::random_samples(grid2, rng);
        for (const auto& p : exponents) CHECK(oracle::rel_err(mixed_lp_norm(u, p), oracle::nested_norm(u, p)) <= 1e-12);
    }
    const Grid g3({4, 8, 16}, {1.0, 2.0, 3.0});
    const auto u3 = oracle::random_samples(g3, rng);
    const std::vector<double> p3{1.5, kInf, 0.8};
    CHECK(oracle::rel_err(mixed_lp_norm(u3, p3), oracle::nested_norm(u3, p3)) <= 1e-12);

    // separable functions factor
    const Grid gx({32}, {3.0}), gy({16}, {2.0});
    const auto f = GridFunction::sample(gx, [](std::span<const double> x) { return std::exp(-x[0] * x[0]); });
    const auto g = GridFunction::sample(gy, [](std::span<const double> x) { return 1.0 / (1.0 + x[0] * x[0]); });
    const auto fg = GridFunction::sample(Grid({32, 16}, {3.0, 2.0}),
                                         [](std::span<const double> x) {
                                             return std::exp(-x[0] * x[0]) / (1.0 + x[1] * x[1]);
                                         });
    const std::vector<double> p1{3.0}, p2{1.5}, pfg{3.0, 1.5};
    CHECK(oracle::rel_err(mixed_lp_norm(fg, pfg), mixed_lp_norm(f, p1) * mixed_lp_norm(g, p2)) <= 1e-12);

    // unmixed reduction against a flat sum
    const auto u = oracle::random_samples(grid, rng);
    double flat = 0.0;
    for (const auto& v : u.values()) flat += std::pow(std::abs(v), 2.5);
    flat = std::pow(flat * grid.cell_volume(), 1.0 / 2.5);
    const std::vector<double> pp{2.5, 2.5};
    CHECK(oracle::rel_err(mixed_lp_norm(u, pp), flat) <= 1e-12);
}

TEST_CASE("mixed norm properties") {
    std::mt19937_64 rng(8);
    const Grid grid({16, 16}, {2.0, 3.0});
    std::uniform_real_distribution<double> pick(0.3, 4.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<double> p{pick(rng), pick(rng)};
        const auto u = oracle::random_samples(grid, rng);
        const auto v = oracle::random_samples(grid, rng);
        const cplx c(pick(rng), -pick(rng));
        CHECK(oracle::rel_err(mixed_lp_norm(u.scaled(c), p), std::abs(c) * mixed_lp_norm(u, p)) <= 1e-12);

        const double d = std::min({1.0, p[0], p[1]});
        const double lhs = std::pow(mixed_lp_norm(u + v, p), d);
        const double rhs = std::pow(mixed_lp_norm(u, p), d) + std::pow(mixed_lp_norm(v, p), d);
        CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
}

TEST_CASE("mixed lp(lq) norms") {
    std::mt19937_64 rng(9);
    const Grid grid({16, 8}, {2.0, 1.0});
    const std::vector<double> p{1.5, 3.0};
    const auto u = oracle::random_samples(grid, rng);
    const std::vector<GridFunction> one{u};
    CHECK(oracle::rel_err(mixed_lp_lq_norm(one, p, 2.0), mixed_lp_norm(u, p)) <= 1e-14);

    const std::vector<GridFunction> two{u, u.scaled(0.5)};
    CHECK(oracle::rel_err(mixed_lp_lq_norm(two, p, kInf), mixed_lp_norm(u, p)) <= 1e-14);

    const std::vector<GridFunction> many(5, u);
    CHECK(oracle::rel_err(mixed_lp_lq_norm(many, p, 3.0), std::pow(5.0, 1.0 / 3.0) * mixed_lp_norm(u, p)) <= 1e-12);
    CHECK_THROWS_AS(mixed_lp_lq_norm(std::vector<GridFunction>{}, p, 2.0), ValidationError);
}

TEST_CASE("half-space truncation") {
    const Grid grid({8, 16}, {1.0, 2.0});
    const auto one = GridFunction::sample(grid, [](std::span<const double>) { return 1.0; });
    const auto t = truncate_halfspace(one, 1, Side::Plus, 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(t[i] == cplx(grid.point(i)[1] >= 0.0 ? 1.0 : 0.0));
    CHECK(oracle::max_abs_diff(truncate_halfspace(t, 1, Side::Plus, 0.0), t) == 0.0);
    const auto m = truncate_halfspace(one, 0, Side::Minus, 0.25);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(m[i] == cplx(grid.point(i)[0] <= 0.25 ? 1.0 : 0.0));
    CHECK_THROWS_AS(truncate_halfspace(one, 2, Side::Plus, 0.0), ValidationError);
    CHECK_THROWS_AS(truncate_halfspace(one, 0, Side::Plus, 5.0), ValidationError);
}

TEST_CASE("spectral derivatives") {
    const Grid grid({128, 64}, {12.0, 12.0});
    const std::vector<int> zero{0, 0};
    std::mt19937_64 rng(10);
    const auto r = oracle::random_samples(grid, rng);
    CHECK(oracle::max_abs_diff(spectral_derivative(r, zero), r) == 0.0);

    const std::size_t b = 5;
    const auto e = GridFunction::sample(grid, [&](std::span<const double> x) {
        return std::polar(1.0, grid.frequency(0, b) * x[0]);
    });
    const std::vector<int> e1{1, 0};
    CHECK(oracle::max_abs_diff(spectral_derivative(e, e1), e.scaled(grid.frequency(0, b))) <= 1e-12);

    // (-i d/dx)^2 = -d^2/dx^2 of exp(-x^2/2 - y^2/2): -(x^2 - 1) g
    const auto g = GridFunction::sample(grid, [](std::span<const double> x) { return oracle::gaussian(x, 1.0); });
    const std::vector<int> a20{2, 0};
    const auto want = GridFunction::sample(grid, [](std::span<const double> x) {
        return -(x[0] * x[0] - 1.0) * oracle::gaussian(x, 1.0);
    });
    CHECK(oracle::max_abs_diff(spectral_derivative(g, a20), want) <= 1e-8);

    const auto lap = spectral_laplacian(g, 1);
    const auto want_lap = GridFunction::sample(grid, [](std::span<const double> x) {
        return (x[0] * x[0] + x[1] * x[1] - 2.0) * oracle::gaussian(x, 1.0);
    });
    CHECK(oracle::max_abs_diff(lap, want_lap) <= 1e-8);
}

TEST_CASE("slice, shift and axis moves") {
    const Grid grid({8, 16, 4}, {1.0, 2.0, 3.0}, {1.0, 1.0, 2.0}, 2);
    std::mt19937_64 rng(11);
    const auto u = oracle::random_samples(grid, rng);
    const auto s = slice(u, 1, 0.5);
    CHECK(s.grid().dim() == 2);
    CHECK(s.grid().time_axis() == std::optional<std::size_t>(1));
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto idx = s.grid().unravel(i);
        CHECK(s[i] == u[idx[0] * grid.stride(0) + 10 * grid.stride(1) + idx[1]]);
    }
    CHECK_THROWS_AS(slice(u, 1, 0.3), ValidationError);

    const auto moved = move_axis(u, 0, 1);
    CHECK(moved.grid().samples() == std::vector<std::size_t>{16, 8, 4});
    const auto back = move_axis(moved, 1, 0);
    CHECK(back.grid() == grid);
    CHECK(oracle::max_abs_diff(back, u) == 0.0);

    const std::vector<long> sh{1, -2, 3};
    const std::vector<long> unsh{-1, 2, -3};
    CHECK(oracle::max_abs_diff(lattice_shift(lattice_shift(u, sh), unsh), u) == 0.0);
}

TEST_CASE("AGF round trip is bit exact and malformed files are rejected") {
    const Grid grid({4, 8, 16}, {1.0, 2.5, 3.0}, {1.0, 1.0, 2.0}, 2);
    std::mt19937_64 rng(12);
    const auto u = oracle::random_samples(grid, rng);
    std::stringstream buf;
    write_agf(u, buf);
    const std::string bytes = buf.str();
    CHECK(bytes.size() == 4 + 4 + 3 * 21 + grid.size() * 16);
    CHECK(bytes.substr(0, 4) == "AGF1");
    std::stringstream in(bytes);
    const auto v = read_agf(in);
    CHECK(v.grid() == grid);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::memcmp(&u[i], &v[i], sizeof(cplx)) == 0);

    std::string bad_magic = bytes;
    bad_magic[3] = '2';
    std::stringstream s1(bad_magic);
    CHECK_THROWS_AS(read_agf(s1), ValidationError);

    std::stringstream s2(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_agf(s2), ValidationError);

    std::string odd = bytes;
    odd[8] = 6;  // first axis N = 6
    std::stringstream s3(odd);
    CHECK_THROWS_AS(read_agf(s3), ValidationError);
}

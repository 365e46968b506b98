#include <cmath>
#include <numbers>
#include <random>

#include "anisonorm/decomposition.hpp"
#include "anisonorm/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace anisonorm;

namespace {

const Anisotropy kParabolic({1.0, 2.0});

Grid plane() { return Grid({32, 32}, {8.0, 4.0}); }

// Single exponential at the given bins.
GridFunction exponential(const Grid& grid, std::size_t b0, std::size_t b1) {
    return GridFunction::sample(grid, [&](std::span<const double> x) {
        return std::polar(1.0, grid.frequency(0, b0) * x[0] + grid.frequency(1, b1) * x[1]);
    });
}

}  // namespace

TEST_CASE("ramp profiles") {
    for (auto kind : {RampKind::Smoothstep, RampKind::Cosine}) {
        CHECK(ramp(kind, 0.0) == 1.0);
        CHECK(ramp(kind, 1.0) == 1.0);
        CHECK(ramp(kind, 1.5) == 0.0);
        CHECK(ramp(kind, 1.25) == doctest::Approx(0.5));
        double prev = 1.0;
        for (double r = 1.0; r <= 1.5; r += 0.01) {
            CHECK(ramp(kind, r) <= prev);
            prev = ramp(kind, r);
        }
    }
    CHECK(ramp_kind_from_string("cosine") == RampKind::Cosine);
    CHECK_THROWS_AS(ramp_kind_from_string("linear"), ValidationError);
}

TEST_CASE("partition of unity") {
    const auto grid = plane();
    const auto part = build_partition(kParabolic, grid);
    CHECK(part.J == default_level(kParabolic, grid));
    CHECK(std::exp2(part.J) >= part.max_radius());
    CHECK(std::exp2(part.J - 1) < part.max_radius());

    // at the origin (bin 0) only the first window is on
    CHECK(part.windows[0][0] == 1.0);
    for (int j = 1; j <= part.J; ++j) CHECK(part.windows[static_cast<std::size_t>(j)][0] == 0.0);

    for (std::size_t i = 0; i < grid.size(); ++i) {
        double sum = 0.0;
        for (const auto& w : part.windows) sum += w[i];
        CHECK(std::abs(sum - 1.0) <= 1e-14);
        const double r = part.radius[i];
        if (part.windows[0][i] != 0.0) CHECK(r <= 1.5);
        for (int j = 1; j <= part.J; ++j)
            if (part.windows[static_cast<std::size_t>(j)][i] != 0.0) {
                CHECK(r >= std::exp2(j - 1) * (1 - 1e-12));
                CHECK(r <= 3.0 * std::exp2(j - 1) * (1 + 1e-12));
            }
    }
}

TEST_CASE("windows are dilates of the first corona") {
    const Anisotropy a({1.0, 2.0});
    for (int j = 2; j <= 5; ++j)
        for (double xi1 : {0.3, 1.1, 2.7})
            for (double xi2 : {0.0, 0.8, 3.5}) {
                const std::vector<double> xi{xi1 * std::exp2(j - 1), xi2 * std::exp2(2.0 * (j - 1))};
                const std::vector<double> base{xi1, xi2};
                CHECK(window_at(RampKind::Smoothstep, j, aniso_distance(xi, a)) ==
                      doctest::Approx(window_at(RampKind::Smoothstep, 1, aniso_distance(base, a))).epsilon(1e-9));
            }
}

TEST_CASE("band decomposition") {
    const auto grid = plane();
    const auto part = build_partition(kParabolic, grid);

    // spectrum inside the unit ball: only band 0
    const auto low = exponential(grid, 1, 0);
    REQUIRE(aniso_distance(grid.frequency_point(grid.stride(0)), kParabolic) <= 1.0);
    const auto bands = lp_bands(low, part);
    CHECK(oracle::max_abs_diff(bands.bands[0], low) <= 1e-13);
    for (std::size_t j = 1; j < bands.bands.size(); ++j) CHECK(bands.bands[j].sup_norm() <= 1e-13);

    // a frequency at radius exactly 2^j lives in bands j and j+1 only
    const Grid g1({64}, {std::numbers::pi});  // xi_k = k
    const auto part1 = build_partition(Anisotropy::isotropic(1), g1);
    const auto e4 = GridFunction::sample(g1, [](std::span<const double> x) { return std::polar(1.0, 4.0 * x[0]); });
    const auto b4 = lp_bands(e4, part1);
    for (std::size_t j = 0; j < b4.bands.size(); ++j) {
        const bool allowed = j == 2 || j == 3;
        if (!allowed) CHECK(b4.bands[j].sup_norm() <= 1e-13);
    }
    CHECK(b4.bands[2].sup_norm() > 0.5);

    // random band-limited input is reproduced
    std::mt19937_64 rng(21);
    const auto u = oracle::random_band_limited(grid, {15, 15}, rng);
    const auto all = lp_bands(u, part);
    CHECK(oracle::max_abs_diff(all.sum(), u) <= 1e-10 * u.sup_norm());
    CHECK_THROWS_AS(lp_bands(GridFunction::zeros(Grid({16, 16}, {1.0, 1.0})), part), ValidationError);
}

TEST_CASE("F and B norms") {
    const auto grid = plane();
    const auto part = build_partition(kParabolic, grid);
    const SpaceParams F(1.5, kParabolic, {2.0, 3.0}, 2.0, ScaleKind::F);
    const SpaceParams B = F.with_kind(ScaleKind::B);

    CHECK(f_norm(GridFunction::zeros(grid), F, part) == 0.0);
    CHECK_THROWS_AS(f_norm(GridFunction::zeros(grid), B, part), ValidationError);
    CHECK_THROWS_AS(b_norm(GridFunction::zeros(grid), F, part), ValidationError);

    const auto low = exponential(grid, 1, 31);
    CHECK(oracle::rel_err(f_norm(low, F, part), mixed_lp_norm(low, F.p)) <= 1e-12);
    CHECK(oracle::rel_err(b_norm(low, B, part), f_norm(low, F, part)) <= 1e-12);

    std::mt19937_64 rng(22);
    const auto u = oracle::random_band_limited(grid, {15, 15}, rng);
    const auto bands = lp_bands(u, part);
    double sup = 0.0;
    for (std::size_t j = 0; j < bands.bands.size(); ++j)
        sup = std::max(sup, std::exp2(1.5 * static_cast<double>(j)) * mixed_lp_norm(bands.bands[j], B.p));
    const SpaceParams Binf(1.5, kParabolic, {2.0, 3.0}, kInf, ScaleKind::B);
    CHECK(oracle::rel_err(b_norm(u, Binf, part), sup) <= 1e-12);

    double prev = 0.0;
    for (double s = -1.0; s <= 2.0; s += 0.5) {
        const double now = b_norm(u, B.with_s(s), part);
        CHECK(now >= prev);
        prev = now;
    }

    // F-norm by an independent per-point loop
    std::vector<double> g(grid.size(), 0.0);
    for (std::size_t j = 0; j < bands.bands.size(); ++j)
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] += std::pow(std::exp2(1.5 * static_cast<double>(j)) * std::abs(bands.bands[j][i]), 2.0);
    std::vector<cplx> gv(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) gv[i] = std::sqrt(g[i]);
    CHECK(oracle::rel_err(f_norm(u, F, part), oracle::nested_norm(GridFunction(grid, gv), F.p)) <= 1e-12);
}

TEST_CASE("quasi-norm subadditivity on random pairs") {
    const auto grid = plane();
    const auto part = build_partition(kParabolic, grid);
    std::mt19937_64 rng(23);
    for (const auto& params : {SpaceParams(0.5, kParabolic, {0.6, 2.0}, 0.8, ScaleKind::F),
                               SpaceParams(1.0, kParabolic, {2.0, 1.5}, 0.5, ScaleKind::B),
                               SpaceParams(-0.5, kParabolic, {3.0, 2.0}, 2.0, ScaleKind::F)}) {
        const double d = params.subadditivity_exponent();
        for (int trial = 0; trial < 5; ++trial) {
            const auto u = oracle::random_band_limited(grid, {15, 15}, rng);
            const auto v = oracle::random_band_limited(grid, {15, 15}, rng);
            const double lhs = std::pow(space_norm(u + v, params, part), d);
            const double rhs = std::pow(space_norm(u, params, part), d) + std::pow(space_norm(v, params, part), d);
            CHECK(lhs <= rhs * (1 + 1e-12));
        }
    }
}

TEST_CASE("Peetre maximal function against brute force") {
    const Grid grid({16, 8}, {2.0, 1.0});
    std::mt19937_64 rng(24);
    const auto u = oracle::random_samples(grid, rng);
    const std::vector<double> r{1.5, 0.7};
    const Anisotropy a({1.0, 2.0});
    for (int j : {0, 1, 3}) {
        const auto m = peetre_maximal(u, a, r, j);
        for (std::size_t x = 0; x < grid.size(); ++x) {
            const auto px = grid.unravel(x);
            double best = 0.0;
            for (std::size_t y = 0; y < grid.size(); ++y) {
                const auto py = grid.unravel(y);
                double w = 1.0;
                for (std::size_t l = 0; l < 2; ++l) {
                    const std::size_t n = grid.samples(l);
                    const std::size_t k = (px[l] + n - py[l]) % n;
                    const double dist = static_cast<double>(std::min(k, n - k)) * grid.spacing(l);
                    w *= std::pow(1.0 + std::exp2(j * a[l]) * dist, r[l]);
                }
                best = std::max(best, std::abs(u[y]) / w);
            }
            CHECK(m[x].real() == doctest::Approx(best).epsilon(1e-14));
            CHECK(m[x].real() >= std::abs(u[x]));
        }
        const std::vector<double> r2{3.0, 1.4};
        const auto m2 = peetre_maximal(u, a, r2, j);
        for (std::size_t x = 0; x < grid.size(); ++x) CHECK(m2[x].real() <= m[x].real());
    }

    std::vector<cplx> d(grid.size());
    d[grid.origin_index(0) * grid.stride(0) + grid.origin_index(1)] = 1.0;
    const auto md = peetre_maximal(GridFunction(grid, d), a, r, 2);
    for (std::size_t x = 0; x < grid.size(); ++x) {
        const auto p = grid.point(x);
        const double want = std::pow(1.0 + 4.0 * std::abs(p[0]), -1.5) * std::pow(1.0 + 16.0 * std::abs(p[1]), -0.7);
        CHECK(md[x].real() == doctest::Approx(want).epsilon(1e-14));
    }
    CHECK_THROWS_AS(peetre_maximal(u, a, std::vector<double>{1.0, 0.0}, 0), ValidationError);
}

TEST_CASE("pointwise multiplier report") {
    const auto grid = plane();
    const auto part = build_partition(kParabolic, grid);
    const SpaceParams F(1.0, kParabolic, {2.0, 2.0}, 2.0, ScaleKind::F);
    std::mt19937_64 rng(25);
    const auto v = oracle::random_band_limited(grid, {6, 6}, rng);
    const auto one = GridFunction::sample(grid, [](std::span<const double>) { return 1.0; });
    CHECK(pointwise_multiply_report(one, v, F, part).ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pointwise_multiply_report(one.scaled(-2.5), v, F, part).ratio == doctest::Approx(2.5).epsilon(1e-12));
    const auto rep = pointwise_multiply_report(one.scaled(3.0), v, F, part);
    CHECK(rep.bound_proxy == doctest::Approx(3.0));
}

TEST_CASE("trace condition thresholds") {
    const Anisotropy a({1.0, 1.0, 2.0});
    const SpaceParams p(1.2, a, {2.0, 2.0, 2.0}, 2.0, ScaleKind::F);
    auto r0 = validate_trace_conditions(p, TraceCondition::R0);
    CHECK(r0.threshold == doctest::Approx(1.0));
    CHECK(r0.ok);
    CHECK_FALSE(validate_trace_conditions(p.with_s(1.0), TraceCondition::R0).ok);

    const SpaceParams ones(2.0, a, {1.0, 1.0, 1.0}, 1.0, ScaleKind::F);
    CHECK(validate_trace_conditions(ones, TraceCondition::Gamma).threshold == doctest::Approx(1.0));

    const SpaceParams half(2.0, a, {0.5, 0.5, 2.0}, 2.0, ScaleKind::F);
    const double base = validate_trace_conditions(p, TraceCondition::R0).threshold;
    CHECK(validate_trace_conditions(half, TraceCondition::R0).threshold == doctest::Approx(base + 2.0 * (2.0 - 1.0)));
    CHECK(validate_trace_conditions(half, TraceCondition::CornerCurved).threshold == doctest::Approx(1.0 + 1.0));
    CHECK(validate_trace_conditions(half, TraceCondition::CornerFlat).threshold == doctest::Approx(2.0 + 1.0));

    const SpaceParams mixed(2.0, a, {2.0, 3.0, 2.0}, 2.0, ScaleKind::F);
    CHECK_THROWS_AS(validate_trace_conditions(mixed, TraceCondition::R0), ValidationError);
    const SpaceParams skew(2.0, Anisotropy({1.0, 1.5, 2.0}), {2.0, 2.0, 2.0}, 2.0, ScaleKind::F);
    CHECK_THROWS_AS(validate_trace_conditions(skew, TraceCondition::Gamma), ValidationError);
}

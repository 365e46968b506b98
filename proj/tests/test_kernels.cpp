#include <cmath>
#include <numbers>
#include <random>

#include "anisonorm/decomposition.hpp"
#include "anisonorm/errors.hpp"
#include "anisonorm/kernels.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace anisonorm;

namespace {

KernelFamily plane_family(Side side, int L = 4) {
    KernelOptions o;
    o.L_max = L;
    o.support = 2.0;
    o.normal_axis = 1;
    o.side = side;
    return KernelFamily(Grid({256, 512}, {8.0, 8.0}), Anisotropy({1.0, 1.0}), o);
}

KernelFamily line_family(int L, double support = 2.0, std::size_t n = 8192) {
    KernelOptions o;
    o.L_max = L;
    o.support = support;
    o.normal_axis = 0;
    return KernelFamily(Grid({n}, {16.0}), Anisotropy({1.0}), o);
}

}  // namespace

TEST_CASE("stencil algebra") {
    const auto a = sampled_bump(1.0, 0.05, GeneratorShape::Plus);
    const auto b = sampled_bump(0.6, 0.05, GeneratorShape::Minus);
    CHECK(a.mass() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(a.first >= 1);
    CHECK(b.last() <= -1);
    const auto c = convolve(a, b);
    CHECK(c.mass() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(c.moment(1) == doctest::Approx(a.moment(1) + b.moment(1)).epsilon(1e-12));
    const auto s = a + scaled(b, -2.0);
    CHECK(s.mass() == doctest::Approx(-1.0).epsilon(1e-13));
    const auto centered = sampled_bump(1.0, 0.05, GeneratorShape::Centered);
    CHECK(std::abs(centered.moment(1)) < 1e-15);
    CHECK_THROWS_AS(convolve(a, sampled_bump(1.0, 0.1, GeneratorShape::Plus)), ValidationError);
}

TEST_CASE("generators have unit mass and vanishing moments") {
    const auto g1 = build_generator(1, Grid({512}, {4.0}));
    CHECK(g1.moments[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(g1.moments[1]) <= 1e-10 * g1.g.abs_mass());
    CHECK(g1.coefficients.size() == 2);

    for (int L = 1; L <= 12; ++L) {
        for (auto shape : {GeneratorShape::Minus, GeneratorShape::Plus, GeneratorShape::Centered}) {
            const auto g = build_generator(L, 1.0 / (16.0 * L), shape, 1.0);
            CHECK(g.moments[0] == doctest::Approx(1.0).epsilon(1e-13));
            for (int k = 1; k <= L; ++k) CHECK(std::abs(g.moments[static_cast<std::size_t>(k)]) <= 1e-10 * g.g.abs_mass());
            CHECK(g.relative_next_moment > 0.0);
            CHECK(g.condition < 1e12);
            if (shape == GeneratorShape::Minus) {
                CHECK(g.g.last() <= -1);
                CHECK(static_cast<double>(g.g.first) * 1.0 / (16.0 * L) >= -1.0 - 1e-12);
            }
            if (shape == GeneratorShape::Plus) CHECK(g.g.first >= 1);
        }
    }
    CHECK_THROWS_AS(build_generator(0, 0.01), ValidationError);
    CHECK_THROWS_AS(build_generator(4, 0.2), NumericalGuardError);
    CHECK_THROWS_AS(build_generator(2, Grid({64, 64}, {1.0, 1.0})), ValidationError);
}

TEST_CASE("moment system guard trips for excessive orders") {
    bool tripped = false;
    try {
        build_generator(24, 1.0 / 2000.0, GeneratorShape::Centered, 1.0);
    } catch (const NumericalGuardError& e) {
        tripped = std::string(e.what()).find("ill-conditioned") != std::string::npos;
    }
    CHECK(tripped);
}

TEST_CASE("kernel supports lie in the declared half-space") {
    for (auto side : {Side::Minus, Side::Plus}) {
        const auto fam = plane_family(side);
        REQUIRE(fam.max_level() >= 1);
        for (const auto& k : {fam.phi0(), fam.psi0()}) {
            CHECK(fam.outside_mass(k) == 0.0);
            CHECK(k.sup_norm() > 0.0);
        }
        for (int j = 0; j <= fam.max_level(); ++j) {
            CHECK(fam.outside_mass(fam.phi(j)) == 0.0);
            CHECK(fam.outside_mass(fam.psi(j)) == 0.0);
        }
        // the mother kernels live at level -1 and need a wider box
        CHECK_THROWS_AS(fam.psi_mother(), ValidationError);
    }
    const auto wide = line_family(4);
    for (const auto& k : {wide.phi_mother(), wide.psi_mother()}) {
        CHECK(wide.outside_mass(k) == 0.0);
        CHECK(std::abs(dft(k).coeffs[0]) <= 1e-12);
    }
}

TEST_CASE("phi has vanishing moments along every axis") {
    const auto fam = plane_family(Side::Minus);
    for (int j = 0; j <= fam.max_level(); ++j) {
        for (std::size_t a = 0; a < 2; ++a) {
            const auto& fine = fam.axis_kernel(j, a);
            const auto diff = fine + scaled(fam.axis_kernel(j - 1, a), -1.0);
            CHECK(fine.mass() == doctest::Approx(1.0).epsilon(1e-12));
            for (int k = 0; k <= fam.L_max(); ++k) CHECK(std::abs(diff.moment(k)) <= 1e-10 * diff.abs_mass());
        }
    }
    const auto phi_hat = fam.phi_symbol(1);
    CHECK(std::abs(phi_hat[0]) <= 1e-14);
    CHECK(std::abs(fam.psi_symbol(0)[0] - 1.0) <= 1e-13);
}

TEST_CASE("physical kernels match their symbols") {
    const auto fam = plane_family(Side::Minus);
    for (int j = 0; j <= fam.max_level(); ++j) {
        for (const auto& [kernel, symbol] :
             {std::pair{fam.phi(j), fam.phi_symbol(j)}, std::pair{fam.psi(j), fam.psi_symbol(j)}}) {
            const auto spec = dft(kernel);
            double worst = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < symbol.size(); ++i) {
                worst = std::max(worst, std::abs(spec.coeffs[i] - symbol[i]));
                scale = std::max(scale, std::abs(symbol[i]));
            }
            CHECK(worst <= 1e-12 * scale);
        }
        // psi_j phi_j against the expanded product
        if (j >= 1) {
            const auto A = fam.level_symbol(j), B = fam.level_symbol(j - 1);
            const auto p = fam.phi_symbol(j), s = fam.psi_symbol(j);
            for (std::size_t i = 0; i < A.size(); ++i) {
                const cplx a2 = A[i] * A[i], b2 = B[i] * B[i];
                CHECK(std::abs(s[i] * p[i] - (2.0 * (a2 - b2) - (a2 * a2 - b2 * b2))) <= 1e-12);
            }
        }
    }
}

TEST_CASE("telescoping identity") {
    for (const auto& fam : {plane_family(Side::Minus), plane_family(Side::Plus), line_family(4)}) {
        CHECK(verify_telescoping(fam, 1) <= 1e-12);
        for (int N = 1; N <= fam.max_level() + 1; ++N) {
            CHECK(verify_telescoping(fam, N) <= 1e-11);
            CHECK(std::abs(fam.calderon_symbol(N - 1)[0] - 1.0) <= 1e-13);
        }
    }
}

TEST_CASE("Calderon reconstruction") {
    const auto fam = line_family(4);
    const Grid& grid = fam.grid();
    CHECK(calderon_reconstruct(GridFunction::zeros(grid), fam, 0).sup_norm() == 0.0);
    CHECK_THROWS_AS(calderon_reconstruct(GridFunction::zeros(grid), fam, fam.max_level() + 1), NumericalGuardError);
    CHECK_THROWS_AS(calderon_reconstruct(GridFunction::zeros(Grid({64}, {16.0})), fam, 0), ValidationError);

    for (double sigma : {0.1, 0.3, 1.0}) {
        const auto u = GridFunction::sample(
            grid, [&](std::span<const double> x) { return std::exp(-x[0] * x[0] / (2 * sigma * sigma)); });
        const auto r = reconstruction_residuals(u, fam, fam.max_level());
        for (std::size_t J = 1; J < r.size(); ++J)
            if (r[J - 1] > 1e-12) CHECK(r[J] <= r[J - 1]);

        // the residual is the inverse transform of (1 - A_J^2)^2 times the spectrum
        for (int J = 0; J <= fam.max_level(); ++J) {
            const auto A = fam.level_symbol(J);
            auto U = dft(u);
            for (std::size_t i = 0; i < A.size(); ++i) {
                const cplx d = 1.0 - A[i] * A[i];
                U.coeffs[i] *= d * d;
            }
            const auto direct = u - calderon_reconstruct(u, fam, J);
            CHECK(oracle::max_abs_diff(direct, idft(U)) <= 1e-12 * u.sup_norm());
        }
    }
}

TEST_CASE("half-space kernels preserve half-space supports") {
    const auto fam = plane_family(Side::Plus);
    const Grid& grid = fam.grid();
    const double c = 1.0;
    const auto f = GridFunction::sample(grid, [&](std::span<const double> x) {
        const double t = x[1] - c;
        return t < 0.0 ? 0.0 : t * std::exp(-x[0] * x[0] - 2.0 * t * t);
    });
    for (int j = 0; j <= fam.max_level(); ++j) {
        for (const auto& k : {fam.phi(j), fam.psi(j)}) {
            const auto conv = convolve(k, f);
            double leak = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i)
                if (grid.point(i)[1] < c - 1e-12) leak = std::max(leak, std::abs(conv[i]));
            CHECK(leak <= 1e-11 * f.sup_norm() * k.sup_norm());
        }
    }
}

TEST_CASE("local means") {
    const Grid grid({32, 32}, {4.0, 4.0});
    const auto k0 = GridFunction::sample(grid, [](std::span<const double> x) { return oracle::gaussian(x, 0.3); });
    const auto lm = local_means_kernels(k0, 2);
    const auto K = dft(lm.k);
    const auto K0 = dft(k0);
    CHECK(std::abs(K.coeffs[0]) <= 1e-12);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto xi = grid.frequency_point(i);
        const double r2 = xi[0] * xi[0] + xi[1] * xi[1];
        CHECK(std::abs(K.coeffs[i] - r2 * r2 * K0.coeffs[i]) <= 1e-12 * (1.0 + r2 * r2) * std::abs(K0.coeffs[0]));
    }
    CHECK_THROWS_AS(local_means_kernels(k0, 0), ValidationError);
    CHECK_THROWS_AS(local_means_kernels(lm.k, 1), ValidationError);

    const SpaceParams F(1.0, Anisotropy({1.0, 1.0}), {2.0, 2.0}, 2.0, ScaleKind::F);
    CHECK(localized_norm(GridFunction::zeros(grid), lm, F) == 0.0);
    std::mt19937_64 rng(31);
    const auto f = oracle::random_band_limited(grid, {8, 8}, rng);
    CHECK(localized_norm(f.scaled(cplx(0.0, -3.0)), lm, F) == doctest::Approx(3.0 * localized_norm(f, lm, F)).epsilon(1e-12));
    CHECK_THROWS_AS(localized_norm(f, lm, F.with_s(4.0)), ValidationError);
    CHECK(localized_norm(f, lm, F.with_kind(ScaleKind::B)) > 0.0);
}

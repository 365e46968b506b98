#pragma once

#include <vector>

#include "anisonorm/anisotropy.hpp"
#include "anisonorm/grid.hpp"

namespace anisonorm {

/// Data of the heat problem on the half-space model: axes (x', x_n) for u0,
/// (x', x_n, t) for g and (x', t) for phi, with the boundary at x_n = 0.
struct HeatData {
    GridFunction g;
    GridFunction phi;
    GridFunction u0;
    SpaceParams params;
};

struct CompatibilityEntry {
    int l = 0;
    bool admissible = true;
    double lhs = 0.0;  ///< sup of r_{0,Gamma} d_t^l phi
    double rhs = 0.0;  ///< sup of the corner trace of the initial and source terms
    double residual_sup = 0.0;
    double residual_l2 = 0.0;
};

struct CompatibilityReport {
    int l_max = -1;
    int J = -1;
    std::vector<CompatibilityEntry> entries;
};

/// Highest order the corner identity is checked at.
inline constexpr int kMaxCompatibilityOrder = 3;

/// Largest l with 2l below both thresholds, capped at kMaxCompatibilityOrder; -1 when none.
int admissible_l(const SpaceParams& params);

/// d_t^l phi at t = 0, the time axis being the last one.
GridFunction corner_trace_curved(const GridFunction& phi, int l, int l_max = kMaxCompatibilityOrder);

/// Restriction of u0 to x_n = 0, x_n being the last axis.
GridFunction corner_trace_flat(const GridFunction& u0);

/// r_{0,Gamma} d_t^l phi against gamma_Gamma(Delta^l u0 + sum_{j<l} Delta^j r_0 d_t^{l-1-j} g), l = 0..admissible_l.
/// J >= 0 first projects every datum onto the bands j <= J.
CompatibilityReport compatibility_check(const HeatData& data, int J = -1);

/// d_t u - Delta_x u - g.
GridFunction heat_residual(const GridFunction& u, const GridFunction& g);

struct HeatFixtureOptions {
    std::size_t spatial_dims = 2;
    std::size_t N = 64;
    double L = 18.0;
    std::size_t Nt = 64;
    double Lt = 1.0;
    double v0 = 2.5;     ///< spatial variance at t = 0
    double tau = 0.17;   ///< width of the time window
    double t_c = 0.05;   ///< centre of the time window
};

struct HeatFixture {
    HeatData data;
    GridFunction u;  ///< the windowed solution
};

/// u = chi(t) U(x, t) with U the Gaussian heat solution of variance v0 + 2t and chi(0) = 1,
/// so u solves the heat equation with source g = chi' U and is periodic to rounding in t.
HeatFixture evolved_gaussian_fixture(const SpaceParams& params, const HeatFixtureOptions& options = {});

/// phi + eps b(x') c(t) with b(0) = c(0) = 1.
HeatData perturb_corner(const HeatData& data, double eps, double width = 1.5);

}  // namespace anisonorm

#include "anisonorm/compatibility.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "anisonorm/decomposition.hpp"
#include "anisonorm/errors.hpp"
#include "anisonorm/traces.hpp"

namespace anisonorm {

namespace {

void check_heat_weights(const SpaceParams& params) {
    const auto& a = params.aniso;
    for (std::size_t i = 0; i + 1 < a.dim(); ++i)
        if (a[i] != 1.0) throw ValidationError("heat checker: spatial weights must equal 1");
    if (a[a.dim() - 1] != 2.0) throw ValidationError("heat checker: the time weight must equal 2");
}

GridFunction time_derivative(const GridFunction& u, int order) {
    const auto t = u.grid().time_axis();
    if (!t) throw ValidationError("time derivative: grid has no time axis");
    if (order == 0) return u;
    std::vector<int> alpha(u.grid().dim(), 0);
    alpha[*t] = order;
    // d_t = i D_t
    const cplx factor = std::pow(cplx(0.0, 1.0), order);
    return spectral_derivative(u, alpha).scaled(factor);
}

std::vector<std::size_t> spatial_axes(const Grid& g) {
    std::vector<std::size_t> axes;
    for (std::size_t a = 0; a < g.dim(); ++a)
        if (!g.time_axis() || *g.time_axis() != a) axes.push_back(a);
    return axes;
}

GridFunction laplacian(const GridFunction& u, int power) {
    const auto axes = spatial_axes(u.grid());
    return spectral_laplacian(u, power, axes);
}

GridFunction project(const GridFunction& u, const Anisotropy& aniso, int J) {
    const auto part = build_partition(aniso, J, u.grid());
    std::vector<cplx> m(u.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = window_at(part.kind, 0, std::ldexp(part.radius[i], -J));
    return apply_multiplier(u, m);
}

double l2_norm(const GridFunction& u) {
    const std::vector<double> p(u.grid().dim(), 2.0);
    return mixed_lp_norm(u, p);
}

}  // namespace

int admissible_l(const SpaceParams& params) {
    check_heat_weights(params);
    const auto c = cylinder_form(params);
    const double n = static_cast<double>(c.n);
    const double t1 = c.s - 1.0 / c.p0 - 2.0 / c.pt - (n - 1.0) * (1.0 / std::min(1.0, c.p0) - 1.0);
    const double t2 = c.s - 1.0 / c.p0 - (n - 1.0) * (c.a0 / std::min({1.0, c.p0, c.q}) - c.a0) -
                      (c.at / std::min({1.0, c.p0, c.pt, c.q}) - c.at);
    const double bound = std::min(t1, t2);
    if (!(bound > 0.0)) return -1;
    // largest l with 2l < bound
    int l = static_cast<int>(std::ceil(bound / 2.0)) - 1;
    return std::min(l, kMaxCompatibilityOrder);
}

GridFunction corner_trace_curved(const GridFunction& phi, int l, int l_max) {
    if (l < 0 || l > l_max) {
        std::ostringstream msg;
        msg << "corner trace: order " << l << " is not admissible (largest admissible order " << l_max << ")";
        throw ValidationError(msg.str());
    }
    return time_trace_r0(time_derivative(phi, l));
}

GridFunction corner_trace_flat(const GridFunction& u0) {
    if (u0.grid().time_axis()) throw ValidationError("corner trace: u0 must not carry a time axis");
    return hyperplane_trace(u0, u0.grid().dim() - 1);
}

CompatibilityReport compatibility_check(const HeatData& data, int J) {
    check_heat_weights(data.params);
    const Grid& gu = data.u0.grid();
    const Grid& gg = data.g.grid();
    const Grid& gp = data.phi.grid();
    const std::size_t n = gu.dim();
    if (data.params.dim() != n + 1) throw ValidationError("compatibility: parameters must have one axis more than u0");
    if (gg.dim() != n + 1 || gg.time_axis() != std::optional<std::size_t>(n) || !(gg.without_axis(n) == gu))
        throw ValidationError("compatibility: g must live on the u0 grid with a time axis appended");
    if (!(gp == gg.without_axis(n - 1))) throw ValidationError("compatibility: phi must live on the g grid without the normal axis");

    HeatData d = data;
    if (J >= 0) {
        const auto& a = data.params.aniso;
        d.g = project(data.g, a, J);
        d.phi = project(data.phi, a.without_axis(n - 1), J);
        d.u0 = project(data.u0, a.without_axis(n), J);
    }

    CompatibilityReport rep;
    rep.l_max = admissible_l(data.params);
    rep.J = J;
    for (int l = 0; l <= rep.l_max; ++l) {
        const auto lhs = corner_trace_curved(d.phi, l, rep.l_max);
        GridFunction inner = laplacian(d.u0, l);
        for (int j = 0; j < l; ++j) inner = inner + laplacian(time_trace_r0(time_derivative(d.g, l - 1 - j)), j);
        const auto rhs = corner_trace_flat(inner);
        const auto diff = lhs - rhs;
        rep.entries.push_back({l, true, lhs.sup_norm(), rhs.sup_norm(), diff.sup_norm(), l2_norm(diff)});
    }
    return rep;
}

GridFunction heat_residual(const GridFunction& u, const GridFunction& g) {
    if (!(u.grid() == g.grid())) throw ValidationError("heat residual: u and g grids differ");
    return time_derivative(u, 1) - laplacian(u, 1) - g;
}

HeatFixture evolved_gaussian_fixture(const SpaceParams& params, const HeatFixtureOptions& o) {
    check_heat_weights(params);
    if (params.dim() != o.spatial_dims + 1) throw ValidationError("heat fixture: parameter dimension mismatch");
    if (!(o.v0 > 2.0 * o.Lt)) throw ValidationError("heat fixture: variance must stay positive over the time box");
    const std::vector<std::size_t> ns(o.spatial_dims, o.N);
    const std::vector<double> ls(o.spatial_dims, o.L);
    const Grid space(ns, ls);
    const Grid st = space.with_axis(o.spatial_dims, o.Nt, o.Lt, 2.0, true);
    const double d = static_cast<double>(o.spatial_dims);

    auto U = [&](std::span<const double> x, double t) {
        const double v = o.v0 + 2.0 * t;
        double r2 = 0.0;
        for (std::size_t i = 0; i < o.spatial_dims; ++i) r2 += x[i] * x[i];
        return std::pow(o.v0 / v, d / 2.0) * std::exp(-r2 / (2.0 * v));
    };
    auto chi = [&](double t) { return std::exp(-((t - o.t_c) * (t - o.t_c) - o.t_c * o.t_c) / (o.tau * o.tau)); };
    auto dchi = [&](double t) { return -2.0 * (t - o.t_c) / (o.tau * o.tau) * chi(t); };

    HeatFixture f{{GridFunction::zeros(st), GridFunction::zeros(st.without_axis(o.spatial_dims - 1)), GridFunction::zeros(space), params},
                  GridFunction::zeros(st)};
    f.u = GridFunction::sample(st, [&](std::span<const double> x) { return chi(x.back()) * U(x, x.back()); });
    f.data.g = GridFunction::sample(st, [&](std::span<const double> x) { return dchi(x.back()) * U(x, x.back()); });
    f.data.u0 = GridFunction::sample(space, [&](std::span<const double> x) { return U(x, 0.0); });
    f.data.phi = hyperplane_trace(f.u, o.spatial_dims - 1);
    return f;
}

HeatData perturb_corner(const HeatData& data, double eps, double width) {
    HeatData d = data;
    const auto bump = GridFunction::sample(data.phi.grid(), [&](std::span<const double> x) {
        double r2 = 0.0;
        for (std::size_t i = 0; i + 1 < x.size(); ++i) r2 += x[i] * x[i];
        const double t = x.back();
        return std::exp(-r2 / (width * width) - t * t / 0.04);
    });
    d.phi = data.phi + bump.scaled(eps);
    return d;
}

}  // namespace anisonorm

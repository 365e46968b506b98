#include "anisonorm/traces.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "anisonorm/errors.hpp"
#include "parallel.hpp"

namespace anisonorm {

namespace {

double bump01(double x) { return (x <= 0.0 || x >= 1.0) ? 0.0 : std::exp(-1.0 / (x * (1.0 - x))); }

GridFunction sample_profile(const Grid& grid, const std::vector<double>& xi, const std::vector<double>& w) {
    return GridFunction::sample(grid, [&](std::span<const double> t) {
        cplx s = 0.0;
        for (std::size_t k = 0; k < xi.size(); ++k) s += w[k] * std::polar(1.0, xi[k] * t[0]);
        return s;
    });
}

// Levels whose modulation outruns the new axis are dropped when their band is negligible.
int resolved_levels(const std::vector<double>& band_sup, double total_sup, double a, double top, double nyquist,
                    std::vector<std::string>& notices) {
    int used = 0;
    for (std::size_t j = 0; j < band_sup.size(); ++j) {
        const double f = std::exp2(static_cast<double>(j) * a) * top;
        if (f <= nyquist) {
            used = static_cast<int>(j) + 1;
            continue;
        }
        if (band_sup[j] > 1e-14 * total_sup) {
            std::ostringstream msg;
            msg << "modulation level " << j << " needs frequency " << f << " above the Nyquist limit " << nyquist
                << " while its band carries " << band_sup[j] / total_sup << " of the input";
            throw NumericalGuardError(msg.str());
        }
        std::ostringstream msg;
        msg << "dropped level " << j << " (frequency " << f << " above Nyquist " << nyquist << ", band content "
            << band_sup[j] / std::max(total_sup, 1e-300) << ")";
        notices.push_back(msg.str());
    }
    return used;
}

// out(x with s inserted at `axis`) = sum_j bands[j](x) mod[j](s)
GridFunction outer_sum(const Grid& out_grid, std::size_t axis, const std::vector<GridFunction>& bands,
                       const std::vector<std::vector<cplx>>& mods, int levels) {
    std::vector<cplx> v(out_grid.size());
    const std::size_t stride = out_grid.stride(axis);
    const std::size_t n = out_grid.samples(axis);
    detail::parallel_for(out_grid.size() / (n * stride), [&](std::size_t o) {
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t r = 0; r < stride; ++r) {
                cplx acc = 0.0;
                for (int j = 0; j < levels; ++j) acc += bands[static_cast<std::size_t>(j)][o * stride + r] * mods[static_cast<std::size_t>(j)][s];
                v[(o * n + s) * stride + r] = acc;
            }
    });
    return GridFunction(out_grid, std::move(v));
}

Lifted lift(const GridFunction& v, const TraceProfile& profile, const DyadicPartition& part, double a,
            std::size_t axis, bool is_time) {
    const Grid& grid = v.grid();
    if (part.aniso.dim() != grid.dim() + 1) throw ValidationError("right-inverse: partition must have one more axis than the data");
    if (axis > grid.dim()) throw ValidationError("right-inverse: axis out of range");
    if (std::abs(part.aniso[axis] - a) > 1e-12) throw ValidationError("right-inverse: weight differs from the partition anisotropy");

    const auto radius = lattice_radius(part.aniso.without_axis(axis), grid);
    const auto V = dft(v);
    std::vector<GridFunction> bands;
    std::vector<double> band_sup;
    for (int j = 0; j <= part.J; ++j) {
        SpectralFunction b{grid, V.coeffs};
        for (std::size_t i = 0; i < radius.size(); ++i) b.coeffs[i] *= window_at(part.kind, j, radius[i]);
        bands.push_back(idft(b));
        band_sup.push_back(bands.back().sup_norm());
    }

    const Grid& t = profile.grid();
    Lifted out{GridFunction::zeros(grid), part.J, 0, {}};
    out.levels_used = resolved_levels(band_sup, v.sup_norm(), a, profile.top_frequency(), t.nyquist(0), out.notices);

    std::vector<std::vector<cplx>> mods(static_cast<std::size_t>(out.levels_used));
    for (std::size_t j = 0; j < mods.size(); ++j) {
        const double scale = std::exp2(static_cast<double>(j) * a);
        for (std::size_t s = 0; s < t.samples(0); ++s) mods[j].push_back(profile.psi_at(scale * t.coordinate(0, s)));
    }
    const Grid out_grid = grid.with_axis(axis, t.samples(0), t.half_extent(0), a, is_time);
    out.u = outer_sum(out_grid, axis, bands, mods, out.levels_used);
    return out;
}

}  // namespace

cplx TraceProfile::evaluate(const std::vector<double>& w, double t) const {
    cplx s = 0.0;
    for (std::size_t k = 0; k < xi_.size(); ++k) s += w[k] * std::polar(1.0, xi_[k] * t);
    return s;
}

TraceProfile build_eta(const Grid& grid1d) {
    if (grid1d.dim() != 1) throw ValidationError("build_eta: one-dimensional grid required");
    if (grid1d.nyquist(0) < 2.0) throw ValidationError("build_eta: grid Nyquist frequency below 2");
    TraceProfile p;
    p.grid_ = grid1d;
    for (std::size_t b = 0; b < grid1d.samples(0); ++b) {
        const double xi = grid1d.frequency(0, b);
        if (xi > 1.0 && xi < 2.0) p.xi_.push_back(xi);
    }
    std::sort(p.xi_.begin(), p.xi_.end());
    if (p.xi_.size() < 3) throw ValidationError("build_eta: fewer than three lattice frequencies inside [1, 2]; enlarge the box");

    double se = 0.0, sp = 0.0;
    for (double xi : p.xi_) {
        const double b = bump01(xi - 1.0);
        p.eta_w_.push_back(b);
        p.psi_w_.push_back(b * b);
        se += b;
        sp += b * b;
    }
    if (se < 1e-12 || sp < 1e-12) throw NumericalGuardError("build_eta: bump weights too small to normalise");
    for (auto& w : p.eta_w_) w /= se;
    for (auto& w : p.psi_w_) w /= sp;
    p.eta_ = sample_profile(grid1d, p.xi_, p.eta_w_);
    p.psi_ = sample_profile(grid1d, p.xi_, p.psi_w_);
    return p;
}

GridFunction hyperplane_trace(const GridFunction& f, std::size_t k) { return slice(f, k, 0.0); }

GridFunction time_trace_r0(const GridFunction& u) {
    const auto t = u.grid().time_axis();
    if (!t) throw ValidationError("time trace: grid has no time axis");
    return slice(u, *t, 0.0);
}

Lifted k_flat(const GridFunction& v, const TraceProfile& profile, const DyadicPartition& part, double a_t) {
    if (v.grid().time_axis()) throw ValidationError("k_flat: data already carries a time axis");
    return lift(v, profile, part, a_t, v.grid().dim(), true);
}

Lifted k_normal(const GridFunction& v, const TraceProfile& profile, const DyadicPartition& part, double a_n,
                std::optional<std::size_t> axis) {
    const std::size_t at = axis.value_or(v.grid().dim() - 1);
    if (v.grid().time_axis() && at > *v.grid().time_axis())
        throw ValidationError("k_normal: the normal axis must precede the time axis");
    return lift(v, profile, part, a_n, at, false);
}

Lifted q_apply(const GridFunction& u, const KernelFamily& fam, const TraceProfile& profile, double a_t, int J) {
    if (!(u.grid() == fam.grid())) throw ValidationError("q_apply: grid does not match the kernel family");
    if (fam.support_side() != Side::Plus) throw ValidationError("q_apply: kernels must be supported in {x_n >= 0}");
    if (u.grid().time_axis()) throw ValidationError("q_apply: data already carries a time axis");
    if (!(a_t >= 1.0)) throw ValidationError("q_apply: time weight must be at least 1");
    fam.require_level(J);

    const Grid& grid = u.grid();
    const auto U = dft(u);
    std::vector<GridFunction> bands(static_cast<std::size_t>(J) + 1, GridFunction::zeros(grid));
    std::vector<double> band_sup(bands.size());
    detail::parallel_for(bands.size(), [&](std::size_t j) {
        const auto p = fam.phi_symbol(static_cast<int>(j));
        const auto s = fam.psi_symbol(static_cast<int>(j));
        SpectralFunction b{grid, U.coeffs};
        for (std::size_t i = 0; i < b.coeffs.size(); ++i) b.coeffs[i] *= s[i] * p[i];
        bands[j] = idft(b);
        band_sup[j] = bands[j].sup_norm();
    });

    const Grid& t = profile.grid();
    Lifted out{GridFunction::zeros(grid), J, 0, {}};
    out.levels_used = resolved_levels(band_sup, u.sup_norm(), a_t, profile.top_frequency(), t.nyquist(0), out.notices);
    std::vector<std::vector<cplx>> mods(static_cast<std::size_t>(out.levels_used));
    for (std::size_t j = 0; j < mods.size(); ++j) {
        const double scale = std::exp2(static_cast<double>(j) * a_t);
        for (std::size_t s = 0; s < t.samples(0); ++s) mods[j].push_back(profile.eta_at(scale * t.coordinate(0, s)));
    }
    const Grid out_grid = grid.with_axis(grid.dim(), t.samples(0), t.half_extent(0), a_t, true);
    out.u = outer_sum(out_grid, grid.dim(), bands, mods, out.levels_used);
    return out;
}

QPropReport q_prop_bound_check(const std::vector<GridFunction>& v_seq, const Grid& time_grid,
                               const std::function<double(double)>& f1d, double decay, double r, double a,
                               const std::vector<double>& p, double q, std::optional<double> bound) {
    if (v_seq.empty()) throw ValidationError("q_prop_bound_check: empty sequence");
    if (time_grid.dim() != 1) throw ValidationError("q_prop_bound_check: one-dimensional time grid required");
    if (!(r > 0.0) || !(a > 0.0) || !(q > 0.0)) throw ValidationError("q_prop_bound_check: r, a and q must be positive");
    if (!(decay > 0.0) || !(decay * r > 1.0)) throw ValidationError("q_prop_bound_check: decay order N must satisfy N r > 1");
    const Grid& space = v_seq.front().grid();
    if (p.size() != space.dim() + 1 || std::abs(p.back() - r) > 1e-12)
        throw ValidationError("q_prop_bound_check: p must list the spatial exponents followed by r");
    for (const auto& v : v_seq)
        if (!(v.grid() == space)) throw ValidationError("q_prop_bound_check: sequence grids differ");

    // t^N f(t) must stay bounded: the top decade may not exceed twice the decades below it.
    double lower = 0.0, top = 0.0;
    for (int k = 0; k <= 600; ++k) {
        const double t = std::pow(10.0, k / 100.0);
        const double m = std::pow(t, decay) * std::max(std::abs(f1d(t)), std::abs(f1d(-t)));
        if (!std::isfinite(m)) throw ValidationError("q_prop_bound_check: f is not finite");
        if (k > 500)
            top = std::max(top, m);
        else
            lower = std::max(lower, m);
    }
    if (top > 2.0 * lower && top > 0.0) throw ValidationError("q_prop_bound_check: t^N f(t) is not bounded");

    const Grid lifted = space.with_axis(space.dim(), time_grid.samples(0), time_grid.half_extent(0), a, true);
    std::vector<GridFunction> seq;
    double rhs_r = 0.0;
    const std::vector<double> p_space(p.begin(), p.end() - 1);
    for (std::size_t j = 0; j < v_seq.size(); ++j) {
        const double scale = std::exp2(static_cast<double>(j) * a);
        const double amp = std::exp2(static_cast<double>(j) * a / r);
        std::vector<cplx> ft(time_grid.samples(0));
        for (std::size_t s = 0; s < ft.size(); ++s) ft[s] = amp * f1d(scale * time_grid.coordinate(0, s));
        seq.push_back(outer_sum(lifted, space.dim(), {v_seq[j]}, {ft}, 1));
        rhs_r += std::pow(mixed_lp_norm(v_seq[j], p_space), r);
    }
    QPropReport rep;
    rep.lhs = mixed_lp_lq_norm(seq, p, q);
    rep.rhs = std::pow(rhs_r, 1.0 / r);
    rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
    if (bound) rep.pass = rep.lhs <= *bound * rep.rhs;
    return rep;
}

SupportReport support_report(const GridFunction& u, const GridFunction& Qu, std::size_t axis, double delta) {
    const Grid& g = u.grid();
    if (axis >= g.dim()) throw ValidationError("support_report: axis out of range");
    if (Qu.grid().dim() != g.dim() + 1) throw ValidationError("support_report: Qu must carry one extra (time) axis");
    if (delta < 2.0 * g.spacing(axis) * (1.0 - 1e-12)) throw ValidationError("support_report: delta must be at least two spacings");
    SupportReport rep;
    const double norm = u.sup_norm();
    double outside = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.coordinate(axis, (i / g.stride(axis)) % g.samples(axis)) < -1e-9 * g.spacing(axis))
            outside = std::max(outside, std::abs(u[i]));
    if (norm == 0.0) {
        rep.max_leakage = Qu.sup_norm();
        rep.pass = rep.max_leakage == 0.0;
        return rep;
    }
    if (outside >= 1e-14 * norm) {
        rep.applicable = false;
        return rep;
    }
    const Grid& qg = Qu.grid();
    double leak = 0.0;
    for (std::size_t i = 0; i < qg.size(); ++i)
        if (qg.coordinate(axis, (i / qg.stride(axis)) % qg.samples(axis)) < -delta)
            leak = std::max(leak, std::abs(Qu[i]));
    rep.max_leakage = leak / norm;
    rep.pass = rep.max_leakage <= rep.threshold;
    return rep;
}

}  // namespace anisonorm

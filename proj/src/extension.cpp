#include "anisonorm/extension.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "anisonorm/decomposition.hpp"
#include "anisonorm/errors.hpp"
#include "parallel.hpp"

namespace anisonorm {

namespace {

Side opposite(Side s) { return s == Side::Plus ? Side::Minus : Side::Plus; }

bool on_side(const Grid& grid, std::size_t axis, Side side, double offset, std::size_t flat) {
    const double x = grid.coordinate(axis, (flat / grid.stride(axis)) % grid.samples(axis));
    const double slack = 1e-9 * grid.spacing(axis);
    return side == Side::Plus ? x >= offset - slack : x <= offset + slack;
}

void check_orientation(const HalfspaceFunction& f, const KernelFamily& fam) {
    if (!(f.u.grid() == fam.grid())) throw ValidationError("extension: grid does not match the kernel family");
    if (f.axis != fam.normal_axis()) throw ValidationError("extension: kernel normal axis differs from the boundary axis");
    if (fam.support_side() != opposite(f.side))
        throw ValidationError("extension: kernels must be supported in the half-space opposite to the data");
}

}  // namespace

GridFunction HalfspaceFunction::zero_extension() const { return truncate_halfspace(u, axis, side, offset); }

double HalfspaceFunction::sup_on_side(const GridFunction& g) const {
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (on_side(g.grid(), axis, side, offset, i)) m = std::max(m, std::abs(g[i]));
    return m;
}

GridFunction rychkov_extend(const HalfspaceFunction& f, const KernelFamily& fam, int J) {
    check_orientation(f, fam);
    fam.require_level(J);
    const Grid& grid = f.u.grid();
    const auto F = dft(f.zero_extension());

    std::vector<std::vector<cplx>> terms(static_cast<std::size_t>(J) + 1);
    detail::parallel_for(terms.size(), [&](std::size_t j) {
        const auto p = fam.phi_symbol(static_cast<int>(j));
        SpectralFunction g{grid, F.coeffs};
        for (std::size_t i = 0; i < p.size(); ++i) g.coeffs[i] *= p[i];
        auto G = dft(truncate_halfspace(idft(g), f.axis, f.side, f.offset));
        const auto s = fam.psi_symbol(static_cast<int>(j));
        for (std::size_t i = 0; i < s.size(); ++i) G.coeffs[i] *= s[i];
        terms[j] = std::move(G.coeffs);
    });
    return idft(SpectralFunction{grid, detail::tree_sum(std::move(terms))});
}

GridFunction reflect_normal(const GridFunction& u, std::size_t axis, double C) {
    const Grid& grid = u.grid();
    if (axis >= grid.dim()) throw ValidationError("reflection: axis out of range");
    if (C < -grid.half_extent(axis) || C >= grid.half_extent(axis))
        throw ValidationError("reflection: C lies outside the box");
    const double shift = C / grid.spacing(axis);
    const long c = std::lround(shift);
    if (std::abs(shift - static_cast<double>(c)) > 1e-9)
        throw ValidationError("reflection: C must be a multiple of the normal spacing");

    // x_m = -L + m h  ->  C - x_m = -L + (c + N - m) h
    const long n = static_cast<long>(grid.samples(axis));
    const std::size_t stride = grid.stride(axis);
    std::vector<cplx> v(u.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const long m = static_cast<long>((i / stride) % grid.samples(axis));
        const long r = (((c - m) % n) + n) % n;
        v[i - static_cast<std::size_t>(m) * stride + static_cast<std::size_t>(r) * stride] = u[i];
    }
    return GridFunction(grid, std::move(v));
}

GridFunction rychkov_extend_below(const HalfspaceFunction& f, double C, const KernelFamily& fam, int J) {
    if (f.side != Side::Minus) throw ValidationError("extension below C expects data on {x_n <= C}");
    if (std::abs(f.offset - C) > 1e-12 * (1.0 + std::abs(C)))
        throw ValidationError("extension below C: data offset differs from C");
    HalfspaceFunction g{reflect_normal(f.u, f.axis, C), f.axis, Side::Plus, 0.0};
    return reflect_normal(rychkov_extend(g, fam, J), f.axis, C);
}

double restriction_error(const HalfspaceFunction& f, const GridFunction& extended) {
    const double norm = f.sup_on_side(f.u);
    if (norm == 0.0) return f.sup_on_side(extended);
    return f.sup_on_side(extended - f.u) / norm;
}

ExtensionBoundReport extension_bound_report(const std::vector<HalfspaceFunction>& family,
                                            const SpaceParams& params, const KernelFamily& fam, int J) {
    if (family.empty()) throw ValidationError("extension_bound_report: empty family");
    if (params.dim() != fam.grid().dim()) throw ValidationError("extension_bound_report: parameter dimension mismatch");
    const auto part = build_partition(params.aniso, fam.grid());
    ExtensionBoundReport rep;
    rep.J = J;
    rep.L_max = fam.L_max();
    for (const auto& f : family) {
        const double proxy = f_norm(f.zero_extension(), params, part);
        if (proxy == 0.0) {
            rep.ratios.push_back(std::numeric_limits<double>::quiet_NaN());
            rep.residuals.push_back(0.0);
            ++rep.skipped;
            continue;
        }
        const auto ext = rychkov_extend(f, fam, J);
        const double r = f_norm(ext, params, part) / proxy;
        rep.ratios.push_back(r);
        rep.residuals.push_back(restriction_error(f, ext));
        rep.constant = std::max(rep.constant, r);
    }
    return rep;
}

}  // namespace anisonorm

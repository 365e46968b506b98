#include "anisonorm/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "anisonorm/errors.hpp"
#include "parallel.hpp"

namespace anisonorm {
namespace {

double smoothstep(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0);
}

void require_matching(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw ValidationError(std::string(what) + ": grid does not match the partition grid");
}

void require_dims(const SpaceParams& params, const Grid& grid) {
    if (params.dim() != grid.dim()) throw ValidationError("space parameters and grid have different dimensions");
}

// Sum of terms with per-axis exponents, enumerated by total order.
void enumerate_multi_indices(std::size_t dim, int order, std::vector<int>& cur, std::size_t axis,
                             std::vector<std::vector<int>>& out) {
    if (axis == dim) {
        out.push_back(cur);
        return;
    }
    int used = 0;
    for (std::size_t i = 0; i < axis; ++i) used += cur[i];
    for (int k = 0; k + used <= order; ++k) {
        cur[axis] = k;
        enumerate_multi_indices(dim, order, cur, axis + 1, out);
    }
    cur[axis] = 0;
}

}  // namespace

std::string to_string(RampKind kind) { return kind == RampKind::Smoothstep ? "smoothstep" : "cosine"; }

RampKind ramp_kind_from_string(const std::string& name) {
    if (name == "smoothstep") return RampKind::Smoothstep;
    if (name == "cosine") return RampKind::Cosine;
    throw ValidationError("unknown ramp '" + name + "' (expected smoothstep or cosine)");
}

double ramp(RampKind kind, double r) {
    if (r <= 1.0) return 1.0;
    if (r >= 1.5) return 0.0;
    const double x = (1.5 - r) / 0.5;
    if (kind == RampKind::Smoothstep) return smoothstep(x);
    const double c = std::sin(0.5 * std::numbers::pi * x);
    return c * c;
}

double window_at(RampKind kind, int j, double radius) {
    if (j < 0) return 0.0;
    const double outer = ramp(kind, std::ldexp(radius, -j));
    if (j == 0) return outer;
    return outer - ramp(kind, std::ldexp(radius, 1 - j));
}

double DyadicPartition::max_radius() const { return radius.empty() ? 0.0 : *std::max_element(radius.begin(), radius.end()); }

std::vector<double> lattice_radius(const Anisotropy& aniso, const Grid& grid) {
    if (aniso.dim() != grid.dim()) throw ValidationError("anisotropy and grid have different dimensions");
    std::vector<double> r(grid.size());
    const std::size_t rows = grid.size() / grid.samples(grid.dim() - 1);
    const std::size_t last = grid.samples(grid.dim() - 1);
    detail::parallel_for(rows, [&](std::size_t row) {
        for (std::size_t k = 0; k < last; ++k) {
            const std::size_t i = row * last + k;
            const auto xi = grid.frequency_point(i);
            r[i] = aniso_distance(xi, aniso);
        }
    });
    return r;
}

int default_level(const Anisotropy& aniso, const Grid& grid) {
    const auto r = lattice_radius(aniso, grid);
    const double rmax = *std::max_element(r.begin(), r.end());
    return rmax <= 1.0 ? 0 : static_cast<int>(std::ceil(std::log2(rmax) - 1e-12));
}

DyadicPartition build_partition(const Anisotropy& aniso, int J, const Grid& grid, RampKind kind) {
    if (J < 0) throw ValidationError("partition level J must be non-negative");
    DyadicPartition part{aniso, J, kind, grid, lattice_radius(aniso, grid), {}};
    part.windows.assign(static_cast<std::size_t>(J) + 1, std::vector<double>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        // |2^{-j a} xi|_a = 2^{-j} |xi|_a, so one distance per point serves every level.
        double previous = ramp(kind, part.radius[i]);
        part.windows[0][i] = previous;
        for (int j = 1; j <= J; ++j) {
            const double current = ramp(kind, std::ldexp(part.radius[i], -j));
            part.windows[static_cast<std::size_t>(j)][i] = current - previous;
            previous = current;
        }
    }
    return part;
}

DyadicPartition build_partition(const Anisotropy& aniso, const Grid& grid, RampKind kind) {
    return build_partition(aniso, default_level(aniso, grid), grid, kind);
}

GridFunction BandDecomposition::sum() const {
    std::vector<std::vector<cplx>> terms;
    for (const auto& b : bands) terms.emplace_back(b.values().begin(), b.values().end());
    if (terms.empty()) return GridFunction::zeros(grid);
    return GridFunction(grid, detail::tree_sum(std::move(terms)));
}

BandDecomposition lp_bands(const GridFunction& u, const DyadicPartition& part) {
    require_matching(u.grid(), part.grid, "lp_bands");
    const auto spec = dft(u);
    std::vector<std::optional<GridFunction>> slots(part.windows.size());
    detail::parallel_for(part.windows.size(), [&](std::size_t j) {
        SpectralFunction s{spec.grid, spec.coeffs};
        for (std::size_t i = 0; i < s.coeffs.size(); ++i) s.coeffs[i] *= part.windows[j][i];
        slots[j] = idft(s);
    });
    BandDecomposition out{u.grid(), {}};
    for (auto& s : slots) out.bands.push_back(std::move(*s));
    return out;
}

double f_norm(const GridFunction& u, const SpaceParams& params, const DyadicPartition& part) {
    if (params.kind != ScaleKind::F) throw ValidationError("f_norm needs F-scale parameters");
    require_dims(params, u.grid());
    const auto bands = lp_bands(u, part);
    std::vector<double> acc(u.size(), 0.0);
    for (std::size_t j = 0; j < bands.bands.size(); ++j) {
        const double weight = std::exp2(static_cast<double>(j) * params.s);
        const auto& b = bands.bands[j];
        for (std::size_t i = 0; i < acc.size(); ++i) {
            const double m = weight * std::abs(b[i]);
            if (std::isinf(params.q))
                acc[i] = std::max(acc[i], m);
            else
                acc[i] += std::pow(m, params.q);
        }
    }
    if (!std::isinf(params.q))
        for (auto& v : acc) v = std::pow(v, 1.0 / params.q);
    return mixed_lp_norm(u.grid(), acc, params.p);
}

double b_norm(const GridFunction& u, const SpaceParams& params, const DyadicPartition& part) {
    if (params.kind != ScaleKind::B) throw ValidationError("b_norm needs B-scale parameters");
    require_dims(params, u.grid());
    const auto bands = lp_bands(u, part);
    double acc = 0.0;
    for (std::size_t j = 0; j < bands.bands.size(); ++j) {
        const double m = std::exp2(static_cast<double>(j) * params.s) * mixed_lp_norm(bands.bands[j], params.p);
        if (std::isinf(params.q))
            acc = std::max(acc, m);
        else
            acc += std::pow(m, params.q);
    }
    return std::isinf(params.q) ? acc : std::pow(acc, 1.0 / params.q);
}

double space_norm(const GridFunction& u, const SpaceParams& params, const DyadicPartition& part) {
    return params.kind == ScaleKind::F ? f_norm(u, params, part) : b_norm(u, params, part);
}

GridFunction peetre_maximal(const GridFunction& uj, const Anisotropy& aniso, std::span<const double> r, int j) {
    const Grid& grid = uj.grid();
    if (aniso.dim() != grid.dim() || r.size() != grid.dim())
        throw ValidationError("peetre_maximal: anisotropy, exponents and grid must agree in dimension");
    for (double ri : r)
        if (!(ri > 0.0)) throw ValidationError("peetre_maximal: exponents r must be positive");

    // The weight is a product over axes, so the supremum factorizes into one sweep per axis.
    std::vector<double> cur(grid.size());
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = std::abs(uj[i]);
    std::vector<double> next(cur.size());
    for (std::size_t axis = 0; axis < grid.dim(); ++axis) {
        const std::size_t n = grid.samples(axis);
        const std::size_t stride = grid.stride(axis);
        const double h = grid.spacing(axis);
        const double scale = std::exp2(static_cast<double>(j) * aniso[axis]);
        std::vector<double> inv_weight(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double dist = static_cast<double>(std::min(k, n - k)) * h;
            inv_weight[k] = std::pow(1.0 + scale * dist, -r[axis]);
        }
        const std::size_t outer = cur.size() / (n * stride);
        detail::parallel_for(outer, [&](std::size_t o) {
            for (std::size_t s = 0; s < stride; ++s) {
                const std::size_t base = o * n * stride + s;
                for (std::size_t x = 0; x < n; ++x) {
                    double best = 0.0;
                    for (std::size_t y = 0; y < n; ++y)
                        best = std::max(best, cur[base + y * stride] * inv_weight[(x + n - y) % n]);
                    next[base + x * stride] = best;
                }
            }
        });
        std::swap(cur, next);
    }
    std::vector<cplx> out(cur.begin(), cur.end());
    return GridFunction(grid, std::move(out));
}

MultiplierReport pointwise_multiply_report(const GridFunction& m, const GridFunction& v, const SpaceParams& params,
                                           const DyadicPartition& part) {
    if (!(m.grid() == v.grid())) throw ValidationError("multiplier and function live on different grids");
    MultiplierReport rep;
    const double base = space_norm(v, params, part);
    if (base == 0.0) throw ValidationError("pointwise_multiply_report: the test function has zero norm");
    rep.ratio = space_norm(m.pointwise_product(v), params, part) / base;
    rep.derivative_order = std::max(1, static_cast<int>(std::ceil(std::abs(params.s))));

    std::vector<std::vector<int>> alphas;
    std::vector<int> cur(m.grid().dim(), 0);
    enumerate_multi_indices(m.grid().dim(), rep.derivative_order, cur, 0, alphas);
    for (const auto& alpha : alphas) rep.bound_proxy = std::max(rep.bound_proxy, spectral_derivative(m, alpha).sup_norm());
    return rep;
}

TraceCondition trace_condition_from_string(const std::string& name) {
    if (name == "r0") return TraceCondition::R0;
    if (name == "gamma") return TraceCondition::Gamma;
    if (name == "corner_curved") return TraceCondition::CornerCurved;
    if (name == "corner_flat") return TraceCondition::CornerFlat;
    throw ValidationError("unknown trace '" + name + "' (expected r0, gamma, corner_curved or corner_flat)");
}

CylinderParams cylinder_form(const SpaceParams& params) {
    const std::size_t d = params.dim();
    if (d < 2) throw ValidationError("cylinder parameters need at least one spatial axis and a time axis");
    CylinderParams c;
    c.n = d - 1;
    c.a0 = params.aniso[0];
    c.p0 = params.p[0];
    c.at = params.aniso[d - 1];
    c.pt = params.p[d - 1];
    c.q = params.q;
    c.s = params.s;
    for (std::size_t i = 0; i + 1 < d; ++i)
        if (params.aniso[i] != c.a0 || params.p[i] != c.p0)
            throw ValidationError("parameters are not in cylinder form: spatial a and p entries must agree");
    if (std::isinf(c.p0) || std::isinf(c.pt)) throw ValidationError("cylinder form requires finite p");
    return c;
}

ConditionCheck validate_trace_conditions(const SpaceParams& params, TraceCondition which) {
    const auto c = cylinder_form(params);
    const double n = static_cast<double>(c.n);
    const double spatial = c.a0 / std::min(1.0, c.p0) - c.a0;
    double threshold = 0.0;
    switch (which) {
        case TraceCondition::R0:
            threshold = c.at / c.pt + n * spatial;
            break;
        case TraceCondition::Gamma:
            threshold = c.a0 / c.p0 + (n - 1.0) * (c.a0 / std::min({1.0, c.p0, c.q}) - c.a0) +
                        (c.at / std::min({1.0, c.p0, c.pt, c.q}) - c.at);
            break;
        case TraceCondition::CornerCurved:
            threshold = c.at / c.pt + (n - 1.0) * spatial;
            break;
        case TraceCondition::CornerFlat:
            threshold = c.a0 / c.p0 + (n - 1.0) * spatial;
            break;
    }
    return {c.s > threshold, threshold};
}

}  // namespace anisonorm

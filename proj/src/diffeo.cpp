#include "anisonorm/diffeo.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "anisonorm/errors.hpp"
#include "parallel.hpp"

namespace anisonorm {

namespace {

// C-infinity step: 1 on [0, 1/2], 0 on [1, inf).
double cutoff(double r) {
    if (r <= 0.5) return 1.0;
    if (r >= 1.0) return 0.0;
    auto e = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    const double t = 2.0 * (1.0 - r);  // 1 at r = 1/2, 0 at r = 1
    return e(t) / (e(t) + e(1.0 - t));
}

double edge_ratio(const GridFunction& f) {
    const Grid& g = f.grid();
    double edge = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto idx = g.unravel(i);
        for (std::size_t a = 0; a < g.dim(); ++a)
            if (idx[a] == 0 || idx[a] + 1 == g.samples(a)) {
                edge = std::max(edge, std::abs(f[i]));
                break;
            }
    }
    const double m = f.sup_norm();
    return m == 0.0 ? 0.0 : edge / m;
}

// Band-limited interpolation of `f` restricted to the axes of one block; the other axes are kept.
GridFunction compose_block(const GridFunction& f, const DiffeoBlock& block, double reference) {
    const Grid& g = f.grid();
    const auto& axes = block.axes;
    const std::size_t nb = axes.size();
    std::vector<std::size_t> n(nb);
    std::vector<double> half(nb);
    for (std::size_t k = 0; k < nb; ++k) {
        n[k] = g.samples(axes[k]);
        half[k] = g.half_extent(axes[k]);
    }
    const Grid sub(n, half);
    const std::size_t sub_size = sub.size();

    // fibers: all index combinations of the other axes
    std::vector<std::size_t> other;
    for (std::size_t a = 0; a < g.dim(); ++a)
        if (std::find(axes.begin(), axes.end(), a) == axes.end()) other.push_back(a);
    std::size_t fibers = 1;
    for (auto a : other) fibers *= g.samples(a);

    auto flat_index = [&](std::size_t fiber, std::size_t s) {
        std::size_t idx = 0;
        std::size_t rem = fiber;
        for (std::size_t k = other.size(); k-- > 0;) {
            idx += (rem % g.samples(other[k])) * g.stride(other[k]);
            rem /= g.samples(other[k]);
        }
        rem = s;
        for (std::size_t k = nb; k-- > 0;) {
            idx += (rem % n[k]) * g.stride(axes[k]);
            rem /= n[k];
        }
        return idx;
    };

    // mapped points, shared by every fiber
    std::vector<std::vector<double>> mapped(sub_size, std::vector<double>(nb));
    std::vector<char> outside(sub_size, 0);
    for (std::size_t s = 0; s < sub_size; ++s) {
        const auto x = sub.point(s);
        block.forward(x, mapped[s]);
        for (std::size_t k = 0; k < nb; ++k)
            if (mapped[s][k] < -half[k] - 1e-12 || mapped[s][k] > half[k] + 1e-12) outside[s] = 1;
    }

    std::vector<cplx> out(g.size());
    bool escaped = false;
    for (std::size_t fb = 0; fb < fibers; ++fb) {
        std::vector<cplx> vals(sub_size);
        for (std::size_t s = 0; s < sub_size; ++s) vals[s] = f[flat_index(fb, s)];
        auto C = dft(GridFunction(sub, std::move(vals)));
        double volume = 1.0;
        for (std::size_t k = 0; k < nb; ++k) volume *= 2.0 * half[k];
        for (auto& c : C.coeffs) c /= volume;

        std::vector<cplx> res(sub_size);
        detail::parallel_for(sub_size, [&](std::size_t s) {
            // per-axis exponentials; the Nyquist bin is split into +- halves so real data stay real
            std::vector<std::vector<cplx>> e(nb);
            for (std::size_t k = 0; k < nb; ++k) {
                e[k].resize(n[k]);
                for (std::size_t b = 0; b < n[k]; ++b) {
                    const double xi = sub.frequency(k, b);
                    e[k][b] = b == n[k] / 2 ? cplx(std::cos(xi * mapped[s][k]), 0.0) : std::polar(1.0, xi * mapped[s][k]);
                }
            }
            cplx acc = 0.0;
            for (std::size_t i = 0; i < sub_size; ++i) {
                cplx term = C.coeffs[i];
                std::size_t rem = i;
                for (std::size_t k = nb; k-- > 0;) {
                    term *= e[k][rem % n[k]];
                    rem /= n[k];
                }
                acc += term;
            }
            res[s] = acc;
        });
        for (std::size_t s = 0; s < sub_size; ++s) {
            if (outside[s] && std::abs(res[s]) > 1e-10 * reference) escaped = true;
            out[flat_index(fb, s)] = res[s];
        }
    }
    if (escaped) throw ValidationError("compose_diffeo: mapped points exit the box where the function has content");
    return GridFunction(g, std::move(out));
}

}  // namespace

StructuredDiffeo::StructuredDiffeo(std::size_t dim, std::vector<DiffeoBlock> blocks) : dim_(dim), blocks_(std::move(blocks)) {
    std::vector<int> used(dim, 0);
    for (const auto& b : blocks_) {
        if (b.axes.empty()) throw ValidationError("diffeo: empty block");
        if (!b.forward || !b.inverse || !b.jacobian) throw ValidationError("diffeo: block needs forward, inverse and Jacobian");
        for (auto a : b.axes) {
            if (a >= dim) throw ValidationError("diffeo: block axis out of range");
            if (used[a]++) throw ValidationError("diffeo: blocks must act on disjoint axes");
        }
    }
}

std::vector<double> StructuredDiffeo::forward(std::span<const double> x) const {
    std::vector<double> y(x.begin(), x.end());
    for (const auto& b : blocks_) {
        std::vector<double> in, out(b.axes.size());
        for (auto a : b.axes) in.push_back(x[a]);
        b.forward(in, out);
        for (std::size_t k = 0; k < b.axes.size(); ++k) y[b.axes[k]] = out[k];
    }
    return y;
}

std::vector<double> StructuredDiffeo::inverse(std::span<const double> y) const { return inverted().forward(y); }

double StructuredDiffeo::jacobian(std::span<const double> x) const {
    double d = 1.0;
    for (const auto& b : blocks_) {
        std::vector<double> in;
        for (auto a : b.axes) in.push_back(x[a]);
        d *= b.jacobian(in);
    }
    return d;
}

StructuredDiffeo StructuredDiffeo::inverted() const {
    std::vector<DiffeoBlock> inv;
    for (const auto& b : blocks_) {
        DiffeoBlock r = b;
        std::swap(r.forward, r.inverse);
        auto fwd = b.inverse;
        auto jac = b.jacobian;
        const std::size_t m = b.axes.size();
        r.jacobian = [fwd, jac, m](std::span<const double> y) {
            std::vector<double> x(m);
            fwd(y, x);
            return 1.0 / jac(x);
        };
        r.kind = b.kind + "^-1";
        inv.push_back(std::move(r));
    }
    return StructuredDiffeo(dim_, std::move(inv));
}

bool StructuredDiffeo::fixes_axis(std::size_t axis) const {
    for (const auto& b : blocks_)
        if (std::find(b.axes.begin(), b.axes.end(), axis) != b.axes.end()) return false;
    return true;
}

double StructuredDiffeo::roundtrip_error(const Grid& grid) const {
    if (grid.dim() != dim_) throw ValidationError("diffeo: grid dimension mismatch");
    const auto inv = inverted();
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto x = grid.point(i);
        const auto back = inv.forward(forward(x));
        for (std::size_t a = 0; a < dim_; ++a) worst = std::max(worst, std::abs(back[a] - x[a]));
    }
    return worst;
}

DiffeoBlock translation_block(std::vector<std::size_t> axes, std::vector<double> shift) {
    if (axes.size() != shift.size()) throw ValidationError("translation: one shift per axis");
    DiffeoBlock b;
    b.kind = "translation";
    b.axes = std::move(axes);
    b.forward = [shift](std::span<const double> x, std::span<double> y) {
        for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k] + shift[k];
    };
    b.inverse = [shift](std::span<const double> x, std::span<double> y) {
        for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k] - shift[k];
    };
    b.jacobian = [](std::span<const double>) { return 1.0; };
    return b;
}

DiffeoBlock affine_block(std::vector<std::size_t> axes, std::vector<double> matrix, std::vector<double> shift) {
    const std::size_t m = axes.size();
    if (matrix.size() != m * m || shift.size() != m) throw ValidationError("affine: matrix must be m x m and shift of length m");
    Eigen::MatrixXd A(m, m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) A(static_cast<long>(r), static_cast<long>(c)) = matrix[r * m + c];
    const double det = A.determinant();
    if (!(std::abs(det) > 1e-12)) throw ValidationError("affine: matrix is singular");
    const Eigen::MatrixXd Ai = A.inverse();
    std::vector<double> inv(m * m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) inv[r * m + c] = Ai(static_cast<long>(r), static_cast<long>(c));

    DiffeoBlock b;
    b.kind = "affine";
    b.axes = std::move(axes);
    b.forward = [matrix, shift, m](std::span<const double> x, std::span<double> y) {
        for (std::size_t r = 0; r < m; ++r) {
            double s = shift[r];
            for (std::size_t c = 0; c < m; ++c) s += matrix[r * m + c] * x[c];
            y[r] = s;
        }
    };
    b.inverse = [inv, shift, m](std::span<const double> x, std::span<double> y) {
        for (std::size_t r = 0; r < m; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < m; ++c) s += inv[r * m + c] * (x[c] - shift[c]);
            y[r] = s;
        }
    };
    b.jacobian = [det](std::span<const double>) { return det; };
    return b;
}

DiffeoBlock rotation_block(std::size_t i, std::size_t j, double angle, double radius) {
    if (i == j) throw ValidationError("rotation: two distinct axes required");
    if (!(radius > 0.0)) throw ValidationError("rotation: radius must be positive");
    // the twist keeps |x| fixed, so its inverse turns back by the same angle
    auto turn = [angle, radius](double sign) {
        return [=](std::span<const double> x, std::span<double> y) {
            const double r = std::hypot(x[0], x[1]);
            const double th = sign * angle * (std::isinf(radius) ? 1.0 : cutoff(r / radius));
            const double c = std::cos(th), s = std::sin(th);
            y[0] = c * x[0] - s * x[1];
            y[1] = s * x[0] + c * x[1];
        };
    };
    DiffeoBlock b;
    b.kind = "rotation";
    b.axes = {i, j};
    b.forward = turn(1.0);
    b.inverse = turn(-1.0);
    // (r, phi) -> (r, phi + theta(r)) preserves area
    b.jacobian = [](std::span<const double>) { return 1.0; };
    return b;
}

DiffeoBlock shear_block(std::size_t target, std::size_t source, double amplitude, double width) {
    if (target == source) throw ValidationError("shear: target and source axes must differ");
    if (!(width > 0.0)) throw ValidationError("shear: width must be positive");
    auto bump = [width](double s) { return std::exp(-(s / width) * (s / width)); };
    DiffeoBlock b;
    b.kind = "shear";
    b.axes = {target, source};
    b.forward = [=](std::span<const double> x, std::span<double> y) {
        y[0] = x[0] + amplitude * bump(x[1]);
        y[1] = x[1];
    };
    b.inverse = [=](std::span<const double> x, std::span<double> y) {
        y[0] = x[0] - amplitude * bump(x[1]);
        y[1] = x[1];
    };
    b.jacobian = [](std::span<const double>) { return 1.0; };
    return b;
}

GridFunction compose_diffeo(const GridFunction& f, const StructuredDiffeo& sigma) {
    const Grid& g = f.grid();
    if (sigma.dim() != g.dim()) throw ValidationError("compose_diffeo: dimension mismatch");
    if (sigma.is_identity()) return f;
    const double rt = sigma.roundtrip_error(g);
    if (rt > 1e-10) {
        std::ostringstream msg;
        msg << "compose_diffeo: forward and inverse disagree by " << rt;
        throw ValidationError(msg.str());
    }
    if (edge_ratio(f) > 1e-12) throw ValidationError("compose_diffeo: f must decay below 1e-12 at the box edges");
    const double reference = f.sup_norm();
    GridFunction out = f;
    for (const auto& b : sigma.blocks()) out = compose_block(out, b, reference);
    return out;
}

void check_block_structure(const StructuredDiffeo& sigma, const SpaceParams& params, const Grid& grid) {
    if (params.dim() != sigma.dim() || grid.dim() != sigma.dim()) throw ValidationError("diffeo: parameter dimension mismatch");
    for (const auto& b : sigma.blocks()) {
        for (auto a : b.axes) {
            if (params.p[a] != params.p[b.axes.front()] || params.aniso[a] != params.aniso[b.axes.front()]) {
                std::ostringstream msg;
                msg << b.kind << " block mixes axes with different p or a (axes " << b.axes.front() << " and " << a << ")";
                throw ValidationError(msg.str());
            }
        }
    }
    if (const auto t = grid.time_axis(); t && !sigma.fixes_axis(*t))
        throw ValidationError("diffeo: the time axis must be left fixed");
}

InvarianceReport invariance_report(const GridFunction& f, const StructuredDiffeo& sigma, const SpaceParams& params) {
    check_block_structure(sigma, params, f.grid());
    const auto part = build_partition(params.aniso, f.grid());
    InvarianceReport rep;
    rep.J = part.J;
    rep.norm_f = f_norm(f, params, part);
    if (rep.norm_f == 0.0) throw ValidationError("invariance_report: f has zero norm");
    if (sigma.is_identity()) {
        rep.norm_composed = rep.norm_f;
        return rep;
    }
    rep.norm_composed = f_norm(compose_diffeo(f, sigma), params, part);
    rep.ratio = rep.norm_composed / rep.norm_f;
    return rep;
}

}  // namespace anisonorm

#include "anisonorm/kernels.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "anisonorm/decomposition.hpp"
#include "anisonorm/errors.hpp"
#include "parallel.hpp"

namespace anisonorm {
namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kMinSamplesPerBump = 4.0;

double bump_profile(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return std::exp(-0.1 / (x * (1.0 - x)));
}

double legendre(int n, double x) {
    if (n == 0) return 1.0;
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

double legendre_moment(const Stencil& s, int n, double lo, double hi) {
    double acc = 0.0;
    for (std::size_t m = 0; m < s.values.size(); ++m) {
        const double t = static_cast<double>(s.first + static_cast<long>(m)) * s.spacing;
        acc += legendre(n, (2.0 * t - lo - hi) / (hi - lo)) * s.values[m];
    }
    return acc * s.spacing;
}

std::vector<Stencil> convolution_powers(const Stencil& b, int count) {
    std::vector<Stencil> out{b};
    for (int k = 1; k < count; ++k) out.push_back(convolve(out.back(), b));
    return out;
}

Stencil combine(const std::vector<Stencil>& powers, const std::vector<double>& coeffs) {
    Stencil g = scaled(powers[0], coeffs[0]);
    for (std::size_t k = 1; k < powers.size(); ++k) g = g + scaled(powers[k], coeffs[k]);
    return g;
}

GeneratorShape normal_shape(Side side) { return side == Side::Minus ? GeneratorShape::Minus : GeneratorShape::Plus; }

std::vector<cplx> stencil_symbol(const Stencil& s, std::size_t n, double half_extent) {
    const Grid axis({n}, {half_extent});
    std::vector<cplx> v(n);
    const long origin = static_cast<long>(n / 2);
    for (std::size_t m = 0; m < s.values.size(); ++m) {
        const long idx = origin + s.first + static_cast<long>(m);
        v[static_cast<std::size_t>(((idx % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n))] +=
            s.values[m];
    }
    return dft(GridFunction(axis, std::move(v))).coeffs;
}

}  // namespace

// ---------------------------------------------------------------------------- stencils

double Stencil::mass() const { return moment(0); }

double Stencil::moment(int k) const {
    double acc = 0.0;
    for (std::size_t m = 0; m < values.size(); ++m)
        acc += std::pow(static_cast<double>(first + static_cast<long>(m)) * spacing, k) * values[m];
    return acc * spacing;
}

double Stencil::abs_mass() const {
    double acc = 0.0;
    for (double v : values) acc += std::abs(v);
    return acc * spacing;
}

Stencil convolve(const Stencil& a, const Stencil& b) {
    if (a.spacing != b.spacing) throw ValidationError("stencils on different lattices");
    Stencil out{a.first + b.first, std::vector<double>(a.values.size() + b.values.size() - 1, 0.0), a.spacing};
    for (std::size_t i = 0; i < a.values.size(); ++i)
        for (std::size_t k = 0; k < b.values.size(); ++k) out.values[i + k] += a.values[i] * b.values[k];
    for (auto& v : out.values) v *= a.spacing;
    return out;
}

Stencil operator+(const Stencil& a, const Stencil& b) {
    if (a.spacing != b.spacing) throw ValidationError("stencils on different lattices");
    const long first = std::min(a.first, b.first);
    const long last = std::max(a.last(), b.last());
    Stencil out{first, std::vector<double>(static_cast<std::size_t>(last - first + 1), 0.0), a.spacing};
    for (std::size_t m = 0; m < a.values.size(); ++m) out.values[static_cast<std::size_t>(a.first - first) + m] += a.values[m];
    for (std::size_t m = 0; m < b.values.size(); ++m) out.values[static_cast<std::size_t>(b.first - first) + m] += b.values[m];
    return out;
}

Stencil scaled(const Stencil& a, double factor) {
    Stencil out = a;
    for (auto& v : out.values) v *= factor;
    return out;
}

Stencil sampled_bump(double width, double spacing, GeneratorShape shape) {
    if (!(width > 0.0) || !(spacing > 0.0)) throw ValidationError("bump width and spacing must be positive");
    const double start = shape == GeneratorShape::Minus ? -width : shape == GeneratorShape::Plus ? 0.0 : -0.5 * width;
    const long lo = static_cast<long>(std::floor(start / spacing));
    const long hi = static_cast<long>(std::ceil((start + width) / spacing));
    Stencil s{lo, {}, spacing};
    for (long m = lo; m <= hi; ++m) s.values.push_back(bump_profile((static_cast<double>(m) * spacing - start) / width));
    // trim exact zeros at the ends
    while (!s.values.empty() && s.values.back() == 0.0) s.values.pop_back();
    std::size_t lead = 0;
    while (lead < s.values.size() && s.values[lead] == 0.0) ++lead;
    s.values.erase(s.values.begin(), s.values.begin() + static_cast<long>(lead));
    s.first += static_cast<long>(lead);
    if (s.values.empty()) throw NumericalGuardError("bump narrower than one lattice spacing");
    const double mass = s.mass();
    for (auto& v : s.values) v /= mass;
    return s;
}

// ---------------------------------------------------------------------------- generators

int generator_powers(int L_max, GeneratorShape shape) {
    if (L_max < 1) throw ValidationError("generator order L_max must be at least 1");
    return shape == GeneratorShape::Centered ? (L_max + 2) / 2 : L_max + 1;
}

MomentGenerator build_generator(int L_max, double spacing, GeneratorShape shape, double support) {
    const int m = generator_powers(L_max, shape);
    if (!(support > 0.0)) throw ValidationError("generator support must be positive");
    MomentGenerator gen;
    gen.L_max = L_max;
    gen.shape = shape;
    gen.support = support;
    gen.powers = m;
    gen.width = support / m;
    if (support < 8.0 * L_max * spacing || gen.width < kMinSamplesPerBump * spacing) {
        std::ostringstream msg;
        msg << "generator of order " << L_max << " on support " << support << " needs spacing <= "
            << std::min(support / (8.0 * L_max), gen.width / kMinSamplesPerBump) << ", got " << spacing;
        throw NumericalGuardError(msg.str());
    }

    const auto powers = convolution_powers(sampled_bump(gen.width, spacing, shape), m);
    const double lo = static_cast<double>(powers.back().first) * spacing;
    const double hi = static_cast<double>(powers.back().last()) * spacing;

    // Unit mass plus vanishing moments means  int p g = p(0)  for every polynomial p of degree <= L.
    // Row r tests this with a Legendre polynomial on the support: degrees 0..L, or 0,2,..,2(m-1) when centered.
    Eigen::MatrixXd M(m, m);
    Eigen::VectorXd rhs(m);
    const double origin = (-lo - hi) / (hi - lo);
    for (int r = 0; r < m; ++r) {
        const int degree = shape == GeneratorShape::Centered ? 2 * r : r;
        rhs(r) = legendre(degree, origin);
        for (int k = 0; k < m; ++k) M(r, k) = legendre_moment(powers[static_cast<std::size_t>(k)], degree, lo, hi);
    }
    Eigen::VectorXd col_scale(m);
    for (int k = 0; k < m; ++k) {
        col_scale(k) = 1.0 / M.col(k).cwiseAbs().maxCoeff();
        M.col(k) *= col_scale(k);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    gen.condition = sv(m - 1) > 0.0 ? sv(0) / sv(m - 1) : kInf;
    if (!(gen.condition <= kConditionLimit)) {
        std::ostringstream msg;
        msg << "moment system for L_max = " << L_max << " is ill-conditioned (condition " << gen.condition
            << "); lower L_max or refine the grid";
        throw NumericalGuardError(msg.str());
    }
    const Eigen::VectorXd c = svd.solve(rhs).cwiseProduct(col_scale);
    gen.coefficients.assign(c.data(), c.data() + m);

    gen.g = combine(powers, gen.coefficients);
    const double mass = gen.g.mass();
    for (auto& v : gen.g.values) v /= mass;
    for (auto& ck : gen.coefficients) ck /= mass;
    for (int k = 0; k <= L_max + 1; ++k) gen.moments.push_back(gen.g.moment(k));
    gen.relative_next_moment = std::abs(gen.moments.back()) / gen.g.abs_mass();
    return gen;
}

MomentGenerator build_generator(int L_max, const Grid& grid1d, GeneratorShape shape, double support) {
    if (grid1d.dim() != 1) throw ValidationError("build_generator expects a one-dimensional grid");
    auto gen = build_generator(L_max, grid1d.spacing(0), shape, support);
    const long half = static_cast<long>(grid1d.samples(0) / 2);
    if (gen.g.first < -half || gen.g.last() >= half)
        throw ValidationError("generator support does not fit inside the grid box");
    return gen;
}

// ---------------------------------------------------------------------------- kernel family

KernelFamily::KernelFamily(const Grid& grid, const Anisotropy& aniso, const KernelOptions& options)
    : grid_(grid), aniso_(aniso), options_(options) {
    if (aniso.dim() != grid.dim()) throw ValidationError("kernel family: anisotropy and grid differ in dimension");
    if (options.normal_axis >= grid.dim()) throw ValidationError("kernel family: normal axis out of range");
    if (!(options.support > 0.0)) throw ValidationError("kernel family: support must be positive");

    const std::size_t n = options.normal_axis;
    normal_gen_ = build_generator(options.L_max, grid.spacing(n), normal_shape(options.side), options.support);
    double tangential_spacing = kInf;
    for (std::size_t i = 0; i < grid.dim(); ++i)
        if (i != n) tangential_spacing = std::min(tangential_spacing, grid.spacing(i));
    tangential_gen_ = grid.dim() > 1
                          ? build_generator(options.L_max, tangential_spacing, GeneratorShape::Centered, options.support)
                          : normal_gen_;

    // Finest level at which every bump still spans kMinSamplesPerBump spacings.
    max_level_ = 1 << 20;
    for (std::size_t i = 0; i < grid.dim(); ++i) {
        const double w = (i == n ? normal_gen_ : tangential_gen_).width;
        const double ratio = w / (kMinSamplesPerBump * grid.spacing(i));
        max_level_ = std::min(max_level_, static_cast<int>(std::floor(std::log2(ratio) / aniso[i] + 1e-12)));
    }
    if (max_level_ < 0) throw NumericalGuardError("kernel family: level 0 is undersampled on this grid");

    for (int j = -1; j <= max_level_; ++j) levels_.push_back(make_level(j));

    // psi_0 * phi_0 has four times the generator support; it must fit inside the box without wrapping.
    for (std::size_t i = 0; i < grid.dim(); ++i) {
        const auto& a = levels_[1].kernels[i];
        const long half = static_cast<long>(grid.samples(i) / 2);
        if (4 * a.first < -half || 4 * a.last() >= half) {
            std::ostringstream msg;
            msg << "kernel support spills past the box on axis " << i << "; enlarge the box or reduce the support";
            throw ValidationError(msg.str());
        }
    }
}

KernelFamily::Level KernelFamily::make_level(int j) const {
    Level lv;
    for (std::size_t i = 0; i < grid_.dim(); ++i) {
        const bool normal = i == options_.normal_axis;
        const auto& gen = normal ? normal_gen_ : tangential_gen_;
        const auto shape = normal ? normal_shape(options_.side) : GeneratorShape::Centered;
        const double width = gen.width * std::exp2(-static_cast<double>(j) * aniso_[i]);
        const auto powers = convolution_powers(sampled_bump(width, grid_.spacing(i), shape), gen.powers);
        lv.kernels.push_back(combine(powers, gen.coefficients));
        lv.symbols.push_back(stencil_symbol(lv.kernels.back(), grid_.samples(i), grid_.half_extent(i)));
    }
    return lv;
}

const KernelFamily::Level& KernelFamily::level(int j) const {
    if (j < -1 || j > max_level_) {
        std::ostringstream msg;
        msg << "kernel level " << j << " is outside the resolvable range [-1, " << max_level_ << "]";
        throw NumericalGuardError(msg.str());
    }
    return levels_[static_cast<std::size_t>(j + 1)];
}

void KernelFamily::require_level(int J) const {
    if (J < 0) throw ValidationError("truncation level J must be non-negative");
    if (J > max_level_) {
        std::ostringstream msg;
        msg << "level " << J << " kernels would be narrower than " << kMinSamplesPerBump
            << " spacings; the finest resolvable level on this grid is " << max_level_;
        throw NumericalGuardError(msg.str());
    }
}

const Stencil& KernelFamily::axis_kernel(int j, std::size_t axis) const { return level(j).kernels.at(axis); }

const std::vector<cplx>& KernelFamily::axis_symbol(int j, std::size_t axis) const {
    return level(j).symbols.at(axis);
}

std::vector<cplx> KernelFamily::tensor_symbol(const std::vector<const std::vector<cplx>*>& factors) const {
    std::vector<cplx> out(grid_.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        cplx v = 1.0;
        for (std::size_t a = 0; a < grid_.dim(); ++a) v *= (*factors[a])[(i / grid_.stride(a)) % grid_.samples(a)];
        out[i] = v;
    }
    return out;
}

std::vector<cplx> KernelFamily::level_symbol(int j) const {
    const auto& lv = level(j);
    std::vector<const std::vector<cplx>*> f;
    for (const auto& s : lv.symbols) f.push_back(&s);
    return tensor_symbol(f);
}

std::vector<cplx> KernelFamily::phi_symbol(int j) const {
    auto fine = level_symbol(j);
    if (j == 0) return fine;
    const auto coarse = level_symbol(j - 1);
    for (std::size_t i = 0; i < fine.size(); ++i) fine[i] -= coarse[i];
    return fine;
}

std::vector<cplx> KernelFamily::psi_symbol(int j) const {
    auto fine = level_symbol(j);
    if (j == 0) {
        for (auto& v : fine) v = v * (2.0 - v * v);
        return fine;
    }
    const auto coarse = level_symbol(j - 1);
    for (std::size_t i = 0; i < fine.size(); ++i) {
        const cplx a = fine[i], b = coarse[i];
        fine[i] = (a + b) * (2.0 - a * a - b * b);
    }
    return fine;
}

std::vector<cplx> KernelFamily::calderon_symbol(int J) const {
    require_level(J);
    std::vector<cplx> acc(grid_.size(), 0.0);
    for (int j = 0; j <= J; ++j) {
        const auto p = phi_symbol(j);
        const auto s = psi_symbol(j);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s[i] * p[i];
    }
    return acc;
}

GridFunction KernelFamily::place(const std::vector<std::vector<Stencil>>& terms, const std::vector<double>& weights) const {
    std::vector<cplx> out(grid_.size());
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const auto& term = terms[t];
        for (std::size_t a = 0; a < grid_.dim(); ++a) {
            const long half = static_cast<long>(grid_.samples(a) / 2);
            if (term[a].first < -half || term[a].last() >= half)
                throw ValidationError("kernel support spills past the box boundary");
        }
        // Iterate over the tensor-product support.
        std::vector<std::size_t> idx(grid_.dim(), 0);
        while (true) {
            double v = weights[t];
            std::size_t flat = 0;
            for (std::size_t a = 0; a < grid_.dim(); ++a) {
                v *= term[a].values[idx[a]];
                const long pos = static_cast<long>(grid_.origin_index(a)) + term[a].first + static_cast<long>(idx[a]);
                flat += static_cast<std::size_t>(pos) * grid_.stride(a);
            }
            out[flat] += v;
            std::size_t a = grid_.dim();
            while (a-- > 0) {
                if (++idx[a] < term[a].values.size()) break;
                idx[a] = 0;
            }
            if (a == static_cast<std::size_t>(-1)) break;
        }
    }
    return GridFunction(grid_, std::move(out));
}

GridFunction KernelFamily::phi(int j) const {
    const auto& fine = level(j).kernels;
    if (j == 0) return place({fine}, {1.0});
    return place({fine, level(j - 1).kernels}, {1.0, -1.0});
}

std::vector<std::vector<Stencil>> KernelFamily::psi_terms(int j, int coarse) const {
    // (A + B)(2 - A^2 - B^2) = 2A + 2B - A^3 - A B^2 - B A^2 - B^3, each term a tensor product.
    const auto& A = level(j).kernels;
    const auto& B = level(coarse).kernels;
    std::vector<std::vector<Stencil>> terms(6);
    for (std::size_t a = 0; a < grid_.dim(); ++a) {
        const auto A2 = convolve(A[a], A[a]);
        const auto B2 = convolve(B[a], B[a]);
        terms[0].push_back(A[a]);
        terms[1].push_back(B[a]);
        terms[2].push_back(convolve(A2, A[a]));
        terms[3].push_back(convolve(A[a], B2));
        terms[4].push_back(convolve(B[a], A2));
        terms[5].push_back(convolve(B2, B[a]));
    }
    return terms;
}

GridFunction KernelFamily::psi(int j) const {
    if (j == 0) {
        const auto& A = level(0).kernels;
        std::vector<Stencil> cube;
        for (const auto& s : A) cube.push_back(convolve(convolve(s, s), s));
        return place({A, cube}, {2.0, -1.0});
    }
    return place(psi_terms(j, j - 1), {2.0, 2.0, -1.0, -1.0, -1.0, -1.0});
}

GridFunction KernelFamily::phi_mother() const { return place({level(0).kernels, level(-1).kernels}, {1.0, -1.0}); }

GridFunction KernelFamily::psi_mother() const { return place(psi_terms(0, -1), {2.0, 2.0, -1.0, -1.0, -1.0, -1.0}); }

double KernelFamily::outside_mass(const GridFunction& kernel) const {
    const std::size_t n = options_.normal_axis;
    double worst = 0.0;
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        const double x = grid_.coordinate(n, (i / grid_.stride(n)) % grid_.samples(n));
        const bool outside = options_.side == Side::Minus ? x > 0.0 : x < 0.0;
        if (outside) worst = std::max(worst, std::abs(kernel[i]));
    }
    return worst;
}

// ---------------------------------------------------------------------------- identities

double verify_telescoping(const KernelFamily& fam, int N) {
    if (N < 1) throw ValidationError("telescoping check needs N >= 1");
    const auto partial = fam.calderon_symbol(N - 1);
    const auto top = fam.level_symbol(N - 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < partial.size(); ++i) {
        const cplx a2 = top[i] * top[i];
        worst = std::max(worst, std::abs(partial[i] - (2.0 * a2 - a2 * a2)));
    }
    return worst;
}

GridFunction calderon_reconstruct(const GridFunction& u, const KernelFamily& fam, int J) {
    if (!(u.grid() == fam.grid())) throw ValidationError("calderon_reconstruct: grid does not match the kernel family");
    fam.require_level(J);
    const auto U = dft(u);
    std::vector<std::vector<cplx>> terms(static_cast<std::size_t>(J) + 1);
    detail::parallel_for(terms.size(), [&](std::size_t j) {
        const auto p = fam.phi_symbol(static_cast<int>(j));
        const auto s = fam.psi_symbol(static_cast<int>(j));
        terms[j].resize(U.coeffs.size());
        for (std::size_t i = 0; i < U.coeffs.size(); ++i) terms[j][i] = s[i] * (p[i] * U.coeffs[i]);
    });
    return idft(SpectralFunction{u.grid(), detail::tree_sum(std::move(terms))});
}

std::vector<double> reconstruction_residuals(const GridFunction& u, const KernelFamily& fam, int J_max) {
    const double norm = u.sup_norm();
    if (norm == 0.0) throw ValidationError("reconstruction residual of the zero function is undefined");
    std::vector<double> out;
    for (int J = 0; J <= J_max; ++J) out.push_back((u - calderon_reconstruct(u, fam, J)).sup_norm() / norm);
    return out;
}

// ---------------------------------------------------------------------------- local means

LocalMeans local_means_kernels(const GridFunction& k0, int order) {
    if (order < 1) throw ValidationError("local means need a Laplacian power N >= 1");
    double abs_mass = 0.0;
    cplx mass = 0.0;
    for (const auto& v : k0.values()) {
        abs_mass += std::abs(v);
        mass += v;
    }
    if (abs_mass == 0.0 || std::abs(mass) <= 1e-12 * abs_mass)
        throw ValidationError("local means kernel k0 must have non-zero mass");
    return {k0, spectral_laplacian(k0, order), order};
}

double localized_norm(const GridFunction& f, const LocalMeans& kernels, const SpaceParams& params, int J) {
    const Grid& grid = f.grid();
    if (!(grid == kernels.k0.grid())) throw ValidationError("localized_norm: kernel and function grids differ");
    if (params.dim() != grid.dim()) throw ValidationError("localized_norm: parameter dimension mismatch");
    const double limit = 2.0 * kernels.order * params.aniso.min_weight();
    if (!(params.s < limit)) {
        std::ostringstream msg;
        msg << "localized_norm: s = " << params.s << " must be below 2 N min(a) = " << limit;
        throw ValidationError(msg.str());
    }
    if (J < 0) J = default_level(params.aniso, grid);

    const auto F = dft(f);
    auto apply = [&](const std::vector<cplx>& symbol) {
        SpectralFunction s{grid, F.coeffs};
        for (std::size_t i = 0; i < symbol.size(); ++i) s.coeffs[i] *= symbol[i];
        return idft(s);
    };

    const std::vector<double> ones(grid.dim(), 1.0);
    const auto base = apply(dtft_scaled(kernels.k0, ones));

    std::vector<GridFunction> terms;
    for (int j = 1; j <= J; ++j) {
        std::vector<double> scales(grid.dim());
        for (std::size_t a = 0; a < grid.dim(); ++a) scales[a] = std::exp2(-static_cast<double>(j) * params.aniso[a]);
        auto symbol = dtft_scaled(kernels.k0, scales);
        for (std::size_t i = 0; i < symbol.size(); ++i) {
            double r2 = 0.0;
            for (std::size_t a = 0; a < grid.dim(); ++a) {
                const double eta = scales[a] * grid.frequency(a, (i / grid.stride(a)) % grid.samples(a));
                r2 += eta * eta;
            }
            symbol[i] *= std::pow(-r2, kernels.order) * std::exp2(static_cast<double>(j) * params.s);
        }
        terms.push_back(apply(symbol));
    }

    const double head = mixed_lp_norm(base, params.p);
    if (terms.empty()) return head;
    if (params.kind == ScaleKind::F) return head + mixed_lp_lq_norm(terms, params.p, params.q);
    double acc = 0.0;
    for (const auto& t : terms) {
        const double m = mixed_lp_norm(t, params.p);
        acc = std::isinf(params.q) ? std::max(acc, m) : acc + std::pow(m, params.q);
    }
    return head + (std::isinf(params.q) ? acc : std::pow(acc, 1.0 / params.q));
}

}  // namespace anisonorm

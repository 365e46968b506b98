#include "experiments.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "anisonorm/anisotropy.hpp"
#include "anisonorm/compatibility.hpp"
#include "anisonorm/decomposition.hpp"
#include "anisonorm/diffeo.hpp"
#include "anisonorm/errors.hpp"
#include "anisonorm/extension.hpp"
#include "anisonorm/grid.hpp"
#include "anisonorm/kernels.hpp"
#include "anisonorm/traces.hpp"
#include "json.hpp"

#ifndef ANISONORM_DEFAULT_BRACKETS
#define ANISONORM_DEFAULT_BRACKETS "data/brackets.json"
#endif

namespace anisonorm::experiments {

namespace {

using json = nlohmann::ordered_json;

std::size_t refine(Variant v) { return v == Variant::Refined ? 2 : 1; }
double shift_of(Variant v, double d) { return v == Variant::Translated ? d : 0.0; }

double gauss2(std::span<const double> x, double cx, double cy, double sx, double sy) {
    const double a = (x[0] - cx) / sx, b = (x[1] - cy) / sy;
    return std::exp(-0.5 * (a * a + b * b));
}

// r0 from F^{s,(1,2)}_{(2,2),2} on (x, t) into B^{s-1,1}_{2,2} on x.
Measurement trace_r0_constant(Variant v) {
    const std::size_t r = refine(v);
    const Grid g({64 * r, 64 * r}, {8.0, 4.0}, {1.0, 2.0}, 1);
    const SpaceParams params(1.5, Anisotropy({1.0, 2.0}), {2.0, 2.0}, 2.0, ScaleKind::F);
    const auto cyl = cylinder_form(params);
    const SpaceParams trace_params(params.s - cyl.at / cyl.pt, Anisotropy({1.0}), {2.0}, cyl.pt, ScaleKind::B);
    const auto part = build_partition(params.aniso, g);
    const auto trace_part = build_partition(trace_params.aniso, g.without_axis(1));
    const double dx = shift_of(v, 1.3);
    const double shapes[3][3] = {{0.7, 0.5, 0.0}, {1.0, 0.4, 0.3}, {0.5, 0.6, -0.2}};
    double worst = 0.0;
    for (const auto& s : shapes) {
        const auto f = GridFunction::sample(g, [&](std::span<const double> x) { return gauss2(x, dx, s[2], s[0], s[1]); });
        worst = std::max(worst, b_norm(time_trace_r0(f), trace_params, trace_part) / f_norm(f, params, part));
    }
    return {"trace_r0", worst, part.J, -1};
}

// Rychkov extension from {y >= 0} in F^{0.25}_{2,2} of the plane.
Measurement extension_constant(Variant v) {
    const std::size_t r = refine(v);
    const Grid g({256 * r, 512 * r}, {8.0, 8.0});
    KernelOptions o;
    o.support = 2.0;
    o.normal_axis = 1;
    o.side = Side::Minus;
    const KernelFamily base(Grid({256, 512}, {8.0, 8.0}), Anisotropy({1.0, 1.0}), o);
    const KernelFamily fam(g, Anisotropy({1.0, 1.0}), o);
    const int J = base.max_level();
    const SpaceParams params(0.25, Anisotropy({1.0, 1.0}), {2.0, 2.0}, 2.0, ScaleKind::F);
    const double dx = shift_of(v, 1.5);
    std::vector<HalfspaceFunction> fixtures;
    for (double cy : {0.3, 1.0}) {
        const auto u = GridFunction::sample(g, [&](std::span<const double> x) {
            return gauss2(x, dx, cy, 1.0, 0.8) * (1.0 + 0.2 * x[1]);
        });
        fixtures.push_back({u, 1, Side::Plus, 0.0});
    }
    const auto rep = extension_bound_report(fixtures, params, fam, J);
    return {"extension", rep.constant, J, fam.L_max()};
}

// K_{n+1} from B^{0.5}_{2,2}(R) into F^{1.5,(1,2)}_{(2,2),2}(R x R).
Measurement k_flat_constant(Variant v) {
    const std::size_t r = refine(v);
    const Grid space({64 * r}, {8.0});
    const Grid tgrid({512 * r}, {16.0});
    const auto prof = build_eta(tgrid);
    const Anisotropy aniso({1.0, 2.0});
    const Grid lifted = space.with_axis(1, tgrid.samples(0), tgrid.half_extent(0), 2.0, true);
    const auto part = build_partition(aniso, lifted);
    const SpaceParams params(1.5, aniso, {2.0, 2.0}, 2.0, ScaleKind::F);
    const SpaceParams input(0.5, Anisotropy({1.0}), {2.0}, 2.0, ScaleKind::B);
    const auto input_part = build_partition(input.aniso, space);
    const double dx = shift_of(v, 0.7);
    double worst = 0.0;
    int J = 0;
    for (unsigned seed : {1u, 2u, 3u}) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        std::vector<std::pair<int, cplx>> terms;
        for (int t = 0; t < 8; ++t) terms.emplace_back(static_cast<int>(std::lround(8.0 * unit(rng))), cplx(unit(rng), unit(rng)));
        const auto f = GridFunction::sample(space, [&](std::span<const double> x) {
            cplx acc = 0.0;
            for (const auto& [k, c] : terms) acc += c * std::polar(1.0, std::numbers::pi * k * (x[0] - dx) / 8.0);
            return acc;
        });
        const auto K = k_flat(f, prof, part, 2.0);
        J = K.J;
        worst = std::max(worst, f_norm(K.u, params, part) / b_norm(f, input, input_part));
    }
    return {"k_flat", worst, J, -1};
}

// F^{1.6,(2,4)} against F^{0.8,(1,2)}, p = (2, 3), q = 2.
Measurement rescale_constant(Variant v) {
    const std::size_t r = refine(v);
    const Grid g({64 * r, 64 * r}, {8.0, 8.0});
    const SpaceParams params(0.8, Anisotropy({1.0, 2.0}), {2.0, 3.0}, 2.0, ScaleKind::F);
    const auto scaled = rescale_params(params, 2.0);
    const auto part = build_partition(params.aniso, g);
    const auto part2 = build_partition(scaled.aniso, g);
    const double dx = shift_of(v, 1.1), dy = shift_of(v, -0.7);
    double worst = 0.0;
    for (double s : {0.5, 0.8, 1.2}) {
        const auto f = GridFunction::sample(g, [&](std::span<const double> x) { return gauss2(x, dx, dy, s, 0.8 * s); });
        worst = std::max(worst, f_norm(f, scaled, part2) / f_norm(f, params, part));
    }
    return {"rescale", worst, part.J, -1};
}

StructuredDiffeo shear_map() { return StructuredDiffeo(2, {shear_block(0, 1, 0.6, 1.2)}); }
StructuredDiffeo rotation_map() { return StructuredDiffeo(2, {rotation_block(0, 1, 0.8, 5.5)}); }

// The shear commutes with translations along x, so the translated variant shifts x only.
Measurement diffeo_constant(const std::string& key, Variant v) {
    const std::size_t r = refine(v);
    const Grid g({64 * r, 64 * r}, {6.0, 6.0});
    const SpaceParams params(1.5, Anisotropy({1.0, 1.0}), {3.0, 3.0}, 2.0, ScaleKind::F);
    const double dx = shift_of(v, 0.5);
    const auto f = GridFunction::sample(g, [&](std::span<const double> x) {
        return gauss2(x, 0.3 + dx, 0.2, 0.6, 0.4) + 0.5 * gauss2(x, -0.8 + dx, 0.9, 0.45, 0.5);
    });
    const bool shear = key.rfind("diffeo_shear", 0) == 0;
    const bool inverse = key.ends_with("_inverse");
    auto sigma = shear ? shear_map() : rotation_map();
    if (inverse) sigma = sigma.inverted();
    const auto rep = invariance_report(f, sigma, params);
    return {key, rep.ratio, rep.J, -1};
}

}  // namespace

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Base: return "base";
        case Variant::Refined: return "refined";
        case Variant::Translated: return "translated";
    }
    return "?";
}

const std::vector<std::string>& bracket_keys() {
    static const std::vector<std::string> keys{"trace_r0",     "extension",      "k_flat",
                                               "rescale",      "diffeo_shear",   "diffeo_shear_inverse",
                                               "diffeo_rotation", "diffeo_rotation_inverse"};
    return keys;
}

std::vector<Variant> bracket_variants(const std::string& key) {
    if (key.rfind("diffeo_rotation", 0) == 0) return {Variant::Base, Variant::Refined};
    return {Variant::Base, Variant::Refined, Variant::Translated};
}

Measurement measure(const std::string& key, Variant variant) {
    if (key == "trace_r0") return trace_r0_constant(variant);
    if (key == "extension") return extension_constant(variant);
    if (key == "k_flat") return k_flat_constant(variant);
    if (key == "rescale") return rescale_constant(variant);
    if (key.rfind("diffeo_", 0) == 0) {
        if (variant == Variant::Translated && key.rfind("diffeo_rotation", 0) == 0)
            throw ValidationError("rotation brackets have no translated variant");
        for (const auto& k : bracket_keys())
            if (k == key) return diffeo_constant(key, variant);
    }
    throw ValidationError("unknown bracket key: " + key);
}

bool within_bracket(double measured, double frozen, double tolerance) {
    return std::isfinite(measured) && std::abs(measured - frozen) <= tolerance * std::abs(frozen);
}

BracketStore BracketStore::load(const std::filesystem::path& path) {
    BracketStore store;
    std::ifstream in(path);
    if (!in) return store;
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("bracket store " + path.string() + ": " + e.what());
    }
    if (!doc.is_object() || doc.value("version", 0) != kStoreVersion || !doc.contains("brackets") ||
        !doc["brackets"].is_object())
        throw ValidationError("bracket store " + path.string() + ": expected version " + std::to_string(kStoreVersion));
    for (const auto& [key, e] : doc["brackets"].items()) {
        if (!e.is_object() || !e.contains("value") || !e["value"].is_number())
            throw ValidationError("bracket store entry " + key + " has no numeric value");
        Bracket b;
        b.value = e["value"].get<double>();
        b.J = e.value("J", 0);
        b.L_max = e.contains("L_max") && e["L_max"].is_number() ? e["L_max"].get<int>() : -1;
        store.entries_[key] = b;
    }
    return store;
}

void BracketStore::save(const std::filesystem::path& path) const {
    json doc;
    doc["version"] = kStoreVersion;
    doc["tolerance"] = kBracketTolerance;
    json brackets = json::object();
    for (const auto& [key, b] : entries_) {
        json e;
        e["value"] = b.value;
        e["J"] = b.J;
        e["L_max"] = b.L_max >= 0 ? json(b.L_max) : json(nullptr);
        brackets[key] = e;
    }
    doc["brackets"] = brackets;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write bracket store " + path.string());
    out << doc.dump(2) << '\n';
}

std::optional<Bracket> BracketStore::find(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::filesystem::path default_bracket_path() {
    if (const char* env = std::getenv("ANISONORM_BRACKETS"); env && *env) return env;
    return ANISONORM_DEFAULT_BRACKETS;
}

// ---------------------------------------------------------------------------------------------

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

Outcome within(double got, double tol) {
    std::ostringstream s;
    s.precision(3);
    s << "err " << got << " (tol " << tol << ")";
    return {got <= tol, s.str()};
}

Outcome holds(bool ok) { return {ok, ok ? "ok" : "violated"}; }

double max_diff(const GridFunction& a, const GridFunction& b) {
    if (a.size() != b.size()) return kInf;
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

GridFunction gaussian(const Grid& g, double var = 0.5) {
    return GridFunction::sample(g, [=](std::span<const double> x) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return std::exp(-r2 / (2.0 * var));
    });
}

GridFunction exponential(const Grid& g, const std::vector<long>& k) {
    return GridFunction::sample(g, [&](std::span<const double> x) {
        double ph = 0.0;
        for (std::size_t a = 0; a < x.size(); ++a) ph += std::numbers::pi * static_cast<double>(k[a]) * x[a] / g.half_extent(a);
        return std::polar(1.0, ph);
    });
}

GridFunction constant(const Grid& g, cplx c) { return GridFunction(g, std::vector<cplx>(g.size(), c)); }

KernelFamily line_family(Side side) {
    KernelOptions o;
    o.support = 2.0;
    o.side = side;
    return KernelFamily(Grid({2048}, {16.0}), Anisotropy({1.0}), o);
}

}  // namespace

std::vector<CheckResult> trivial_suite() {
    std::vector<CheckResult> out;
    auto run = [&](const std::string& module, const std::string& name, const std::function<Outcome()>& fn) {
        CheckResult r{module, name, false, ""};
        try {
            const auto o = fn();
            r.pass = o.pass;
            r.detail = o.detail;
        } catch (const std::exception& e) {
            r.detail = std::string("threw: ") + e.what();
        }
        out.push_back(std::move(r));
    };
    const double pi = std::numbers::pi;

    // anisotropy
    run("anisotropy", "identity dilation", [] {
        const std::vector<double> x{0.3, -1.7};
        return holds(dilate(1.0, Anisotropy({1.0, 3.0}), x) == x);
    });
    run("anisotropy", "dilation by powers", [] {
        const std::vector<double> x{1.0, 1.0};
        return holds(dilate(2.0, Anisotropy({1.0, 2.0}), x) == std::vector<double>{2.0, 4.0});
    });
    run("anisotropy", "zero dilation", [] {
        const std::vector<double> x{3.0, 5.0};
        return holds(dilate(0.0, Anisotropy({1.0, 2.0}), x) == std::vector<double>{0.0, 0.0});
    });
    run("anisotropy", "isotropic distance", [] {
        const std::vector<double> x{3.0, 4.0};
        return within(std::abs(aniso_distance(x, Anisotropy({1.0, 1.0})) - 5.0), 1e-12);
    });
    run("anisotropy", "rescale by one", [] {
        const SpaceParams p(1.0, Anisotropy({1.0, 2.0}), {2.0, 2.0}, 2.0, ScaleKind::F);
        const auto q = rescale_params(p, 1.0);
        return holds(q.s == 1.0 && q.aniso == p.aniso);
    });
    run("anisotropy", "rescale componentwise", [] {
        const auto q = rescale_params(SpaceParams(1.0, Anisotropy({1.0, 2.0}), {2.0, 2.0}, 2.0, ScaleKind::F), 2.0);
        return holds(q.s == 2.0 && q.aniso == Anisotropy({2.0, 4.0}));
    });
    run("anisotropy", "rescale precondition edge", [] {
        const SpaceParams p(3.0, Anisotropy({1.0, 1.0, 2.0}), {2.0, 2.0, 2.0}, 2.0, ScaleKind::F);
        rescale_params(p, 1.0);
        try {
            rescale_params(p, 0.5);
        } catch (const ValidationError&) {
            return holds(true);
        }
        return holds(false);
    });

    // grid
    const Grid g2({16, 8}, {2.0, 1.5});
    run("grid", "dft of zero", [&] {
        const auto F = dft(GridFunction::zeros(g2));
        double m = 0.0;
        for (auto c : F.coeffs) m = std::max(m, std::abs(c));
        return within(m, 0.0);
    });
    run("grid", "dft of an exponential", [&] {
        const auto F = dft(exponential(g2, {3, -2}));
        double off = 0.0;
        for (std::size_t i = 0; i < F.coeffs.size(); ++i) {
            const auto m = g2.unravel(i);
            if (g2.frequency_index(0, m[0]) != 3 || g2.frequency_index(1, m[1]) != -2) off = std::max(off, std::abs(F.coeffs[i]));
        }
        return within(off, 1e-12);
    });
    run("grid", "convolution with the delta", [&] {
        std::vector<cplx> d(g2.size(), 0.0);
        d[g2.origin_index(0) * g2.stride(0) + g2.origin_index(1)] = 1.0 / g2.cell_volume();
        const auto f = gaussian(g2);
        return within(max_diff(convolve(f, GridFunction(g2, d)), f), 1e-12);
    });
    run("grid", "convolution commutes with shifts", [&] {
        const auto f = gaussian(g2), g = exponential(g2, {1, 1}).pointwise_product(gaussian(g2, 0.2));
        const std::vector<long> s{3, -1};
        return within(max_diff(convolve(lattice_shift(f, s), g), lattice_shift(convolve(f, g), s)), 1e-12);
    });
    run("grid", "separable mixed norm", [] {
        const Grid g({32, 16}, {3.0, 2.0});
        const Grid gx({32}, {3.0}), gy({16}, {2.0});
        auto fx = [](double x) { return std::exp(-x * x); };
        auto fy = [](double y) { return 1.0 / (1.0 + y * y); };
        const auto u = GridFunction::sample(g, [&](std::span<const double> x) { return fx(x[0]) * fy(x[1]); });
        const auto ux = GridFunction::sample(gx, [&](std::span<const double> x) { return fx(x[0]); });
        const auto uy = GridFunction::sample(gy, [&](std::span<const double> x) { return fy(x[0]); });
        const std::vector<double> p{3.0, 1.5};
        const double want = mixed_lp_norm(ux, std::span(p).first(1)) * mixed_lp_norm(uy, std::span(p).last(1));
        return within(std::abs(mixed_lp_norm(u, p) / want - 1.0), 1e-12);
    });
    run("grid", "unmixed reduction", [&] {
        const auto u = gaussian(g2);
        const std::vector<double> p{2.5, 2.5};
        double acc = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) acc += std::pow(std::abs(u[i]), 2.5);
        return within(std::abs(mixed_lp_norm(u, p) / std::pow(acc * g2.cell_volume(), 0.4) - 1.0), 1e-12);
    });
    run("grid", "sequence norms", [&] {
        const auto u = gaussian(g2), v = u.scaled(0.5);
        const std::vector<double> p{2.0, 2.0};
        const std::vector<GridFunction> one{u}, pair{u, v}, three{u, u, u};
        const double n = mixed_lp_norm(u, p);
        const double e = std::max({std::abs(mixed_lp_lq_norm(one, p, 2.0) - n), std::abs(mixed_lp_lq_norm(pair, p, kInf) - n),
                                   std::abs(mixed_lp_lq_norm(three, p, 2.0) - std::sqrt(3.0) * n)});
        return within(e / n, 1e-12);
    });
    run("grid", "half-space truncation", [&] {
        const auto one = constant(g2, 1.0);
        const auto t = truncate_halfspace(one, 1, Side::Plus, 0.0);
        bool ok = true;
        for (std::size_t i = 0; i < t.size(); ++i) ok = ok && t[i] == (g2.point(i)[1] >= 0.0 ? 1.0 : 0.0);
        const auto f = truncate_halfspace(gaussian(g2), 1, Side::Plus, 0.0);
        ok = ok && max_diff(truncate_halfspace(f, 1, Side::Plus, 0.0), f) == 0.0;
        return holds(ok);
    });
    run("grid", "spectral derivative", [&] {
        const auto u = exponential(g2, {2, 1});
        const std::vector<int> zero{0, 0}, e1{1, 0};
        const double e = std::max(max_diff(spectral_derivative(u, zero), u),
                                  max_diff(spectral_derivative(u, e1), u.scaled(pi * 2.0 / 2.0)));
        return within(e, 1e-12);
    });

    // decomposition
    const Grid g3({32, 32}, {8.0, 8.0});
    const Anisotropy a12({1.0, 2.0});
    run("decomposition", "windows at the origin", [&] {
        const auto part = build_partition(a12, g3);
        bool ok = part.windows[0][0] == 1.0;
        for (int j = 1; j <= part.J; ++j) ok = ok && part.windows[static_cast<std::size_t>(j)][0] == 0.0;
        return holds(ok);
    });
    run("decomposition", "dilation of the windows", [] {
        double e = 0.0;
        for (int j = 2; j <= 5; ++j)
            for (double r : {0.3, 1.1, 2.0, 2.9})
                e = std::max(e, std::abs(window_at(RampKind::Smoothstep, j, r * std::exp2(j - 1)) - window_at(RampKind::Smoothstep, 1, r)));
        return within(e, 1e-15);
    });
    run("decomposition", "low band only", [&] {
        const auto u = exponential(g3, {1, 1}) + exponential(g3, {-2, 0});
        const auto b = lp_bands(u, build_partition(a12, g3));
        double rest = 0.0;
        for (std::size_t j = 1; j < b.bands.size(); ++j) rest = std::max(rest, b.bands[j].sup_norm());
        return within(std::max(max_diff(b.bands[0], u), rest), 1e-13);
    });
    run("decomposition", "corona overlap", [&] {
        const auto u = exponential(g3, {10, 0});  // |xi| = 3.93 sits in bands 2 and 3
        const auto b = lp_bands(u, build_partition(Anisotropy({1.0, 1.0}), g3));
        double rest = 0.0;
        for (std::size_t j = 0; j < b.bands.size(); ++j)
            if (j != 2 && j != 3) rest = std::max(rest, b.bands[j].sup_norm());
        return within(rest, 1e-13);
    });
    run("decomposition", "norms of zero", [&] {
        const SpaceParams p(1.0, a12, {2.0, 2.0}, 2.0, ScaleKind::F);
        const auto part = build_partition(a12, g3);
        const auto z = GridFunction::zeros(g3);
        return within(f_norm(z, p, part) + b_norm(z, p.with_kind(ScaleKind::B), part), 0.0);
    });
    run("decomposition", "single band norms", [&] {
        const SpaceParams p(1.3, a12, {2.0, 3.0}, 2.0, ScaleKind::F);
        const auto part = build_partition(a12, g3);
        const auto u = exponential(g3, {1, 0}) + exponential(g3, {0, 1}).scaled(0.5);
        const double n = mixed_lp_norm(u, p.p);
        return within(std::max(std::abs(f_norm(u, p, part) - n), std::abs(b_norm(u, p.with_kind(ScaleKind::B), part) - n)) / n, 1e-12);
    });
    run("decomposition", "Besov monotone in s", [&] {
        const auto part = build_partition(a12, g3);
        const auto u = gaussian(g3, 0.3);
        const SpaceParams p(0.5, a12, {2.0, 2.0}, kInf, ScaleKind::B);
        return holds(b_norm(u, p.with_s(1.0), part) >= b_norm(u, p, part));
    });
    run("decomposition", "Peetre maximal dominates", [&] {
        const auto u = gaussian(g3, 0.2);
        const std::vector<double> r{1.0, 1.0}, r2{2.0, 2.0};
        const auto m = peetre_maximal(u, a12, r, 1), m2 = peetre_maximal(u, a12, r2, 1);
        bool ok = true;
        for (std::size_t i = 0; i < u.size(); ++i) ok = ok && m[i].real() >= std::abs(u[i]) && m2[i].real() <= m[i].real() + 1e-15;
        return holds(ok);
    });
    run("decomposition", "constant multiplier", [&] {
        const SpaceParams p(0.5, a12, {2.0, 2.0}, 2.0, ScaleKind::F);
        const auto part = build_partition(a12, g3);
        const auto u = gaussian(g3);
        const double e = std::max(std::abs(pointwise_multiply_report(constant(g3, 1.0), u, p, part).ratio - 1.0),
                                  std::abs(pointwise_multiply_report(constant(g3, {0.0, -2.5}), u, p, part).ratio - 2.5));
        return within(e, 1e-12);
    });

    // kernels
    run("kernels", "generator normalisation", [] {
        const auto g = build_generator(4, Grid({512}, {4.0}));
        return within(std::abs(g.moments[0] - 1.0), 1e-13);
    });
    run("kernels", "next moment recorded", [] {
        const auto g = build_generator(4, Grid({512}, {4.0}));
        return holds(g.moments.size() == 6 && g.relative_next_moment > 0.0);
    });
    const auto fam = line_family(Side::Minus);
    run("kernels", "phi has zero mean", [&] { return within(std::abs(fam.phi_symbol(1)[0]), 1e-14); });
    run("kernels", "telescoping with one term", [&] { return within(verify_telescoping(fam, 1), 1e-12); });
    run("kernels", "partial sums at the origin", [&] {
        double e = 0.0;
        for (int N = 1; N <= fam.max_level() + 1; ++N) e = std::max(e, std::abs(fam.calderon_symbol(N - 1)[0] - 1.0));
        return within(e, 1e-12);
    });
    run("kernels", "reconstruction of zero", [&] {
        return within(calderon_reconstruct(GridFunction::zeros(fam.grid()), fam, 1).sup_norm(), 0.0);
    });
    const Grid gl({64, 64}, {4.0, 4.0});
    run("kernels", "local means kill the mean", [&] {
        const auto lm = local_means_kernels(gaussian(gl, 0.1), 2);
        return within(std::abs(dft(lm.k).coeffs[0]), 1e-12);
    });
    run("kernels", "local means symbol", [&] {
        const auto lm = local_means_kernels(gaussian(gl, 0.1), 2);
        const auto K = dft(lm.k), K0 = dft(lm.k0);
        double e = 0.0;
        for (std::size_t i = 0; i < gl.size(); ++i) {
            const auto xi = gl.frequency_point(i);
            const double r2 = xi[0] * xi[0] + xi[1] * xi[1];
            e = std::max(e, std::abs(K.coeffs[i] - r2 * r2 * K0.coeffs[i]));
        }
        return within(e, 1e-12);
    });
    run("kernels", "localized norm homogeneity", [&] {
        const auto lm = local_means_kernels(gaussian(gl, 0.1), 1);
        const SpaceParams p(0.5, Anisotropy({1.0, 1.0}), {2.0, 2.0}, 2.0, ScaleKind::F);
        const auto f = gaussian(gl, 0.7);
        const double n = localized_norm(f, lm, p);
        return within(std::abs(localized_norm(f.scaled({0.0, 3.0}), lm, p) - 3.0 * n) / n +
                          localized_norm(GridFunction::zeros(gl), lm, p),
                      1e-12);
    });

    // extension
    run("extension", "zero data", [&] {
        const HalfspaceFunction f{GridFunction::zeros(fam.grid()), 0, Side::Plus, 0.0};
        return within(rychkov_extend(f, fam, 1).sup_norm(), 0.0);
    });
    run("extension", "linearity", [&] {
        const auto& g = fam.grid();
        const auto u = GridFunction::sample(g, [](std::span<const double> x) { return std::exp(-(x[0] - 1.0) * (x[0] - 1.0)); });
        const auto v = GridFunction::sample(g, [](std::span<const double> x) { return std::cos(x[0]) * std::exp(-x[0] * x[0] / 4); });
        const cplx a{0.3, 1.0}, b = -2.0;
        const auto lhs = rychkov_extend({u.scaled(a) + v.scaled(b), 0, Side::Plus, 0.0}, fam, 2);
        const auto rhs = rychkov_extend({u, 0, Side::Plus, 0.0}, fam, 2).scaled(a) + rychkov_extend({v, 0, Side::Plus, 0.0}, fam, 2).scaled(b);
        return within(max_diff(lhs, rhs), 1e-12);
    });
    run("extension", "extension below zero", [&] {
        const auto& g = fam.grid();
        const auto u = GridFunction::sample(g, [](std::span<const double> x) { return std::exp(-(x[0] + 1.0) * (x[0] + 1.0)); });
        const auto below = rychkov_extend_below({u, 0, Side::Minus, 0.0}, 0.0, fam, 2);
        const auto direct = reflect_normal(rychkov_extend({reflect_normal(u, 0, 0.0), 0, Side::Plus, 0.0}, fam, 2), 0, 0.0);
        return within(max_diff(below, direct), 1e-12);
    });
    run("extension", "degenerate member skipped", [&] {
        const SpaceParams p(0.5, Anisotropy({1.0}), {2.0}, 2.0, ScaleKind::F);
        const auto rep = extension_bound_report({{GridFunction::zeros(fam.grid()), 0, Side::Plus, 0.0}}, p, fam, 1);
        return holds(rep.skipped == 1 && std::isnan(rep.ratios[0]));
    });

    // traces
    const Grid tg({128}, {16.0});
    run("traces", "modulator spectra are disjoint", [&] {
        const auto prof = build_eta(tg);
        return holds(prof.frequencies().front() > 1.0 && prof.top_frequency() < 2.0);
    });
    run("traces", "separable slice", [&] {
        const auto f = GridFunction::sample(g2, [](std::span<const double> x) { return std::exp(-x[0] * x[0]) * std::cos(x[1]); });
        const Grid g1({16}, {2.0});
        return within(max_diff(hyperplane_trace(f, 1), GridFunction::sample(g1, [](std::span<const double> x) { return std::exp(-x[0] * x[0]); })), 1e-15);
    });
    run("traces", "slice of a constant", [&] {
        const auto s = hyperplane_trace(constant(g2, 2.5), 0);
        return within(max_diff(s, constant(s.grid(), 2.5)), 0.0);
    });
    run("traces", "right inverses of zero", [&] {
        const Grid space({32}, {4.0});
        const auto prof = build_eta(tg);
        const auto part = build_partition(Anisotropy({1.0, 2.0}), space.with_axis(1, 128, 16.0, 2.0, true));
        const auto z = GridFunction::zeros(space);
        const auto kn = k_normal(z, prof, build_partition(Anisotropy({1.0, 1.0}), Grid({128, 32}, {16.0, 4.0})), 1.0, 0);
        return within(k_flat(z, prof, part, 2.0).u.sup_norm() + kn.u.sup_norm(), 0.0);
    });
    run("traces", "Q of zero", [&] {
        const auto plus = line_family(Side::Plus);
        const auto q = q_apply(GridFunction::zeros(plus.grid()), plus, build_eta(tg), 2.0, 1);
        return within(q.u.sup_norm(), 0.0);
    });
    run("traces", "Q estimate homogeneity", [&] {
        const Grid sg({32}, {4.0});
        const Grid tt({64}, {8.0});
        auto f1 = [](double t) { return 1.0 / (1.0 + t * t); };
        const std::vector<double> p{2.0, 2.0};
        std::vector<GridFunction> seq{gaussian(sg), gaussian(sg, 0.2)}, twice, zero{GridFunction::zeros(sg)};
        for (const auto& v : seq) twice.push_back(v.scaled(2.0));
        const auto a = q_prop_bound_check(seq, tt, f1, 2.0, 2.0, 1.0, p, 2.0);
        const auto b = q_prop_bound_check(twice, tt, f1, 2.0, 2.0, 1.0, p, 2.0);
        const auto z = q_prop_bound_check(zero, tt, f1, 2.0, 2.0, 1.0, p, 2.0);
        return within(std::abs(b.lhs - 2 * a.lhs) / a.lhs + std::abs(b.rhs - 2 * a.rhs) / a.rhs + z.lhs + z.rhs, 1e-12);
    });
    run("traces", "support report gating", [&] {
        const auto& g = fam.grid();
        const auto z = GridFunction::zeros(g.with_axis(1, 16, 8.0, 2.0, true));
        const auto r0 = support_report(gaussian(g), z, 0, 2 * g.spacing(0));
        const auto r1 = support_report(truncate_halfspace(gaussian(g), 0, Side::Plus, 0.0), z, 0, 2 * g.spacing(0));
        return holds(!r0.applicable && r1.applicable && r1.pass && r1.max_leakage == 0.0);
    });

    // diffeo
    const Grid gd({64, 64}, {6.0, 6.0});
    const auto bump = GridFunction::sample(gd, [](std::span<const double> x) { return gauss2(x, 0.3, -0.2, 0.7, 0.7); });
    run("diffeo", "identity composition", [&] { return within(max_diff(compose_diffeo(bump, StructuredDiffeo(2)), bump), 1e-12); });
    run("diffeo", "translation matches the shift theorem", [&] {
        const double b0 = 0.37, b1 = -0.81;
        const auto shifted = compose_diffeo(bump, StructuredDiffeo(2, {translation_block({0, 1}, {b0, b1})}));
        auto F = dft(bump);
        for (std::size_t i = 0; i < F.coeffs.size(); ++i) {
            const auto xi = gd.frequency_point(i);
            F.coeffs[i] *= std::polar(1.0, xi[0] * b0 + xi[1] * b1);
        }
        return within(max_diff(shifted, idft(F)), 1e-10);
    });
    const SpaceParams pd(0.8, Anisotropy({1.0, 1.0}), {2.0, 2.0}, 2.0, ScaleKind::F);
    run("diffeo", "identity ratio", [&] { return within(std::abs(invariance_report(bump, StructuredDiffeo(2), pd).ratio - 1.0), 0.0); });
    run("diffeo", "inverse ratio product", [&] {
        const StructuredDiffeo s(2, {shear_block(0, 1, 0.5, 1.2)});
        const double r = invariance_report(bump, s, pd).ratio;
        const double ri = invariance_report(compose_diffeo(bump, s), s.inverted(), pd).ratio;
        return within(std::abs(r * ri - 1.0), 1e-9);
    });

    // compatibility
    run("compatibility", "empty admissible range", [] {
        return holds(admissible_l(SpaceParams(0.5, Anisotropy({1.0, 1.0, 1.0, 2.0}), {2.0, 2.0, 2.0, 2.0}, 2.0, ScaleKind::F)) == -1);
    });
    run("compatibility", "l = 0 with positive thresholds", [] {
        return holds(admissible_l(SpaceParams(2.5, Anisotropy({1.0, 1.0, 1.0, 2.0}), {2.0, 2.0, 2.0, 2.0}, 2.0, ScaleKind::F)) >= 0);
    });
    const Grid gc({16, 32}, {4.0, 2.0}, {1.0, 2.0}, 1);
    run("compatibility", "separable corner trace", [&] {
        const auto phi = GridFunction::sample(gc, [](std::span<const double> x) { return std::exp(-x[0] * x[0]) * std::exp(-x[1] * x[1] * 4.0); });
        const auto want = GridFunction::sample(Grid({16}, {4.0}), [](std::span<const double> x) { return std::exp(-x[0] * x[0]); });
        return within(max_diff(corner_trace_curved(phi, 0), want) + corner_trace_curved(GridFunction::zeros(gc), 1).sup_norm(), 1e-15);
    });
    run("compatibility", "flat corner trace delegates", [] {
        const Grid g({16, 16}, {4.0, 4.0});
        const auto u = gaussian(g);
        return within(max_diff(corner_trace_flat(u), hyperplane_trace(u, 1)), 0.0);
    });
    run("compatibility", "stationary balance", [] {
        const Grid g({32, 32, 8}, {8.0, 8.0, 1.0}, {1.0, 1.0, 2.0}, 2);
        const auto u = GridFunction::sample(g, [](std::span<const double> x) { return std::exp(-(x[0] * x[0] + x[1] * x[1]) / 2.0); });
        const std::vector<std::size_t> axes{0, 1};
        const auto g_src = spectral_laplacian(u, 1, axes).scaled(-1.0);
        return within(heat_residual(u, g_src).sup_norm() + heat_residual(GridFunction::zeros(g), GridFunction::zeros(g)).sup_norm(), 1e-10);
    });
    return out;
}

}  // namespace anisonorm::experiments

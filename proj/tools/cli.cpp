#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "anisonorm/agf.hpp"
#include "anisonorm/compatibility.hpp"
#include "anisonorm/decomposition.hpp"
#include "anisonorm/diffeo.hpp"
#include "anisonorm/errors.hpp"
#include "anisonorm/extension.hpp"
#include "anisonorm/kernels.hpp"
#include "anisonorm/traces.hpp"
#include "experiments.hpp"
#include "json.hpp"

using namespace anisonorm;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitGuard = 3;

// ---- config access --------------------------------------------------------------------------

void allow_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
    for (const auto& [k, v] : j.items())
        if (!allowed.contains(k)) throw ValidationError(where + ": unknown key '" + k + "'");
}

const json& need(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ValidationError(where + ": missing key '" + key + "'");
    return j[key];
}

double as_number(const json& v, const std::string& what) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) return kInf;
    throw ValidationError(what + ": expected a number or \"inf\"");
}

int as_int(const json& v, const std::string& what) {
    if (!v.is_number_integer()) throw ValidationError(what + ": expected an integer");
    return v.get<int>();
}

std::string as_string(const json& v, const std::string& what) {
    if (!v.is_string()) throw ValidationError(what + ": expected a string");
    return v.get<std::string>();
}

std::vector<double> as_numbers(const json& v, const std::string& what) {
    if (!v.is_array() || v.empty()) throw ValidationError(what + ": expected a non-empty array");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(as_number(e, what));
    return out;
}

std::vector<std::size_t> as_sizes(const json& v, const std::string& what) {
    if (!v.is_array() || v.empty()) throw ValidationError(what + ": expected a non-empty array");
    std::vector<std::size_t> out;
    for (const auto& e : v) {
        if (!e.is_number_integer() || e.get<long>() <= 0) throw ValidationError(what + ": expected positive integers");
        out.push_back(e.get<std::size_t>());
    }
    return out;
}

json number_or_inf(double x) { return std::isinf(x) ? json("inf") : json(x); }

json nullable_level(int L_max) { return L_max >= 0 ? json(L_max) : json(nullptr); }

SpaceParams parse_params(const json& j) {
    allow_keys(j, {"s", "aniso", "p", "q", "kind"}, "params");
    const auto a = as_numbers(need(j, "aniso", "params"), "params.aniso");
    const auto p = as_numbers(need(j, "p", "params"), "params.p");
    const double q = j.contains("q") ? as_number(j["q"], "params.q") : 2.0;
    const auto kind = j.contains("kind") ? scale_kind_from_string(as_string(j["kind"], "params.kind")) : ScaleKind::F;
    return SpaceParams(as_number(need(j, "s", "params"), "params.s"), Anisotropy(a), p, q, kind);
}

json params_json(const SpaceParams& p) {
    json j;
    j["s"] = p.s;
    j["aniso"] = p.aniso.weights();
    json pj = json::array();
    for (double x : p.p) pj.push_back(number_or_inf(x));
    j["p"] = pj;
    j["q"] = number_or_inf(p.q);
    j["kind"] = to_string(p.kind);
    return j;
}

Grid parse_grid(const json& j, const std::string& where) {
    allow_keys(j, {"N", "L", "aniso", "time_axis"}, where);
    const auto N = as_sizes(need(j, "N", where), where + ".N");
    const auto L = as_numbers(need(j, "L", where), where + ".L");
    std::vector<double> a;
    if (j.contains("aniso")) a = as_numbers(j["aniso"], where + ".aniso");
    std::optional<std::size_t> t;
    if (j.contains("time_axis")) {
        if (!j["time_axis"].is_boolean()) throw ValidationError(where + ".time_axis: expected a boolean");
        if (j["time_axis"].get<bool>()) t = N.size() - 1;
    }
    return Grid(N, L, a, t);
}

Side parse_side(const json& v, const std::string& what) {
    const auto s = as_string(v, what);
    if (s == "plus") return Side::Plus;
    if (s == "minus") return Side::Minus;
    throw ValidationError(what + ": expected \"plus\" or \"minus\"");
}

std::string side_name(Side s) { return s == Side::Plus ? "plus" : "minus"; }

KernelOptions parse_kernels(const json& j) {
    allow_keys(j, {"L_max", "support", "normal_axis", "side"}, "kernels");
    KernelOptions o;
    if (j.contains("L_max")) o.L_max = as_int(j["L_max"], "kernels.L_max");
    if (j.contains("support")) o.support = as_number(j["support"], "kernels.support");
    if (j.contains("normal_axis")) o.normal_axis = static_cast<std::size_t>(as_int(j["normal_axis"], "kernels.normal_axis"));
    if (j.contains("side")) o.side = parse_side(j["side"], "kernels.side");
    return o;
}

json kernel_options_json(const KernelOptions& o) {
    json j;
    j["L_max"] = o.L_max;
    j["support"] = o.support;
    j["normal_axis"] = o.normal_axis;
    j["side"] = side_name(o.side);
    return j;
}

RampKind parse_ramp(const json& j) {
    return j.contains("ramp") ? ramp_kind_from_string(as_string(j["ramp"], "ramp")) : RampKind::Smoothstep;
}

// ---- I/O ---------------------------------------------------------------------------------------

struct Context {
    fs::path base;  ///< directory of the config file; relative paths resolve against it
    json config;
};

Context load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config " + path);
    Context ctx;
    ctx.base = fs::path(path).parent_path();
    try {
        ctx.config = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    return ctx;
}

fs::path resolve(const Context& ctx, const json& v, const std::string& what) {
    const fs::path p = as_string(v, what);
    return p.is_absolute() ? p : ctx.base / p;
}

GridFunction load_agf(const Context& ctx, const json& v, const std::string& what) {
    const auto path = resolve(ctx, v, what);
    if (!fs::exists(path)) throw ValidationError(what + ": cannot read " + path.string());
    return read_agf(path);
}

void maybe_write_agf(const Context& ctx, const std::string& key, const GridFunction& u) {
    if (ctx.config.contains(key)) write_agf(u, resolve(ctx, ctx.config[key], key));
}

void emit(const Context& ctx, const json& report) {
    const std::string text = report.dump(2) + "\n";
    if (ctx.config.contains("output")) {
        const auto path = resolve(ctx, ctx.config["output"], "output");
        std::ofstream out(path);
        if (!out) throw ValidationError("cannot write " + path.string());
        out << text;
    } else {
        std::cout << text;
    }
}

json header(const std::string& name, int J, int L_max) {
    json j;
    j["subcommand"] = name;
    j["J"] = J;
    j["L_max"] = nullable_level(L_max);
    return j;
}

// ---- subcommands --------------------------------------------------------------------------------

int cmd_norm(const Context& ctx) {
    const json& c = ctx.config;
    allow_keys(c, {"input", "params", "J", "ramp", "norms", "output"}, "norm");
    const auto u = load_agf(ctx, need(c, "input", "norm"), "input");
    const auto params = parse_params(need(c, "params", "norm"));
    const auto kind = parse_ramp(c);
    const auto part = c.contains("J") ? build_partition(params.aniso, as_int(c["J"], "J"), u.grid(), kind)
                                      : build_partition(params.aniso, u.grid(), kind);
    std::vector<std::string> which{"F", "B"};
    if (c.contains("norms")) {
        which.clear();
        for (const auto& n : c["norms"]) which.push_back(as_string(n, "norms"));
    }
    json norms;
    for (const auto& n : which) {
        const auto k = scale_kind_from_string(n);
        norms[n] = space_norm(u, params.with_kind(k), part);
    }
    auto r = header("norm", part.J, -1);
    r["ramp"] = to_string(kind);
    r["params"] = params_json(params);
    r["norms"] = norms;
    emit(ctx, r);
    return 0;
}

int cmd_decompose(const Context& ctx) {
    const json& c = ctx.config;
    allow_keys(c, {"input", "aniso", "J", "ramp", "p", "csv", "bands_prefix"}, "decompose");
    const auto u = load_agf(ctx, need(c, "input", "decompose"), "input");
    const Anisotropy aniso(as_numbers(need(c, "aniso", "decompose"), "aniso"));
    const auto kind = parse_ramp(c);
    const auto part = c.contains("J") ? build_partition(aniso, as_int(c["J"], "J"), u.grid(), kind)
                                      : build_partition(aniso, u.grid(), kind);
    const auto p = c.contains("p") ? as_numbers(c["p"], "p") : std::vector<double>(u.grid().dim(), 2.0);
    if (p.size() != u.grid().dim()) throw ValidationError("decompose: p must have one entry per axis");
    const auto bands = lp_bands(u, part);
    std::ostringstream csv;
    csv.precision(17);
    csv << "j,J,L_max,sup,lp\n";
    for (std::size_t j = 0; j < bands.bands.size(); ++j)
        csv << j << ',' << part.J << ",," << bands.bands[j].sup_norm() << ',' << mixed_lp_norm(bands.bands[j], p) << '\n';
    if (c.contains("bands_prefix")) {
        const auto prefix = resolve(ctx, c["bands_prefix"], "bands_prefix").string();
        for (std::size_t j = 0; j < bands.bands.size(); ++j) write_agf(bands.bands[j], prefix + std::to_string(j) + ".agf");
    }
    if (c.contains("csv")) {
        const auto path = resolve(ctx, c["csv"], "csv");
        std::ofstream out(path);
        if (!out) throw ValidationError("cannot write " + path.string());
        out << csv.str();
    } else {
        std::cout << csv.str();
    }
    return 0;
}

json generator_json(const MomentGenerator& g) {
    json j;
    j["L_max"] = g.L_max;
    j["support"] = g.support;
    j["width"] = g.width;
    j["powers"] = g.powers;
    j["coefficients"] = g.coefficients;
    j["condition"] = g.condition;
    j["moments"] = g.moments;
    j["relative_next_moment"] = g.relative_next_moment;
    return j;
}

int cmd_kernels(const Context& ctx) {
    const json& c = ctx.config;
    allow_keys(c, {"grid", "aniso", "kernels", "output"}, "kernels");
    const Grid grid = parse_grid(need(c, "grid", "kernels"), "grid");
    const Anisotropy aniso(as_numbers(need(c, "aniso", "kernels"), "aniso"));
    const auto opts = c.contains("kernels") ? parse_kernels(c["kernels"]) : KernelOptions{};
    const KernelFamily fam(grid, aniso, opts);
    auto r = header("kernels", fam.max_level(), fam.L_max());
    r["options"] = kernel_options_json(opts);
    r["max_level"] = fam.max_level();
    r["normal_generator"] = generator_json(fam.normal_generator());
    r["tangential_generator"] = generator_json(fam.tangential_generator());
    json tele = json::array(), outside = json::array();
    for (int N = 1; N <= fam.max_level() + 1; ++N) tele.push_back({{"N", N}, {"error", verify_telescoping(fam, N)}});
    for (int j = 0; j <= fam.max_level(); ++j)
        outside.push_back({{"j", j}, {"phi", fam.outside_mass(fam.phi(j))}, {"psi", fam.outside_mass(fam.psi(j))}});
    r["telescoping"] = tele;
    r["outside_mass"] = outside;
    emit(ctx, r);
    return 0;
}

int cmd_extend(const Context& ctx) {
    const json& c = ctx.config;
    allow_keys(c, {"input", "axis", "side", "offset", "below", "kernels", "J", "output", "output_agf"}, "extend");
    const auto u = load_agf(ctx, need(c, "input", "extend"), "input");
    const auto axis = static_cast<std::size_t>(as_int(need(c, "axis", "extend"), "axis"));
    const bool below = c.contains("below");
    const Side side = c.contains("side") ? parse_side(c["side"], "side") : (below ? Side::Minus : Side::Plus);
    const double offset = c.contains("offset") ? as_number(c["offset"], "offset") : 0.0;
    KernelOptions opts = c.contains("kernels") ? parse_kernels(c["kernels"]) : KernelOptions{};
    if (c.contains("kernels") && c["kernels"].contains("normal_axis") && opts.normal_axis != axis)
        throw ValidationError("extend: kernels.normal_axis differs from axis");
    opts.normal_axis = axis;
    opts.side = below ? Side::Minus : (side == Side::Plus ? Side::Minus : Side::Plus);
    const KernelFamily fam(u.grid(), Anisotropy(u.grid().weights()), opts);
    const int J = c.contains("J") ? as_int(c["J"], "J") : fam.max_level();
    const HalfspaceFunction f{u, axis, side, offset};
    GridFunction ext = GridFunction::zeros(u.grid());
    if (below) {
        const double C = as_number(c["below"], "below");
        if (side != Side::Minus) throw ValidationError("extend: extension below C needs side \"minus\"");
        ext = rychkov_extend_below(f, C, fam, J);
    } else {
        ext = rychkov_extend(f, fam, J);
    }
    auto r = header("extend", J, fam.L_max());
    r["axis"] = axis;
    r["side"] = side_name(side);
    r["offset"] = offset;
    r["restriction_error"] = restriction_error(f, ext);
    if (!below) r["calderon_residual"] = reconstruction_residuals(f.zero_extension(), fam, J).back();
    r["sup"] = ext.sup_norm();
    maybe_write_agf(ctx, "output_agf", ext);
    emit(ctx, r);
    return 0;
}

int cmd_trace(const Context& ctx) {
    const json& c = ctx.config;
    allow_keys(c, {"input", "axis", "params", "output", "output_agf"}, "trace");
    const auto u = load_agf(ctx, need(c, "input", "trace"), "input");
    const auto t = u.grid().time_axis();
    std::size_t axis;
    if (c.contains("axis")) {
        axis = static_cast<std::size_t>(as_int(c["axis"], "axis"));
    } else if (t) {
        axis = *t;
    } else {
        throw ValidationError("trace: give an axis or supply a grid with a time axis");
    }
    if (axis >= u.grid().dim()) throw ValidationError("trace: axis out of range");
    const auto tr = hyperplane_trace(u, axis);
    auto r = header("trace", -1, -1);
    r["axis"] = axis;
    r["sup"] = tr.sup_norm();
    if (c.contains("params")) {
        const auto params = parse_params(c["params"]);
        if (params.dim() != u.grid().dim()) throw ValidationError("trace: params dimension differs from the grid");
        const auto part = build_partition(params.aniso, u.grid());
        const bool is_time = t && *t == axis;
        const auto check = validate_trace_conditions(params, is_time ? TraceCondition::R0 : TraceCondition::Gamma);
        const double pk = params.p[axis];
        std::vector<double> p = params.p;
        p.erase(p.begin() + static_cast<long>(axis));
        const SpaceParams tp(params.s - params.aniso[axis] / pk, params.aniso.without_axis(axis), p, pk, ScaleKind::B);
        const auto tpart = build_partition(tp.aniso, tr.grid());
        r["J"] = part.J;
        r["condition"] = {{"ok", check.ok}, {"threshold", check.threshold}};
        r["input_norm"] = space_norm(u, params, part);
        r["trace_params"] = params_json(tp);
        r["trace_J"] = tpart.J;
        r["trace_norm"] = b_norm(tr, tp, tpart);
    }
    maybe_write_agf(ctx, "output_agf", tr);
    emit(ctx, r);
    return 0;
}

json lifted_json(const Lifted& l) {
    json j;
    j["levels_used"] = l.levels_used;
    j["notices"] = l.notices;
    return j;
}

int cmd_rightinv(const Context& ctx) {
    const json& c = ctx.config;
    allow_keys(c, {"input", "mode", "time_grid", "aniso", "a", "axis", "ramp", "output", "output_agf"}, "rightinv");
    const auto v = load_agf(ctx, need(c, "input", "rightinv"), "input");
    const auto mode = c.contains("mode") ? as_string(c["mode"], "mode") : std::string("flat");
    const auto& tg = need(c, "time_grid", "rightinv");
    allow_keys(tg, {"N", "L"}, "time_grid");
    const Grid line({static_cast<std::size_t>(as_int(need(tg, "N", "time_grid"), "time_grid.N"))},
                    {as_number(need(tg, "L", "time_grid"), "time_grid.L")});
    const auto prof = build_eta(line);
    const Anisotropy aniso(as_numbers(need(c, "aniso", "rightinv"), "aniso"));
    const double a = as_number(need(c, "a", "rightinv"), "a");
    const auto kind = parse_ramp(c);
    std::optional<Lifted> out;
    double identity = 0.0;
    std::size_t axis;
    if (mode == "flat") {
        axis = v.grid().dim();
        const Grid lifted = v.grid().with_axis(axis, line.samples(0), line.half_extent(0), a, true);
        out = k_flat(v, prof, build_partition(aniso, lifted, kind), a);
        identity = (time_trace_r0(out->u) - v).sup_norm();
    } else if (mode == "normal") {
        axis = c.contains("axis") ? static_cast<std::size_t>(as_int(c["axis"], "axis")) : v.grid().dim() - 1;
        const Grid lifted = v.grid().with_axis(axis, line.samples(0), line.half_extent(0), a, false);
        out = k_normal(v, prof, build_partition(aniso, lifted, kind), a, axis);
        identity = (hyperplane_trace(out->u, axis) - v).sup_norm();
    } else {
        throw ValidationError("rightinv: mode must be \"flat\" or \"normal\"");
    }
    auto r = header("rightinv", out->J, -1);
    r["mode"] = mode;
    r["axis"] = axis;
    r["identity_error"] = v.sup_norm() > 0.0 ? identity / v.sup_norm() : identity;
    r.update(lifted_json(*out));
    maybe_write_agf(ctx, "output_agf", out->u);
    emit(ctx, r);
    return 0;
}

int cmd_qcheck(const Context& ctx) {
    const json& c = ctx.config;
    allow_keys(c, {"input", "kernels", "time_grid", "a_t", "J", "delta", "output", "output_agf"}, "qcheck");
    const auto u = load_agf(ctx, need(c, "input", "qcheck"), "input");
    KernelOptions opts = c.contains("kernels") ? parse_kernels(c["kernels"]) : KernelOptions{};
    if (c.contains("kernels") && c["kernels"].contains("side") && opts.side != Side::Plus)
        throw ValidationError("qcheck: kernels must sit on the plus side");
    opts.side = Side::Plus;
    const KernelFamily fam(u.grid(), Anisotropy(u.grid().weights()), opts);
    const auto& tg = need(c, "time_grid", "qcheck");
    allow_keys(tg, {"N", "L"}, "time_grid");
    const Grid line({static_cast<std::size_t>(as_int(need(tg, "N", "time_grid"), "time_grid.N"))},
                    {as_number(need(tg, "L", "time_grid"), "time_grid.L")});
    const double a_t = c.contains("a_t") ? as_number(c["a_t"], "a_t") : 2.0;
    const int J = c.contains("J") ? as_int(c["J"], "J") : fam.max_level();
    const auto Q = q_apply(u, fam, build_eta(line), a_t, J);
    const std::size_t n = opts.normal_axis;
    const double delta = c.contains("delta") ? as_number(c["delta"], "delta") : 2.0 * u.grid().spacing(n);
    const auto sup = support_report(u, Q.u, n, delta);
    const double scale = u.sup_norm() > 0.0 ? u.sup_norm() : 1.0;
    auto r = header("qcheck", J, fam.L_max());
    r["support"] = {{"applicable", sup.applicable}, {"max_leakage", sup.max_leakage}, {"threshold", sup.threshold}, {"pass", sup.pass}};
    r["trace_residual"] = (time_trace_r0(Q.u) - u).sup_norm() / scale;
    r["calderon_residual"] = (calderon_reconstruct(u, fam, J) - u).sup_norm() / scale;
    r.update(lifted_json(Q));
    maybe_write_agf(ctx, "output_agf", Q.u);
    emit(ctx, r);
    return 0;
}

std::vector<std::size_t> block_axes(const json& j) {
    const auto& v = need(j, "axes", "diffeo block");
    if (!v.is_array() || v.empty()) throw ValidationError("diffeo block: axes must be a non-empty array");
    std::vector<std::size_t> out;
    for (const auto& e : v) {
        if (!e.is_number_integer() || e.get<long>() < 0) throw ValidationError("diffeo block: axes must be non-negative integers");
        out.push_back(e.get<std::size_t>());
    }
    return out;
}

DiffeoBlock parse_block(const json& j) {
    const auto type = as_string(need(j, "type", "diffeo block"), "diffeo.type");
    if (type == "translation") {
        allow_keys(j, {"type", "axes", "shift"}, "translation block");
        return translation_block(block_axes(j), as_numbers(need(j, "shift", "translation"), "shift"));
    }
    if (type == "affine") {
        allow_keys(j, {"type", "axes", "matrix", "shift"}, "affine block");
        return affine_block(block_axes(j), as_numbers(need(j, "matrix", "affine"), "matrix"),
                            as_numbers(need(j, "shift", "affine"), "shift"));
    }
    if (type == "rotation") {
        allow_keys(j, {"type", "axes", "angle", "radius"}, "rotation block");
        const auto ax = block_axes(j);
        if (ax.size() != 2) throw ValidationError("rotation block: two axes required");
        const double radius = j.contains("radius") ? as_number(j["radius"], "radius") : kInf;
        return rotation_block(ax[0], ax[1], as_number(need(j, "angle", "rotation"), "angle"), radius);
    }
    if (type == "shear") {
        allow_keys(j, {"type", "target", "source", "amplitude", "width"}, "shear block");
        return shear_block(static_cast<std::size_t>(as_int(need(j, "target", "shear"), "target")),
                           static_cast<std::size_t>(as_int(need(j, "source", "shear"), "source")),
                           as_number(need(j, "amplitude", "shear"), "amplitude"), as_number(need(j, "width", "shear"), "width"));
    }
    throw ValidationError("unknown diffeo block type '" + type + "'");
}

int cmd_invariance(const Context& ctx) {
    const json& c = ctx.config;
    allow_keys(c, {"input", "params", "diffeo", "inverse", "output", "output_agf"}, "invariance");
    const auto f = load_agf(ctx, need(c, "input", "invariance"), "input");
    const auto params = parse_params(need(c, "params", "invariance"));
    const auto& d = need(c, "diffeo", "invariance");
    if (!d.is_array()) throw ValidationError("diffeo: expected an array of blocks");
    std::vector<DiffeoBlock> blocks;
    for (const auto& b : d) blocks.push_back(parse_block(b));
    StructuredDiffeo sigma(f.grid().dim(), std::move(blocks));
    const bool inverse = c.contains("inverse") && c["inverse"].get<bool>();
    if (inverse) sigma = sigma.inverted();
    check_block_structure(sigma, params, f.grid());
    const auto rep = invariance_report(f, sigma, params);
    auto r = header("invariance", rep.J, -1);
    r["inverse"] = inverse;
    r["ratio"] = rep.ratio;
    r["norm_f"] = rep.norm_f;
    r["norm_composed"] = rep.norm_composed;
    if (c.contains("output_agf")) maybe_write_agf(ctx, "output_agf", compose_diffeo(f, sigma));
    emit(ctx, r);
    return 0;
}

int cmd_compat(const Context& ctx) {
    const json& c = ctx.config;
    allow_keys(c, {"g", "phi", "u0", "params", "J", "output"}, "compat");
    HeatData data{load_agf(ctx, need(c, "g", "compat"), "g"), load_agf(ctx, need(c, "phi", "compat"), "phi"),
                  load_agf(ctx, need(c, "u0", "compat"), "u0"), parse_params(need(c, "params", "compat"))};
    const int J = c.contains("J") ? as_int(c["J"], "J") : -1;
    const auto rep = compatibility_check(data, J);
    auto r = header("compat", rep.J, -1);
    r["l_max"] = rep.l_max;
    json entries = json::array();
    for (const auto& e : rep.entries)
        entries.push_back({{"l", e.l}, {"admissible", e.admissible}, {"lhs", e.lhs}, {"rhs", e.rhs},
                           {"residual_sup", e.residual_sup}, {"residual_l2", e.residual_l2}});
    r["entries"] = entries;
    emit(ctx, r);
    return 0;
}

int cmd_fixture(const std::string& dir, const std::string& params_path) {
    json pj;
    if (!params_path.empty()) {
        std::ifstream in(params_path);
        if (!in) throw ValidationError("cannot read " + params_path);
        try {
            pj = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ValidationError(params_path + ": " + e.what());
        }
    } else {
        pj = {{"s", 4.0}, {"aniso", {1.0, 1.0, 2.0}}, {"p", {2.0, 2.0, 2.0}}, {"q", 2.0}, {"kind", "F"}};
    }
    const auto params = parse_params(pj);
    const auto fx = evolved_gaussian_fixture(params);
    fs::create_directories(dir);
    write_agf(fx.data.g, fs::path(dir) / "g.agf");
    write_agf(fx.data.phi, fs::path(dir) / "phi.agf");
    write_agf(fx.data.u0, fs::path(dir) / "u0.agf");
    json cfg;
    cfg["g"] = "g.agf";
    cfg["phi"] = "phi.agf";
    cfg["u0"] = "u0.agf";
    cfg["params"] = params_json(params);
    std::ofstream(fs::path(dir) / "compat.json") << cfg.dump(2) << '\n';
    std::cout << (fs::path(dir) / "compat.json").string() << '\n';
    return 0;
}

int cmd_selftest(bool freeze, const std::string& store_path) {
    namespace ex = anisonorm::experiments;
    const fs::path path = store_path.empty() ? ex::default_bracket_path() : fs::path(store_path);
    bool all = true;
    std::printf("%-14s %-42s %-5s %s\n", "module", "example", "", "detail");
    for (const auto& r : ex::trivial_suite()) {
        all = all && r.pass;
        std::printf("%-14s %-42s %-5s %s\n", r.module.c_str(), r.name.c_str(), r.pass ? "PASS" : "FAIL", r.detail.c_str());
    }
    auto store = ex::BracketStore::load(path);
    for (const auto& key : ex::bracket_keys()) {
        const auto m = ex::measure(key, ex::Variant::Base);
        const auto frozen = store.find(key);
        std::string verdict, detail;
        char buf[160];
        if (freeze) {
            store.set(key, {m.value, m.J, m.L_max});
            verdict = "FROZE";
            std::snprintf(buf, sizeof buf, "value %.6g J %d", m.value, m.J);
        } else if (!frozen) {
            verdict = "FAIL";
            all = false;
            std::snprintf(buf, sizeof buf, "no frozen value in %s", path.string().c_str());
        } else {
            const bool ok = ex::within_bracket(m.value, frozen->value);
            all = all && ok;
            verdict = ok ? "PASS" : "FAIL";
            std::snprintf(buf, sizeof buf, "measured %.6g frozen %.6g (+-%.0f%%) J %d", m.value, frozen->value,
                          100 * ex::kBracketTolerance, m.J);
        }
        detail = buf;
        std::printf("%-14s %-42s %-5s %s\n", "brackets", key.c_str(), verdict.c_str(), detail.c_str());
    }
    if (freeze) {
        store.save(path);
        std::printf("wrote %s\n", path.string().c_str());
    }
    std::printf("%s\n", all ? "selftest: all passed" : "selftest: FAILURES");
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anisotropic function-space norms, kernels and trace operators"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Cap on worker threads (0 = all cores)");

    std::string config;
    const std::vector<std::pair<std::string, std::string>> config_cmds{
        {"norm", "F and B quasi-norms of an AGF function"},
        {"decompose", "Littlewood-Paley bands as CSV (and AGF)"},
        {"kernels", "Kernel family diagnostics"},
        {"extend", "Extension from a half-space"},
        {"trace", "Restriction to a coordinate hyperplane"},
        {"rightinv", "Right inverses of the time and normal traces"},
        {"qcheck", "Support-preserving right inverse of the time trace"},
        {"invariance", "Norm ratio under a structured diffeomorphism"},
        {"compat", "Corner compatibility of heat data"}};
    for (const auto& [name, desc] : config_cmds) app.add_subcommand(name, desc)->add_option("config", config, "JSON config")->required();

    bool freeze = false;
    std::string store;
    auto* self = app.add_subcommand("selftest", "Run the example suite and check the frozen brackets");
    self->add_flag("--freeze", freeze, "Write the measured brackets to the store");
    self->add_option("--brackets", store, "Bracket store path");

    std::string dir, params;
    auto* fixture = app.add_subcommand("fixture", "Write the evolved-Gaussian heat fixture and a compat config");
    fixture->add_option("dir", dir, "Output directory")->required();
    fixture->add_option("--params", params, "SpaceParams JSON file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        set_max_threads(threads);
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "selftest") return cmd_selftest(freeze, store);
        if (name == "fixture") return cmd_fixture(dir, params);
        const auto ctx = load_config(config);
        if (name == "norm") return cmd_norm(ctx);
        if (name == "decompose") return cmd_decompose(ctx);
        if (name == "kernels") return cmd_kernels(ctx);
        if (name == "extend") return cmd_extend(ctx);
        if (name == "trace") return cmd_trace(ctx);
        if (name == "rightinv") return cmd_rightinv(ctx);
        if (name == "qcheck") return cmd_qcheck(ctx);
        if (name == "invariance") return cmd_invariance(ctx);
        if (name == "compat") return cmd_compat(ctx);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericalGuardError& e) {
        std::cerr << "numerical guard: " << e.what() << '\n';
        return kExitGuard;
    } catch (const json::exception& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}

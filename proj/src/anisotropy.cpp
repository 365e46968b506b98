#include "anisonorm/anisotropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "anisonorm/errors.hpp"

namespace anisonorm {

Anisotropy::Anisotropy(std::vector<double> weights) : a_(std::move(weights)) {
    if (a_.empty()) throw ValidationError("anisotropy needs at least one axis");
    for (double w : a_) {
        if (!std::isfinite(w) || w < 1.0) {
            std::ostringstream msg;
            msg << "anisotropy weight " << w << " is below 1; rescale the parameters first";
            throw ValidationError(msg.str());
        }
    }
    total_ = std::accumulate(a_.begin(), a_.end(), 0.0);
}

double Anisotropy::min_weight() const { return *std::min_element(a_.begin(), a_.end()); }

bool Anisotropy::is_isotropic() const {
    return std::all_of(a_.begin(), a_.end(), [&](double w) { return w == a_.front(); });
}

Anisotropy Anisotropy::without_axis(std::size_t axis) const {
    if (axis >= a_.size()) throw ValidationError("axis out of range");
    std::vector<double> rest;
    for (std::size_t i = 0; i < a_.size(); ++i)
        if (i != axis) rest.push_back(a_[i]);
    return Anisotropy(std::move(rest));
}

std::string to_string(ScaleKind kind) { return kind == ScaleKind::F ? "F" : "B"; }

ScaleKind scale_kind_from_string(const std::string& name) {
    if (name == "F") return ScaleKind::F;
    if (name == "B") return ScaleKind::B;
    throw ValidationError("unknown scale kind '" + name + "' (expected F or B)");
}

SpaceParams::SpaceParams(double s_, Anisotropy aniso_, std::vector<double> p_, double q_, ScaleKind kind_)
    : s(s_), aniso(std::move(aniso_)), p(std::move(p_)), q(q_), kind(kind_) {
    if (!std::isfinite(s)) throw ValidationError("smoothness s must be finite");
    if (p.size() != aniso.dim()) throw ValidationError("p and anisotropy have different lengths");
    for (double pi : p) {
        if (!(pi > 0.0)) throw ValidationError("integrability exponents must be positive");
        if (kind == ScaleKind::F && std::isinf(pi))
            throw ValidationError("F-scale requires finite integrability exponents");
    }
    if (!(q > 0.0)) throw ValidationError("sum exponent q must be positive");
}

double SpaceParams::subadditivity_exponent() const {
    double d = std::min(1.0, q);
    for (double pi : p) d = std::min(d, pi);
    return d;
}

SpaceParams SpaceParams::with_s(double new_s) const {
    SpaceParams out = *this;
    out.s = new_s;
    return out;
}

SpaceParams SpaceParams::with_kind(ScaleKind new_kind) const {
    return SpaceParams(s, aniso, p, q, new_kind);
}

std::vector<double> dilate(double t, const Anisotropy& a, std::span<const double> x) {
    if (t < 0.0) throw ValidationError("dilation parameter must be non-negative");
    if (x.size() != a.dim()) throw ValidationError("point and anisotropy have different lengths");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::pow(t, a[i]) * x[i];
    return out;
}

double aniso_distance(std::span<const double> x, const Anisotropy& a, double tol) {
    if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
    if (x.size() != a.dim()) throw ValidationError("point and anisotropy have different lengths");

    double sq = 0.0;
    for (double xi : x) sq += xi * xi;
    if (sq == 0.0) return 0.0;
    if (a.is_isotropic()) return std::pow(sq, 0.5 / a[0]);

    // Bracket: at lo some term alone equals 1, at hi every term is <= 1/d^2.
    double lo = kInf, hi = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) continue;
        const double r = std::pow(std::abs(x[i]), 1.0 / a[i]);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    hi *= static_cast<double>(x.size());

    auto excess = [&](double t) {
        const double lt = std::log(t);
        double sum = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] == 0.0) continue;
            sum += std::exp(2.0 * (std::log(std::abs(x[i])) - a[i] * lt));
        }
        return sum - 1.0;
    };

    while (hi - lo > tol * lo) {
        const double mid = 0.5 * (lo + hi);
        if (excess(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

SpaceParams rescale_params(const SpaceParams& params, double lambda) {
    if (!(lambda > 0.0)) throw ValidationError("rescaling factor must be positive");
    std::vector<double> w = params.aniso.weights();
    for (double& wi : w) {
        wi *= lambda;
        if (wi < 1.0) throw ValidationError("rescaling would push an anisotropy weight below 1");
    }
    return SpaceParams(lambda * params.s, Anisotropy(std::move(w)), params.p, params.q, params.kind);
}

}  // namespace anisonorm

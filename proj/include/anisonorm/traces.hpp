#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "anisonorm/decomposition.hpp"
#include "anisonorm/grid.hpp"
#include "anisonorm/kernels.hpp"

namespace anisonorm {

/// Band-limited modulators with value 1 at the origin and spectrum inside [1, 2].
/// Both are finite sums over the lattice frequencies of `grid` that lie in [1, 2].
class TraceProfile {
public:
    const Grid& grid() const { return grid_; }
    const GridFunction& eta() const { return eta_; }
    const GridFunction& psi_mod() const { return psi_; }
    const std::vector<double>& frequencies() const { return xi_; }

    /// eta(t) and psi_mod(t) at arbitrary real t.
    cplx eta_at(double t) const { return evaluate(eta_w_, t); }
    cplx psi_at(double t) const { return evaluate(psi_w_, t); }

    /// Highest frequency carried by either modulator.
    double top_frequency() const { return xi_.back(); }

    friend TraceProfile build_eta(const Grid& grid1d);

private:
    cplx evaluate(const std::vector<double>& w, double t) const;

    Grid grid_{{4}, {1.0}};
    std::vector<double> xi_;
    std::vector<double> eta_w_, psi_w_;  ///< normalised to unit sum
    GridFunction eta_ = GridFunction::zeros(grid_);
    GridFunction psi_ = GridFunction::zeros(grid_);
};

TraceProfile build_eta(const Grid& grid1d);

/// f restricted to {x_k = 0}.
GridFunction hyperplane_trace(const GridFunction& f, std::size_t k);

/// Restriction to t = 0 along the time axis.
GridFunction time_trace_r0(const GridFunction& u);

/// Output of a right-inverse, with the modulation levels that were dropped for lack of resolution.
struct Lifted {
    GridFunction u;
    int J = 0;
    int levels_used = 0;
    std::vector<std::string> notices;
};

/// sum_j psi_mod(2^{j a_t} t) F^{-1}(Phi_j(xi', 0) F v), time appended as the last axis.
/// `part` is a partition for the lifted dimension with the time axis last.
Lifted k_flat(const GridFunction& v, const TraceProfile& profile, const DyadicPartition& part, double a_t);

/// sum_j psi_mod(2^{j a_n} x_n) F^{-1}(Phi_j(xi', 0, xi_t) F v), x_n inserted at `axis`
/// (default: just before the last axis of v).
Lifted k_normal(const GridFunction& v, const TraceProfile& profile, const DyadicPartition& part, double a_n,
                std::optional<std::size_t> axis = std::nullopt);

/// Qu(x, t) = sum_{j<=J} eta(2^{j a_t} t) (psi_j * phi_j * u)(x) with kernels in {x_n >= 0}.
Lifted q_apply(const GridFunction& u, const KernelFamily& fam, const TraceProfile& profile, double a_t, int J);

struct QPropReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;  ///< lhs / rhs, 0 when both vanish
    bool pass = true;    ///< lhs <= bound * rhs when a bound is given
};

/// Both sides of || {v_j (x) 2^{ja/r} f(2^{ja} t)} | L_p(l_q) || <= c (sum_j ||v_j | L_p'||^r)^{1/r},
/// where p = (p', r) and t runs over `time_grid`. `decay` is an N with t^N f(t) bounded and N r > 1.
QPropReport q_prop_bound_check(const std::vector<GridFunction>& v_seq, const Grid& time_grid,
                               const std::function<double(double)>& f1d, double decay, double r, double a,
                               const std::vector<double>& p, double q, std::optional<double> bound = std::nullopt);

struct SupportReport {
    double max_leakage = 0.0;  ///< relative to ||u||_inf
    double threshold = 1e-10;
    bool applicable = true;    ///< false when u itself is not supported in {x_axis >= 0}
    bool pass = true;
};

/// Leakage of Qu beyond distance delta into {x_axis < 0}, over every time slice.
SupportReport support_report(const GridFunction& u, const GridFunction& Qu, std::size_t axis, double delta);

}  // namespace anisonorm

#pragma once

#include <cstddef>
#include <vector>

#include "anisonorm/anisotropy.hpp"
#include "anisonorm/grid.hpp"
#include "anisonorm/kernels.hpp"

namespace anisonorm {

/// Samples known on the closed side {x_axis >= offset} (Plus) or {x_axis <= offset} (Minus).
/// Samples on the open excluded side are never read.
struct HalfspaceFunction {
    GridFunction u;
    std::size_t axis = 0;
    Side side = Side::Plus;
    double offset = 0.0;

    /// u with the excluded side zeroed.
    GridFunction zero_extension() const;
    /// sup of |g| over the known side.
    double sup_on_side(const GridFunction& g) const;
};

/// sum_{j<=J} psi_j * e(phi_j * f), e = zero extension from the known side.
/// The family must be supported in the half-space opposite to f's side, normal to the same axis.
GridFunction rychkov_extend(const HalfspaceFunction& f, const KernelFamily& fam, int J);

/// u(x', C - x_n), a lattice reflection across x_n = C/2 on the periodic box.
GridFunction reflect_normal(const GridFunction& u, std::size_t axis, double C);

/// Extension from {x_n <= C}: rychkov_extend conjugated by x_n -> C - x_n.
/// Takes the same family as extension from {x_n >= 0} (kernels in {x_n <= 0}).
GridFunction rychkov_extend_below(const HalfspaceFunction& f, double C, const KernelFamily& fam, int J);

/// sup over the known side of |extension - f|, relative to ||f||_inf on that side.
double restriction_error(const HalfspaceFunction& f, const GridFunction& extended);

struct ExtensionBoundReport {
    double constant = 0.0;             ///< max ratio over the non-degenerate members
    std::vector<double> ratios;        ///< per member; NaN when skipped
    std::size_t skipped = 0;           ///< members with zero proxy norm
    std::vector<double> residuals;     ///< restriction error per member
    int J = 0;
    int L_max = 0;
};

/// f_norm of the extension over f_norm of the zero extension, for each member.
ExtensionBoundReport extension_bound_report(const std::vector<HalfspaceFunction>& family,
                                            const SpaceParams& params, const KernelFamily& fam, int J);

}  // namespace anisonorm

#pragma once

#include <span>
#include <string>
#include <vector>

#include "anisonorm/anisotropy.hpp"
#include "anisonorm/grid.hpp"

namespace anisonorm {

/// Profile of the radial cut-off: 1 on [0, 1], 0 on [3/2, inf).
enum class RampKind { Smoothstep, Cosine };

std::string to_string(RampKind kind);
RampKind ramp_kind_from_string(const std::string& name);

/// chi(r) for the chosen profile.
double ramp(RampKind kind, double r);

/// Value of window j at the frequency whose anisotropic distance is `radius`.
double window_at(RampKind kind, int j, double radius);

/// Windows Phi_0..Phi_J on the lattice of one grid, stored in FFT bin order.
struct DyadicPartition {
    Anisotropy aniso;
    int J = 0;
    RampKind kind = RampKind::Smoothstep;
    Grid grid;
    std::vector<double> radius;                ///< |xi|_a at every lattice point
    std::vector<std::vector<double>> windows;  ///< windows[j][bin]

    /// Largest |xi|_a on the lattice.
    double max_radius() const;
};

/// Smallest J whose band 2^J covers every lattice frequency.
int default_level(const Anisotropy& aniso, const Grid& grid);

/// Anisotropic distance of every lattice frequency, FFT bin order.
std::vector<double> lattice_radius(const Anisotropy& aniso, const Grid& grid);

DyadicPartition build_partition(const Anisotropy& aniso, int J, const Grid& grid,
                                RampKind kind = RampKind::Smoothstep);
DyadicPartition build_partition(const Anisotropy& aniso, const Grid& grid, RampKind kind = RampKind::Smoothstep);

struct BandDecomposition {
    Grid grid;
    std::vector<GridFunction> bands;

    GridFunction sum() const;
};

BandDecomposition lp_bands(const GridFunction& u, const DyadicPartition& part);

double f_norm(const GridFunction& u, const SpaceParams& params, const DyadicPartition& part);
double b_norm(const GridFunction& u, const SpaceParams& params, const DyadicPartition& part);
/// f_norm or b_norm according to params.kind.
double space_norm(const GridFunction& u, const SpaceParams& params, const DyadicPartition& part);

/// sup_y |u(y)| / prod_l (1 + 2^{j a_l} |x_l - y_l|)^{r_l} with periodic distances.
GridFunction peetre_maximal(const GridFunction& uj, const Anisotropy& aniso, std::span<const double> r, int j);

struct MultiplierReport {
    double ratio = 0.0;        ///< ||m v|| / ||v||
    double bound_proxy = 0.0;  ///< max over |alpha| <= order of sup |D^alpha m|
    int derivative_order = 0;
};

MultiplierReport pointwise_multiply_report(const GridFunction& m, const GridFunction& v, const SpaceParams& params,
                                           const DyadicPartition& part);

enum class TraceCondition { R0, Gamma, CornerCurved, CornerFlat };

TraceCondition trace_condition_from_string(const std::string& name);

struct ConditionCheck {
    bool ok = false;
    double threshold = 0.0;
};

/// Cylinder parameters: a = (a0, ..., a0, a_t), p = (p0, ..., p0, p_t) with the time axis last.
struct CylinderParams {
    std::size_t n = 0;  ///< number of spatial axes
    double a0 = 1.0, at = 2.0, p0 = 2.0, pt = 2.0, q = 2.0, s = 0.0;
};

CylinderParams cylinder_form(const SpaceParams& params);

/// Lower bound on s for the requested trace and whether params.s exceeds it.
ConditionCheck validate_trace_conditions(const SpaceParams& params, TraceCondition which);

}  // namespace anisonorm

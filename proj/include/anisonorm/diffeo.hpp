#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "anisonorm/anisotropy.hpp"
#include "anisonorm/decomposition.hpp"
#include "anisonorm/grid.hpp"

namespace anisonorm {

/// Closed-form bijection acting on a subset of the axes (coordinates passed in `axes` order).
struct DiffeoBlock {
    std::string kind;
    std::vector<std::size_t> axes;
    std::function<void(std::span<const double>, std::span<double>)> forward;
    std::function<void(std::span<const double>, std::span<double>)> inverse;
    std::function<double(std::span<const double>)> jacobian;  ///< det of the forward differential
};

/// Product of blocks acting on disjoint axis sets; axes not covered are left fixed.
class StructuredDiffeo {
public:
    explicit StructuredDiffeo(std::size_t dim, std::vector<DiffeoBlock> blocks = {});

    std::size_t dim() const { return dim_; }
    const std::vector<DiffeoBlock>& blocks() const { return blocks_; }

    std::vector<double> forward(std::span<const double> x) const;
    std::vector<double> inverse(std::span<const double> y) const;
    double jacobian(std::span<const double> x) const;
    /// The inverse map as a diffeomorphism of its own.
    StructuredDiffeo inverted() const;
    bool is_identity() const { return blocks_.empty(); }
    /// True when no block touches the axis.
    bool fixes_axis(std::size_t axis) const;
    /// max |inverse(forward(x)) - x| over the grid samples.
    double roundtrip_error(const Grid& grid) const;

private:
    std::size_t dim_;
    std::vector<DiffeoBlock> blocks_;
};

DiffeoBlock translation_block(std::vector<std::size_t> axes, std::vector<double> shift);
/// y = A x + b on the listed axes; A row-major and invertible.
DiffeoBlock affine_block(std::vector<std::size_t> axes, std::vector<double> matrix, std::vector<double> shift);
/// Rotation of the (i, j) plane by angle * beta(|x_ij| / radius), beta = 1 on [0, 1/2] and 0 beyond 1.
/// The rigid core |x_ij| <= radius / 2 turns by `angle`; an infinite radius gives the rigid rotation.
DiffeoBlock rotation_block(std::size_t i, std::size_t j, double angle, double radius);
/// x_target -> x_target + amplitude * exp(-(x_source / width)^2).
DiffeoBlock shear_block(std::size_t target, std::size_t source, double amplitude, double width);

/// f o sigma sampled by band-limited interpolation of f.
GridFunction compose_diffeo(const GridFunction& f, const StructuredDiffeo& sigma);

struct InvarianceReport {
    double ratio = 1.0;
    double norm_f = 0.0;
    double norm_composed = 0.0;
    int J = 0;
};

/// Throws unless every block acts on axes sharing one p_i and one a_i, and leaves the time axis fixed.
void check_block_structure(const StructuredDiffeo& sigma, const SpaceParams& params, const Grid& grid);

/// f_norm(f o sigma) / f_norm(f).
InvarianceReport invariance_report(const GridFunction& f, const StructuredDiffeo& sigma, const SpaceParams& params);

}  // namespace anisonorm

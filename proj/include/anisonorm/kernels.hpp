#pragma once

#include <optional>
#include <string>
#include <vector>

#include "anisonorm/anisotropy.hpp"
#include "anisonorm/grid.hpp"

namespace anisonorm {

/// Real samples on consecutive lattice points of one axis, starting at lattice offset `first`
/// (offset 0 is the sample at x = 0). Convolution of stencils is exact and never wraps.
struct Stencil {
    long first = 0;
    std::vector<double> values;
    double spacing = 1.0;

    long last() const { return first + static_cast<long>(values.size()) - 1; }
    double mass() const;
    /// h * sum x^k v(x)
    double moment(int k) const;
    double abs_mass() const;
};

Stencil convolve(const Stencil& a, const Stencil& b);
Stencil operator+(const Stencil& a, const Stencil& b);
Stencil scaled(const Stencil& a, double factor);

/// Where the generator's support lies relative to the origin.
enum class GeneratorShape { Minus, Plus, Centered };

/// A smooth bump of the given width sampled on an axis with spacing h and normalized to discrete mass 1.
Stencil sampled_bump(double width, double spacing, GeneratorShape shape);

/// g = sum_k c_k b^{*k} over convolution powers of one bump b, with c solving
/// "unit mass and vanishing moments 1..L_max" (odd moments vanish by symmetry for centered shapes).
struct MomentGenerator {
    Stencil g;
    int L_max = 0;
    GeneratorShape shape = GeneratorShape::Minus;
    double support = 0.0;  ///< length of the support interval of g
    double width = 0.0;    ///< width of the bump b
    int powers = 0;        ///< number of convolution powers in the combination
    std::vector<double> coefficients;
    double condition = 0.0;            ///< condition number of the column-scaled moment system
    std::vector<double> moments;       ///< h sum t^k g, k = 0..L_max+1
    double relative_next_moment = 0.0; ///< |moment L_max+1| / int |g|
};

/// Number of convolution powers needed for L_max vanishing moments.
int generator_powers(int L_max, GeneratorShape shape);

/// Coefficients of the convolution powers, from the moment system of a bump of width `width`.
/// Fills coefficients and condition; throws NumericalGuardError when the system is ill-conditioned.
MomentGenerator build_generator(int L_max, double spacing, GeneratorShape shape = GeneratorShape::Minus,
                                double support = 1.0);
MomentGenerator build_generator(int L_max, const Grid& grid1d, GeneratorShape shape = GeneratorShape::Minus,
                                double support = 1.0);

struct KernelOptions {
    int L_max = 4;
    double support = 1.0;  ///< support length of the level-0 generator on each axis
    std::size_t normal_axis = 0;
    Side side = Side::Minus;  ///< closed half-space {x_normal <= 0} or {x_normal >= 0} holding all kernels
};

/// Calderon quadruple (phi_0, phi, psi_0, psi) with its level-j dilates on one grid.
/// Level j uses generators whose widths are scaled by 2^{-j a_i}; A_j denotes the level-j dilate of phi_0.
class KernelFamily {
public:
    KernelFamily(const Grid& grid, const Anisotropy& aniso, const KernelOptions& options);

    const Grid& grid() const { return grid_; }
    const Anisotropy& aniso() const { return aniso_; }
    int L_max() const { return options_.L_max; }
    Side support_side() const { return options_.side; }
    std::size_t normal_axis() const { return options_.normal_axis; }
    const KernelOptions& options() const { return options_; }
    const MomentGenerator& normal_generator() const { return normal_gen_; }
    const MomentGenerator& tangential_generator() const { return tangential_gen_; }

    /// Finest level whose bumps still span at least four samples on every axis.
    int max_level() const { return max_level_; }
    /// Throws NumericalGuardError unless 0 <= J <= max_level().
    void require_level(int J) const;

    /// A_j on each axis (j >= -1).
    const Stencil& axis_kernel(int j, std::size_t axis) const;
    /// Lattice symbol of A_j on one axis, FFT bin order.
    const std::vector<cplx>& axis_symbol(int j, std::size_t axis) const;

    /// Symbols on the full lattice, FFT bin order.
    std::vector<cplx> level_symbol(int j) const;  ///< hat A_j
    std::vector<cplx> phi_symbol(int j) const;    ///< hat phi_j
    std::vector<cplx> psi_symbol(int j) const;    ///< hat psi_j
    /// sum_{j<=J} hat psi_j hat phi_j, accumulated term by term.
    std::vector<cplx> calderon_symbol(int J) const;

    /// Physical kernels, built by exact stencil algebra.
    GridFunction phi(int j) const;
    GridFunction psi(int j) const;
    GridFunction phi0() const { return phi(0); }
    GridFunction psi0() const { return psi(0); }
    /// The undilated pair phi = phi_0 - 2^{-|a|} phi_0(2^{-a} .) and psi (level 1 scaled back to level 0).
    GridFunction phi_mother() const;
    GridFunction psi_mother() const;

    /// Largest |sample| of the kernel strictly outside the declared half-space.
    double outside_mass(const GridFunction& kernel) const;

private:
    struct Level {
        std::vector<Stencil> kernels;
        std::vector<std::vector<cplx>> symbols;
    };

    Level make_level(int j) const;
    const Level& level(int j) const;
    std::vector<cplx> tensor_symbol(const std::vector<const std::vector<cplx>*>& factors) const;
    GridFunction place(const std::vector<std::vector<Stencil>>& terms, const std::vector<double>& weights) const;
    std::vector<std::vector<Stencil>> psi_terms(int j, int coarse) const;

    Grid grid_;
    Anisotropy aniso_;
    KernelOptions options_;
    MomentGenerator normal_gen_;
    MomentGenerator tangential_gen_;
    int max_level_ = -1;
    std::vector<Level> levels_;  ///< levels_[j + 1] for j = -1..max_level
};

/// max over the lattice of |sum_{j<N} hat psi_j hat phi_j - (2 hat A_{N-1}^2 - hat A_{N-1}^4)|.
double verify_telescoping(const KernelFamily& fam, int N);

/// sum_{j<=J} psi_j * phi_j * u.
GridFunction calderon_reconstruct(const GridFunction& u, const KernelFamily& fam, int J);

/// ||u - calderon_reconstruct(u, J)||_inf / ||u||_inf for J = 0..J_max.
std::vector<double> reconstruction_residuals(const GridFunction& u, const KernelFamily& fam, int J_max);

/// Local means: k = Laplacian^N k0.
struct LocalMeans {
    GridFunction k0;
    GridFunction k;
    int order = 1;
};

LocalMeans local_means_kernels(const GridFunction& k0, int order);

/// ||k0 * f|| + ||(2^{sj} k_j * f)_{j=1..J}|| in the F or B arrangement, with k_j(x) = 2^{j|a|} k(2^{ja} x).
/// J < 0 selects the partition default for the grid.
double localized_norm(const GridFunction& f, const LocalMeans& kernels, const SpaceParams& params, int J = -1);

}  // namespace anisonorm

#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace anisonorm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Weight vector of a quasi-homogeneous dilation t^a x = (t^{a_1}x_1, ..., t^{a_d}x_d).
/// Every weight is >= 1; weights below 1 must be brought into range with rescale_params.
class Anisotropy {
public:
    explicit Anisotropy(std::vector<double> weights);

    /// All weights equal to one (the isotropic case).
    static Anisotropy isotropic(std::size_t dim) { return Anisotropy(std::vector<double>(dim, 1.0)); }

    std::size_t dim() const { return a_.size(); }
    double operator[](std::size_t i) const { return a_[i]; }
    const std::vector<double>& weights() const { return a_; }
    /// |a| = a_1 + ... + a_d.
    double total() const { return total_; }
    double min_weight() const;
    bool is_isotropic() const;

    /// Drops one axis; used when passing from a cylinder to one of its faces.
    Anisotropy without_axis(std::size_t axis) const;

    friend bool operator==(const Anisotropy& x, const Anisotropy& y) { return x.a_ == y.a_; }

private:
    std::vector<double> a_;
    double total_ = 0.0;
};

enum class ScaleKind { F, B };

std::string to_string(ScaleKind kind);
ScaleKind scale_kind_from_string(const std::string& name);

/// Smoothness/integrability signature (s, a, p, q, F|B) of a Lizorkin-Triebel or Besov space.
struct SpaceParams {
    double s = 0.0;
    Anisotropy aniso;
    std::vector<double> p;
    double q = 2.0;
    ScaleKind kind = ScaleKind::F;

    SpaceParams(double s, Anisotropy aniso, std::vector<double> p, double q, ScaleKind kind);

    std::size_t dim() const { return p.size(); }
    /// min(1, p_1, ..., p_d, q): the power in which the quasi-norm is subadditive.
    double subadditivity_exponent() const;
    SpaceParams with_s(double new_s) const;
    SpaceParams with_kind(ScaleKind new_kind) const;
};

/// t^a x. Requires t >= 0.
std::vector<double> dilate(double t, const Anisotropy& a, std::span<const double> x);

/// The unique t > 0 with sum_i x_i^2 / t^{2 a_i} = 1, to relative accuracy tol; 0 for x = 0.
double aniso_distance(std::span<const double> x, const Anisotropy& a, double tol = 1e-12);

/// (s, a) -> (lambda s, lambda a); p, q and kind are kept. Rejects lambda with lambda*a_i < 1.
SpaceParams rescale_params(const SpaceParams& params, double lambda);

}  // namespace anisonorm

#pragma once

#include "mfglab/grid.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mfglab {

/// Profile of the interaction kernel, evaluated at full coordinates x and y.
/// For the separable-delta form the caller passes y with y1 = x1.
using KernelProfile = std::function<double(std::span<const double> x, std::span<const double> y)>;

struct Profile {
    std::string id;  // "constant", "cosine-product", "bump" or "custom"
    double scale = 1.0;
    KernelProfile fn;

    static Profile constant(double scale = 1.0);
    /// scale * prod_i cos(pi (x_i - y_i) / 4)
    static Profile cosine_product(double scale = 1.0);
    /// scale * exp(-|x - y|^2)
    static Profile bump(double scale = 1.0);
    static Profile custom(KernelProfile fn, double scale = 1.0);
    static Profile by_name(const std::string& id, double scale = 1.0);
};

enum class KernelVariant { GaussianProduct, SeparableDelta, HeavisideCausal };

std::string to_string(KernelVariant v);
KernelVariant kernel_variant_from_string(const std::string& s);

class Kernel {
public:
    static Kernel gaussian_product(std::vector<double> sigma);
    static Kernel separable_delta(Profile profile);
    static Kernel heaviside_causal(Profile profile);
    /// The zero kernel (separable-delta with a zero constant profile).
    static Kernel none() { return separable_delta(Profile::constant(0.0)); }

    KernelVariant variant() const { return variant_; }
    const std::vector<double>& sigma() const { return sigma_; }
    const Profile& profile() const { return profile_; }
    bool is_constant_profile() const { return variant_ != KernelVariant::GaussianProduct && profile_.id == "constant"; }

    /// Largest sampled |Y-bar| over the relevant product of grid nodes.
    double sampled_bound(const Grid& grid) const;

private:
    KernelVariant variant_ = KernelVariant::SeparableDelta;
    std::vector<double> sigma_;
    Profile profile_;
};

nlohmann::json to_json(const Kernel& k);
/// {"variant": "none"} is accepted for the zero kernel.
Kernel kernel_from_json(const nlohmann::json& j);

/// A kernel bound to a grid, with quadrature tables built once. Immutable and
/// safe for concurrent use.
class KernelOperator {
public:
    KernelOperator(Kernel kernel, GridPtr grid);

    const Kernel& kernel() const { return kernel_; }
    const Grid& grid() const { return *grid_; }
    /// Bound N1 sampled at construction.
    double bound() const { return bound_; }

    /// int Y(x, y) m(y) dy for one spatial slice.
    std::vector<double> apply(std::span<const double> m) const;
    /// The majorant G: same structure applied to |q| with unit profile.
    std::vector<double> apply_majorant(std::span<const double> q) const;

    SpaceField apply(const SpaceField& m) const;
    Field apply(const Field& m) const;
    Field apply_majorant(const Field& q) const;

private:
    std::vector<double> unit_structure(std::span<const double> q) const;

    Kernel kernel_;
    GridPtr grid_;
    double bound_ = 0.0;
    std::vector<std::vector<double>> gauss_axis_;  // per-axis weighted Gaussian matrices
    std::vector<double> table_;                    // dense profile*weight table, when small enough
    std::vector<double> transverse_w_;             // trapezoid weights of Omega_1 per spatial node
};

/// Kernel term at one time level.
SpaceField apply_kernel(const Kernel& kernel, const Field& m, std::size_t level);
SpaceField apply_kernel(const Kernel& kernel, const SpaceField& m);
/// Majorant G(q); rejects the Gaussian form.
Field apply_G(const Kernel& kernel, const Field& q);

struct WeightedBound {
    double lhs = 0.0;    // int G(q)^2 phi
    double ratio = 0.0;  // lhs / int q^2 phi, 0 when q == 0
};

WeightedBound weighted_G_bound(const Kernel& kernel, const Field& q, const Field& phi);

}  // namespace mfglab

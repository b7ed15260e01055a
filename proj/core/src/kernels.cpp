#include "mfglab/kernels.hpp"

#include "mfglab/error.hpp"
#include "mfglab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mfglab {

namespace {

constexpr std::size_t kMaxDenseTable = std::size_t{1} << 22;

std::vector<double> node_coords(const Grid& g) {
    std::vector<double> xs(g.space_size() * g.dim());
    for (std::size_t s = 0; s < g.space_size(); ++s) g.coords(s, std::span<double>(xs).subspan(s * g.dim(), g.dim()));
    return xs;
}

// Trapezoid weights of the transverse cross-section, indexed by s / nx1.
std::vector<double> transverse_weights(const Grid& g) {
    const std::size_t n1 = g.nx(0);
    std::vector<double> w(g.space_size() / n1, 1.0);
    for (std::size_t k = 1; k < g.dim(); ++k) {
        const auto wk = trapezoid_weights(g.nx(k), g.h(k));
        for (std::size_t j = 0; j < w.size(); ++j) w[j] *= wk[g.axis_index(j * n1, k)];
    }
    return w;
}

// Weight of node i in the trapezoid rule over [x_from, b] (zero below from).
double tail_weight(std::size_t from, std::size_t i, std::size_t n, double h) {
    if (i < from || from + 1 == n) return 0.0;
    return (i == from || i + 1 == n) ? 0.5 * h : h;
}

}  // namespace

Profile Profile::constant(double scale) {
    return {"constant", scale, [scale](std::span<const double>, std::span<const double>) { return scale; }};
}

Profile Profile::cosine_product(double scale) {
    return {"cosine-product", scale, [scale](std::span<const double> x, std::span<const double> y) {
                double p = scale;
                for (std::size_t i = 0; i < x.size(); ++i) p *= std::cos(std::numbers::pi * (x[i] - y[i]) / 4.0);
                return p;
            }};
}

Profile Profile::bump(double scale) {
    return {"bump", scale, [scale](std::span<const double> x, std::span<const double> y) {
                double r2 = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - y[i]) * (x[i] - y[i]);
                return scale * std::exp(-r2);
            }};
}

Profile Profile::custom(KernelProfile fn, double scale) {
    require(static_cast<bool>(fn), "custom kernel profile must be callable");
    return {"custom", scale, [fn = std::move(fn), scale](std::span<const double> x, std::span<const double> y) {
                return scale * fn(x, y);
            }};
}

Profile Profile::by_name(const std::string& id, double scale) {
    if (id == "constant") return constant(scale);
    if (id == "cosine-product") return cosine_product(scale);
    if (id == "bump") return bump(scale);
    fail(ErrorKind::InvalidArgument, "unknown kernel profile '" + id + "' (constant, cosine-product, bump)");
}

std::string to_string(KernelVariant v) {
    switch (v) {
    case KernelVariant::GaussianProduct: return "gaussian-product";
    case KernelVariant::SeparableDelta: return "separable-delta";
    case KernelVariant::HeavisideCausal: return "heaviside-causal";
    }
    return "?";
}

KernelVariant kernel_variant_from_string(const std::string& s) {
    if (s == "gaussian-product") return KernelVariant::GaussianProduct;
    if (s == "separable-delta") return KernelVariant::SeparableDelta;
    if (s == "heaviside-causal") return KernelVariant::HeavisideCausal;
    fail(ErrorKind::InvalidArgument,
         "unknown kernel variant '" + s + "' (gaussian-product, separable-delta, heaviside-causal)");
}

Kernel Kernel::gaussian_product(std::vector<double> sigma) {
    require(!sigma.empty(), "gaussian kernel: one sigma per axis required");
    for (double s : sigma) require(s > 0.0, "gaussian kernel: every sigma must be positive");
    Kernel k;
    k.variant_ = KernelVariant::GaussianProduct;
    k.sigma_ = std::move(sigma);
    return k;
}

Kernel Kernel::separable_delta(Profile profile) {
    Kernel k;
    k.variant_ = KernelVariant::SeparableDelta;
    k.profile_ = std::move(profile);
    return k;
}

Kernel Kernel::heaviside_causal(Profile profile) {
    Kernel k;
    k.variant_ = KernelVariant::HeavisideCausal;
    k.profile_ = std::move(profile);
    return k;
}

double Kernel::sampled_bound(const Grid& g) const {
    if (variant_ == KernelVariant::GaussianProduct) return 1.0;
    if (profile_.id == "constant") return std::abs(profile_.scale);
    const auto xs = node_coords(g);
    const std::size_t n = g.dim();
    const std::size_t n1 = g.nx(0);
    std::vector<double> y(n);
    double m = 0.0;
    for (std::size_t s = 0; s < g.space_size(); ++s) {
        std::span<const double> x(xs.data() + s * n, n);
        for (std::size_t r = 0; r < g.space_size(); ++r) {
            if (variant_ == KernelVariant::SeparableDelta && r % n1 != s % n1) continue;
            m = std::max(m, std::abs(profile_.fn(x, std::span<const double>(xs.data() + r * n, n))));
        }
    }
    return m;
}

nlohmann::json to_json(const Kernel& k) {
    nlohmann::json j{{"variant", to_string(k.variant())}};
    if (k.variant() == KernelVariant::GaussianProduct) {
        j["sigma"] = k.sigma();
    } else {
        j["ybar"] = k.profile().id;
        j["scale"] = k.profile().scale;
    }
    return j;
}

Kernel kernel_from_json(const nlohmann::json& j) {
    const auto name = j.at("variant").get<std::string>();
    if (name == "none") return Kernel::none();
    const auto variant = kernel_variant_from_string(name);
    if (variant == KernelVariant::GaussianProduct) return Kernel::gaussian_product(j.at("sigma").get<std::vector<double>>());
    auto profile = Profile::by_name(j.value("ybar", std::string("constant")), j.value("scale", 1.0));
    return variant == KernelVariant::SeparableDelta ? Kernel::separable_delta(std::move(profile))
                                                    : Kernel::heaviside_causal(std::move(profile));
}

// ---------------------------------------------------------------------------

KernelOperator::KernelOperator(Kernel kernel, GridPtr grid) : kernel_(std::move(kernel)), grid_(std::move(grid)) {
    const Grid& g = *grid_;
    const std::size_t S = g.space_size();
    const std::size_t n = g.dim();
    const std::size_t n1 = g.nx(0);
    transverse_w_ = transverse_weights(g);
    bound_ = kernel_.sampled_bound(g);

    if (kernel_.variant() == KernelVariant::GaussianProduct) {
        require(kernel_.sigma().size() == n, "gaussian kernel: sigma count must equal the dimension");
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t nk = g.nx(k);
            const auto w = trapezoid_weights(nk, g.h(k));
            const double s2 = 2.0 * kernel_.sigma()[k] * kernel_.sigma()[k];
            std::vector<double> mat(nk * nk);
            for (std::size_t i = 0; i < nk; ++i)
                for (std::size_t j = 0; j < nk; ++j) {
                    const double d = g.x(k, i) - g.x(k, j);
                    mat[i * nk + j] = w[j] * std::exp(-d * d / s2);
                }
            gauss_axis_.push_back(std::move(mat));
        }
        return;
    }
    if (kernel_.is_constant_profile()) return;

    const auto xs = node_coords(g);
    const double h1 = g.h(0);
    if (kernel_.variant() == KernelVariant::SeparableDelta) {
        const std::size_t nt = S / n1;
        table_.resize(S * nt);
        std::vector<double> y(n);
        for (std::size_t s = 0; s < S; ++s) {
            std::span<const double> x(xs.data() + s * n, n);
            for (std::size_t j = 0; j < nt; ++j) {
                const std::size_t r = s % n1 + j * n1;
                table_[s * nt + j] = transverse_w_[j] * kernel_.profile().fn(x, std::span<const double>(xs.data() + r * n, n));
            }
        }
    } else if (S * S <= kMaxDenseTable) {
        table_.resize(S * S);
        for (std::size_t s = 0; s < S; ++s) {
            std::span<const double> x(xs.data() + s * n, n);
            for (std::size_t r = 0; r < S; ++r) {
                const double w = tail_weight(s % n1, r % n1, n1, h1) * transverse_w_[r / n1];
                table_[s * S + r] = w == 0.0 ? 0.0 : w * kernel_.profile().fn(x, std::span<const double>(xs.data() + r * n, n));
            }
        }
    }
}

std::vector<double> KernelOperator::unit_structure(std::span<const double> q) const {
    const Grid& g = *grid_;
    const std::size_t S = g.space_size();
    const std::size_t n1 = g.nx(0);
    const std::size_t nt = S / n1;
    std::vector<double> out(S, 0.0);
    if (kernel_.variant() == KernelVariant::SeparableDelta) {
        for (std::size_t i = 0; i < n1; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < nt; ++j) acc += transverse_w_[j] * q[i + j * n1];
            for (std::size_t j = 0; j < nt; ++j) out[i + j * n1] = acc;
        }
        return out;
    }
    // Cumulative trapezoid from b down to x1 on each x1-line, then the transverse integral.
    const double h = g.h(0);
    std::vector<double> tail(n1);
    std::vector<double> line_total(n1, 0.0);
    for (std::size_t j = 0; j < nt; ++j) {
        tail[n1 - 1] = 0.0;
        for (std::size_t i = n1 - 1; i-- > 0;) tail[i] = tail[i + 1] + 0.5 * h * (q[i + j * n1] + q[i + 1 + j * n1]);
        for (std::size_t i = 0; i < n1; ++i) line_total[i] += transverse_w_[j] * tail[i];
    }
    for (std::size_t s = 0; s < S; ++s) out[s] = line_total[s % n1];
    return out;
}

std::vector<double> KernelOperator::apply(std::span<const double> m) const {
    const Grid& g = *grid_;
    const std::size_t S = g.space_size();
    require(m.size() == S, "kernel apply: slice size does not match grid");
    if (kernel_.variant() == KernelVariant::GaussianProduct) {
        std::vector<double> cur(m.begin(), m.end());
        for (std::size_t k = 0; k < g.dim(); ++k) {
            const std::size_t nk = g.nx(k);
            const std::size_t stride = g.stride(k);
            const auto& mat = gauss_axis_[k];
            std::vector<double> next(S, 0.0);
            for (std::size_t s = 0; s < S; ++s) {
                const std::size_t i = g.axis_index(s, k);
                const std::size_t base = s - i * stride;
                double acc = 0.0;
                for (std::size_t j = 0; j < nk; ++j) acc += mat[i * nk + j] * cur[base + j * stride];
                next[s] = acc;
            }
            cur = std::move(next);
        }
        return cur;
    }
    if (kernel_.is_constant_profile()) {
        auto out = unit_structure(m);
        for (double& v : out) v *= kernel_.profile().scale;
        return out;
    }
    const std::size_t n1 = g.nx(0);
    std::vector<double> out(S, 0.0);
    if (kernel_.variant() == KernelVariant::SeparableDelta) {
        const std::size_t nt = S / n1;
        for (std::size_t s = 0; s < S; ++s) {
            double acc = 0.0;
            for (std::size_t j = 0; j < nt; ++j) acc += table_[s * nt + j] * m[s % n1 + j * n1];
            out[s] = acc;
        }
        return out;
    }
    if (!table_.empty()) {
        for (std::size_t s = 0; s < S; ++s) {
            double acc = 0.0;
            const double* row = table_.data() + s * S;
            for (std::size_t r = 0; r < S; ++r) acc += row[r] * m[r];
            out[s] = acc;
        }
        return out;
    }
    const auto xs = node_coords(g);
    const std::size_t n = g.dim();
    for (std::size_t s = 0; s < S; ++s) {
        std::span<const double> x(xs.data() + s * n, n);
        double acc = 0.0;
        for (std::size_t r = 0; r < S; ++r) {
            const double w = tail_weight(s % n1, r % n1, n1, g.h(0)) * transverse_w_[r / n1];
            if (w != 0.0) acc += w * kernel_.profile().fn(x, std::span<const double>(xs.data() + r * n, n)) * m[r];
        }
        out[s] = acc;
    }
    return out;
}

std::vector<double> KernelOperator::apply_majorant(std::span<const double> q) const {
    if (kernel_.variant() == KernelVariant::GaussianProduct)
        fail(ErrorKind::InvalidArgument, "the majorant G is defined only for separable-delta and heaviside-causal kernels");
    std::vector<double> aq(q.size());
    std::transform(q.begin(), q.end(), aq.begin(), [](double v) { return std::abs(v); });
    return unit_structure(aq);
}

SpaceField KernelOperator::apply(const SpaceField& m) const {
    require_same_grid(m.grid(), *grid_, "kernel apply");
    return SpaceField(grid_, apply(m.values()));
}

Field KernelOperator::apply(const Field& m) const {
    require_same_grid(m.grid(), *grid_, "kernel apply");
    std::vector<double> out;
    out.reserve(m.values().size());
    for (std::size_t n = 0; n < grid_->nt(); ++n) {
        const auto lv = apply(m.level(n));
        out.insert(out.end(), lv.begin(), lv.end());
    }
    return Field(grid_, std::move(out));
}

Field KernelOperator::apply_majorant(const Field& q) const {
    require_same_grid(q.grid(), *grid_, "kernel majorant");
    std::vector<double> out;
    out.reserve(q.values().size());
    for (std::size_t n = 0; n < grid_->nt(); ++n) {
        const auto lv = apply_majorant(q.level(n));
        out.insert(out.end(), lv.begin(), lv.end());
    }
    return Field(grid_, std::move(out));
}

SpaceField apply_kernel(const Kernel& kernel, const Field& m, std::size_t level) {
    require(level < m.grid().nt(), "kernel apply: level out of range");
    return KernelOperator(kernel, m.grid_ptr()).apply(m.level_field(level));
}

SpaceField apply_kernel(const Kernel& kernel, const SpaceField& m) {
    return KernelOperator(kernel, m.grid_ptr()).apply(m);
}

Field apply_G(const Kernel& kernel, const Field& q) {
    if (kernel.variant() == KernelVariant::GaussianProduct)
        fail(ErrorKind::InvalidArgument, "the majorant G is defined only for separable-delta and heaviside-causal kernels");
    return KernelOperator(kernel, q.grid_ptr()).apply_majorant(q);
}

WeightedBound weighted_G_bound(const Kernel& kernel, const Field& q, const Field& phi) {
    require(phi.min() > 0.0, "weighted G bound: weight must be positive");
    const Field G = apply_G(kernel, q);
    const double lhs = integrate(G * G * phi);
    const double den = integrate(q * q * phi);
    return {lhs, den > 0.0 ? lhs / den : 0.0};
}

}  // namespace mfglab

#include "mfglab/stability.hpp"

#include "mfglab/error.hpp"
#include "mfglab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

namespace mfglab {

DifferencePack form_difference(const MFGTriple& first, const MFGTriple& second, double epsilon) {
    const Grid& g = first.u.grid();
    require_same_grid(g, second.u.grid(), "form_difference");
    require_same_grid(g, first.m.grid(), "form_difference");
    require_same_grid(g, second.m.grid(), "form_difference");
    if (epsilon == 0.0) epsilon = 0.2 * g.T();
    const double t0 = 0.5 * g.T();

    auto u = first.u - second.u;
    auto m = first.m - second.m;
    auto v = d_dt(u);
    auto q = d_dt(m);
    auto w = d2_dt2(u);
    auto r = d2_dt2(m);
    const Region window = Region::truncated(epsilon);
    double h21 = 0.0, h2 = 0.0;
    for (const Field* f : {&v, &q, &w, &r}) {
        h21 += h21_sq(*f, window);
        h2 += h2_sq(*f);
    }
    auto u0 = snapshot(u, t0);
    auto m0 = snapshot(m, t0);
    return DifferencePack{std::move(u),  std::move(m),  first.k - second.k, std::move(v), std::move(q),
                          std::move(w),  std::move(r),  std::move(u0),      std::move(m0), epsilon,
                          h21,           h2};
}

double integral_identity_gap(const DifferencePack& pack) {
    const auto rebuilt = Field::broadcast(pack.u0) + integrate_from_mid(pack.v);
    return (pack.u - rebuilt).max_abs();
}

namespace {

/// |grad u01|^-2 after checking |grad u01|^2 >= 2c at every node.
SpaceField inverse_grad_sq(const SpaceField& u01, double c) {
    require(c > 0.0, "gradient guard: c must be positive");
    const Grid& g = u01.grid();
    const auto gsq = grad_dot(u01, u01);
    std::vector<double> out(g.space_size());
    std::vector<double> x(g.dim());
    for (std::size_t s = 0; s < g.space_size(); ++s) {
        if (gsq[s] < 2.0 * c) {
            g.coords(s, x);
            std::ostringstream os;
            os << "gradient guard violated: |grad u(., T/2)|^2 = " << gsq[s] << " < 2c = " << 2.0 * c
               << " at node " << s << " (x1 = " << x[0];
            for (std::size_t k = 1; k < x.size(); ++k) os << ", x" << k + 1 << " = " << x[k];
            os << ")";
            fail(ErrorKind::InvalidArgument, os.str());
        }
        out[s] = 1.0 / gsq[s];
    }
    return SpaceField(u01.grid_ptr(), std::move(out));
}

SpaceField source_slice(const Field& f, SourceTime source) {
    return source == SourceTime::Mid ? snapshot(f, 0.5 * f.grid().T()) : f.level_field(0);
}

}  // namespace

SpaceField compute_F(const DifferencePack& pack, const SpaceField& u01, const SpaceField& u02, const SpaceField& k2,
                     const Kernel& kernel, const Field& f, double c, SourceTime source) {
    require_same_grid(pack.u.grid(), u01.grid(), "compute_F");
    const auto inv = inverse_grad_sq(u01, c);
    const auto bracket = laplacian(pack.u0) + apply_kernel(kernel, pack.m0) + source_slice(f, source) * pack.m0;
    const auto cross = k2 * grad_dot(pack.u0, u01 + u02);
    return 2.0 * (inv * bracket) - inv * cross;
}

SpaceField reconstruct_k_tilde(const DifferencePack& pack, const SpaceField& u01, const SpaceField& F, double c,
                               ReconstructionMode mode, std::optional<double> t) {
    const Grid& g = pack.u.grid();
    const auto inv = inverse_grad_sq(u01, c);
    if (mode == ReconstructionMode::Snapshot) return 2.0 * (inv * snapshot(pack.v, 0.5 * g.T())) + F;
    const std::size_t level = g.level_of(t.value_or(0.5 * g.T()));
    const auto shifted = pack.v - integrate_from_mid(pack.w);
    return 2.0 * (inv * shifted.level_field(level)) + F;
}

double shifted_spread(const DifferencePack& pack, const SpaceField& u01, const SpaceField& F, double c,
                      std::span<const double> times) {
    std::vector<SpaceField> k;
    for (double t : times) k.push_back(reconstruct_k_tilde(pack, u01, F, c, ReconstructionMode::Shifted, t));
    double worst = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i)
        for (std::size_t j = i + 1; j < k.size(); ++j) worst = std::max(worst, norm_l2(k[i] - k[j]));
    return worst;
}

// ---------------------------------------------------------------------------
// Derived systems.

std::string to_string(DerivedEquation e) {
    switch (e) {
        case DerivedEquation::Hjb: return "hjb";
        case DerivedEquation::Fp: return "fp";
        case DerivedEquation::HjbFirst: return "hjb-first";
        case DerivedEquation::FpFirst: return "fp-first";
        case DerivedEquation::HjbSecond: return "hjb-second";
        case DerivedEquation::FpSecond: return "fp-second";
    }
    return "?";
}

std::string to_string(Inequality i) {
    switch (i) {
        case Inequality::Value: return "value";
        case Inequality::Density: return "density";
        case Inequality::ValueRate: return "value-rate";
        case Inequality::DensityRate: return "density-rate";
    }
    return "?";
}

namespace {

/// div(s grad b) by the product rule.
Field flux(const Field& s, const Field& b) { return grad_dot(s, b) + s * laplacian(b); }

Field grad_norm(const Field& f) {
    return map(grad_dot(f, f), [](double x) { return std::sqrt(x); });
}

/// Cumulative |.|-integral from T/2, in absolute value.
Field abs_integral(const Field& f) { return abs(integrate_from_mid(abs(f))); }

/// Every coefficient field the derived equations touch, computed once.
class PairTerms {
public:
    PairTerms(const DifferencePack& pack, const SolutionPair& pair)
        : pack_(pack),
          op_(pair.spec.kernel, pack.u.grid_ptr()),
          u1_(pair.first.u), u2_(pair.second.u), m1_(pair.first.m), m2_(pair.second.m),
          k2_(pair.second.k),
          u1t_(d_dt(u1_)), u2t_(d_dt(u2_)), u1tt_(d2_dt2(u1_)), u2tt_(d2_dt2(u2_)),
          m1t_(d_dt(m1_)), m2t_(d_dt(m2_)), m1tt_(d2_dt2(m1_)), m2tt_(d2_dt2(m2_)),
          f_(pair.spec.f), ft_(d_dt(f_)), ftt_(d2_dt2(f_)),
          iq_(integrate_from_mid(pack.q)), iv_(integrate_from_mid(pack.v)),
          p_(pack.v - integrate_from_mid(pack.w)),
          u0_(Field::broadcast(pack.u0)), m0_(Field::broadcast(pack.m0)),
          two_g_(Field::broadcast(2.0 * inverse_grad_sq(snapshot(u1_, 0.5 * u1_.grid().T()), pair.c))),
          F_(Field::broadcast(compute_F(pack, snapshot(u1_, 0.5 * u1_.grid().T()), snapshot(u2_, 0.5 * u2_.grid().T()),
                                        k2_, pair.spec.kernel, f_, pair.c, pair.source))),
          two_gp_(two_g_ * p_) {
        const Grid& g = pack.u.grid();
        require_same_grid(g, u1_.grid(), "derived system");
        require_same_grid(g, u2_.grid(), "derived system");
        require_same_grid(g, f_.grid(), "derived system");
    }

    /// Left side with the unknown-dependent terms; right side carries data only.
    Field lhs(DerivedEquation e) const {
        const auto& d = pack_;
        const SpaceField& k2 = k2_;
        switch (e) {
            case DerivedEquation::Hjb:
                return d.v + laplacian(d.u) + op_.apply(d.m) + f_ * d.m -
                       0.5 * (k2 * (grad_dot(d.u, u1_) + grad_dot(d.u, u2_))) -
                       0.5 * (d.k * grad_dot(u1_, u1_));
            case DerivedEquation::Fp:
                return d.q - laplacian(d.m) - flux(k2 * d.m, u1_) - flux(k2 * m2_, d.u) - flux(d.k * m1_, u1_);
            case DerivedEquation::HjbFirst:
                return d.w + laplacian(d.v) + op_.apply(d.q) + f_ * d.q + ft_ * iq_ -
                       0.5 * (k2 * (grad_dot(d.v, u1_) + grad_dot(d.v, u2_))) -
                       0.5 * (k2 * (grad_dot(iv_, u1t_) + grad_dot(iv_, u2t_))) -
                       two_gp_ * grad_dot(u1_, u1t_);
            case DerivedEquation::FpFirst:
                return d.r - laplacian(d.q) - flux(k2 * d.q, u1_) - flux(k2 * iq_, u1t_) - flux(k2 * m2_, d.v) -
                       flux(k2 * m2t_, iv_) - flux(two_gp_ * m1t_, u1_) - flux(two_gp_ * m1_, u1t_);
            case DerivedEquation::HjbSecond:
                return d_dt(d.w) + laplacian(d.w) + op_.apply(d.r) + 2.0 * (ft_ * d.q) + f_ * d.r + ftt_ * iq_ -
                       0.5 * (k2 * (grad_dot(d.w, u1_) + grad_dot(d.w, u2_))) -
                       k2 * (grad_dot(d.v, u1t_) + grad_dot(d.v, u2t_)) -
                       0.5 * (k2 * (grad_dot(iv_, u1tt_) + grad_dot(iv_, u2tt_))) -
                       two_gp_ * (grad_dot(u1t_, u1t_) + grad_dot(u1_, u1tt_));
            case DerivedEquation::FpSecond:
                return d_dt(d.r) - laplacian(d.r) - flux(k2 * d.r, u1_) - 2.0 * flux(k2 * d.q, u1t_) -
                       flux(k2 * iq_, u1tt_) - flux(k2 * m2_, d.w) - 2.0 * flux(k2 * m2t_, d.v) -
                       flux(k2 * m2tt_, iv_) - flux(two_gp_ * m1tt_, u1_) - 2.0 * flux(two_gp_ * m1t_, u1t_) -
                       flux(two_gp_ * m1_, u1tt_);
        }
        fail(ErrorKind::InvalidArgument, "unknown derived equation");
    }

    Field rhs(DerivedEquation e) const {
        const SpaceField& k2 = k2_;
        switch (e) {
            case DerivedEquation::Hjb:
            case DerivedEquation::Fp:
                return Field::zeros(pack_.u.grid_ptr());
            case DerivedEquation::HjbFirst:
                return F_ * grad_dot(u1_, u1t_) - ft_ * m0_ + 0.5 * (k2 * (grad_dot(u0_, u1t_) + grad_dot(u0_, u2t_)));
            case DerivedEquation::FpFirst:
                return flux(F_ * m1t_, u1_) + flux(F_ * m1_, u1t_) + flux(k2 * m0_, u1t_) + flux(k2 * m2t_, u0_);
            case DerivedEquation::HjbSecond:
                return F_ * (grad_dot(u1t_, u1t_) + grad_dot(u1_, u1tt_)) - ftt_ * m0_ +
                       0.5 * (k2 * (grad_dot(u0_, u1tt_) + grad_dot(u0_, u2tt_)));
            case DerivedEquation::FpSecond:
                return flux(F_ * m1tt_, u1_) + 2.0 * flux(F_ * m1t_, u1t_) + flux(F_ * m1_, u1tt_) +
                       flux(k2 * m0_, u1tt_) + flux(k2 * m2tt_, u0_);
        }
        fail(ErrorKind::InvalidArgument, "unknown derived equation");
    }

    /// The operator part on the left of each differential inequality.
    Field principal(Inequality i) const {
        const auto& d = pack_;
        switch (i) {
            case Inequality::Value: return abs(d.w + laplacian(d.v));
            case Inequality::Density: return abs(d.r - laplacian(d.q));
            case Inequality::ValueRate: return abs(d_dt(d.w) + laplacian(d.w));
            case Inequality::DensityRate: return abs(d_dt(d.r) - laplacian(d.r));
        }
        fail(ErrorKind::InvalidArgument, "unknown inequality");
    }

    Field bracket(Inequality i) const {
        const auto& d = pack_;
        const auto gv = grad_norm(d.v);
        switch (i) {
            case Inequality::Value:
                return gv + abs(d.v) + abs_integral(gv) + abs_integral(d.w) + abs_integral(d.q) + majorant(d.q) +
                       abs(d.q);
            case Inequality::Density: {
                const auto gq = grad_norm(d.q);
                const auto lv = abs(laplacian(d.v));
                const auto gw = grad_norm(d.w);
                return gq + abs(d.q) + abs_integral(gq + abs(d.q)) + lv + gv + abs(d.v) + abs_integral(lv + gv) +
                       abs_integral(gw + abs(d.w));
            }
            case Inequality::ValueRate:
                return grad_norm(d.w) + abs(d.w) + abs_integral(d.w) + gv + abs(d.v) + abs_integral(gv) + abs(d.r) +
                       abs(d.q) + abs_integral(d.q) + majorant(d.r);
            case Inequality::DensityRate: {
                const auto gq = grad_norm(d.q);
                const auto lv = abs(laplacian(d.v));
                const auto gw = grad_norm(d.w);
                const auto lw = abs(laplacian(d.w));
                return grad_norm(d.r) + abs(d.r) + gq + abs(d.q) + lv + gv + abs(d.v) + lw + gw + abs(d.w) +
                       abs_integral(lv + gv + abs(d.v)) + abs_integral(gw + abs(d.w)) + abs_integral(gq + abs(d.q));
            }
        }
        fail(ErrorKind::InvalidArgument, "unknown inequality");
    }

private:
    Field majorant(const Field& x) const {
        if (op_.kernel().variant() == KernelVariant::GaussianProduct) return op_.apply(abs(x));
        return op_.apply_majorant(x);
    }

    const DifferencePack& pack_;
    KernelOperator op_;
    Field u1_, u2_, m1_, m2_;
    SpaceField k2_;
    Field u1t_, u2t_, u1tt_, u2tt_, m1t_, m2t_, m1tt_, m2tt_;
    Field f_, ft_, ftt_;
    Field iq_, iv_, p_;
    Field u0_, m0_;
    Field two_g_;
    Field F_;
    Field two_gp_;
};

/// Spatial-interior nodes of the truncated cylinder. The time ends are left out:
/// third time differences there fall back on one-sided stencils of one-sided
/// data and lose their order.
bool interior(const Grid& g, const TruncatedWindow& win, std::size_t spatial, std::size_t level) {
    return level >= win.first_level && level <= win.last_level && !g.on_boundary(spatial);
}

double cell_volume(const Grid& g) {
    double vol = g.tau();
    for (double h : g.h()) vol *= h;
    return vol;
}

DerivedEquation equation_of(Inequality i) {
    switch (i) {
        case Inequality::Value: return DerivedEquation::HjbFirst;
        case Inequality::Density: return DerivedEquation::FpFirst;
        case Inequality::ValueRate: return DerivedEquation::HjbSecond;
        case Inequality::DensityRate: return DerivedEquation::FpSecond;
    }
    return DerivedEquation::HjbFirst;
}

}  // namespace

Residual residual_derived_system(const DifferencePack& pack, const SolutionPair& pair, DerivedEquation which) {
    PairTerms terms(pack, pair);
    auto field = terms.lhs(which) - terms.rhs(which);
    const Grid& g = field.grid();
    const auto win = snap_epsilon(g, pack.epsilon);
    double sum = 0.0, worst = 0.0;
    for (std::size_t n = 0; n < g.nt(); ++n) {
        for (std::size_t s = 0; s < g.space_size(); ++s) {
            if (!interior(g, win, s, n)) continue;
            const double x = field(s, n);
            sum += x * x;
            worst = std::max(worst, std::abs(x));
        }
    }
    const double l2 = std::sqrt(sum * cell_volume(g));
    return Residual{std::move(field), l2, worst};
}

InequalityReport check_inequality(const DifferencePack& pack, const SolutionPair& pair, Inequality which,
                                  double c_candidate, double slack_budget) {
    PairTerms terms(pack, pair);
    const auto lhs = terms.principal(which);
    const auto bracket = terms.bracket(which);
    const auto slack = abs(terms.rhs(equation_of(which)));
    const Grid& g = lhs.grid();
    const auto win = snap_epsilon(g, pack.epsilon);

    double scale = 0.0;
    for (std::size_t n = 0; n < g.nt(); ++n)
        for (std::size_t s = 0; s < g.space_size(); ++s)
            if (interior(g, win, s, n)) scale = std::max(scale, bracket(s, n));
    const double threshold = kBracketThreshold * scale;

    InequalityReport report;
    std::size_t count = 0, degenerate = 0;
    double slack_sum = 0.0;
    for (std::size_t n = 0; n < g.nt(); ++n) {
        for (std::size_t s = 0; s < g.space_size(); ++s) {
            if (!interior(g, win, s, n)) continue;
            ++count;
            slack_sum += slack(s, n) * slack(s, n);
            if (bracket(s, n) <= threshold) {
                ++degenerate;
                continue;
            }
            report.empirical_c = std::max(report.empirical_c, lhs(s, n) / (bracket(s, n) + slack(s, n)));
        }
    }
    report.slack_l2 = std::sqrt(slack_sum * cell_volume(g));
    report.degenerate_fraction = count ? static_cast<double>(degenerate) / static_cast<double>(count) : 0.0;
    report.pass = report.empirical_c <= c_candidate && report.slack_l2 <= slack_budget;
    return report;
}

// ---------------------------------------------------------------------------
// Parameter calculus.

double StabilityParams::lambda_for(double delta) const {
    require(delta > 0.0 && delta < 1.0, "lambda(delta): delta must lie in (0, 1)");
    return rho / d * std::log(1.0 / delta);
}

double epsilon_window_lower(double rho, double T) { return 0.5 * T * (1.0 - std::sqrt(rho)); }

double window_ratio(double epsilon, double T) {
    const double gap = 0.5 * T - epsilon;
    return gap * gap / (epsilon * (T - epsilon));
}

double feasibility_margin(double rho, double epsilon, double T) {
    return rho - (1.0 - rho) * window_ratio(epsilon, T);
}

namespace {

void require_window(double rho, double epsilon, double T) {
    require(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)");
    const double lo = epsilon_window_lower(rho, T);
    if (!(epsilon > lo && epsilon < 0.5 * T)) {
        std::ostringstream os;
        os << "epsilon = " << epsilon << " is outside the admissible window ((T/2)(1 - sqrt(rho)), T/2) = (" << lo
           << ", " << 0.5 * T << ") for rho = " << rho << ", T = " << T;
        fail(ErrorKind::InvalidArgument, os.str());
    }
}

}  // namespace

StabilityParams select_parameters(double rho, double epsilon, const Prism& prism, double lambda1) {
    prism.validate();
    require_window(rho, epsilon, prism.T);
    require(lambda1 >= 1.0, "lambda1 must be >= 1");
    StabilityParams p;
    p.rho = rho;
    p.epsilon = epsilon;
    p.T = prism.T;
    p.a = prism.a;
    p.b = prism.b;
    p.lambda1 = lambda1;
    p.s = window_ratio(epsilon, prism.T);
    p.beta = (1.0 - rho) * (1.5 + p.s) / (rho - (1.0 - rho) * p.s);
    const double b2 = prism.b * prism.b;
    p.alpha = (1.0 + p.beta) * b2 / (epsilon * (prism.T - epsilon));
    p.d = (1.5 + (1.0 + p.beta) * p.s) * b2;
    p.log_delta0 = -lambda1 * p.d / rho;
    p.delta0 = std::exp(p.log_delta0);
    return p;
}

ExactParameters select_parameters_exact(Ratio rho_in, Ratio eps_in, Ratio T_in, Ratio b_in, Ratio lambda1_in) {
    using boost::multiprecision::cpp_rational;
    auto make = [](Ratio r) {
        require(r.den != 0, "exact parameters: zero denominator");
        return cpp_rational(r.num, r.den);
    };
    const cpp_rational rho = make(rho_in), eps = make(eps_in), T = make(T_in), b = make(b_in),
                       lambda1 = make(lambda1_in);
    const cpp_rational half = cpp_rational(1, 2);
    require(rho > 0 && rho < 1, "rho must lie in (0, 1)");
    require(eps > 0 && eps < T * half, "epsilon must lie in (0, T/2)");
    const cpp_rational gap = T * half - eps;
    const cpp_rational s = gap * gap / (eps * (T - eps));
    const cpp_rational margin = rho - (1 - rho) * s;
    if (margin <= 0) {
        std::ostringstream os;
        os << "epsilon = " << eps.str() << " is outside the admissible window ((T/2)(1 - sqrt(rho)), T/2)";
        fail(ErrorKind::InvalidArgument, os.str());
    }
    const cpp_rational three_halves = cpp_rational(3, 2);
    const cpp_rational beta = (1 - rho) * (three_halves + s) / margin;
    const cpp_rational alpha = (1 + beta) * b * b / (eps * (T - eps));
    const cpp_rational d = (three_halves + (1 + beta) * s) * b * b;
    const cpp_rational log_delta0 = -lambda1 * d / rho;
    return {s.str(), beta.str(), alpha.str(), d.str(), log_delta0.str()};
}

FinalEstimate assemble_final_estimate(const DifferencePack& pack, const StabilityParams& params, double delta,
                                      double constant) {
    require(delta > 0.0, "final estimate: delta must be positive");
    require(constant > 0.0, "final estimate: the constant must be positive");
    FinalEstimate out;
    out.lambda = delta < 1.0 ? std::max(params.lambda_for(delta), params.lambda1) : params.lambda1;
    const double b2 = params.b * params.b;
    const double eps = params.epsilon;
    out.decay_exponent = -2.0 * out.lambda * (params.alpha * eps * (params.T - eps) - b2);
    const double gap = 0.5 * params.T - eps;
    out.data_exponent = 2.0 * out.lambda * (1.5 * b2 + params.alpha * gap * gap);
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    auto safe_log = [&](double x) { return x > 0.0 ? std::log(x) : neg_inf; };
    const double log_c = std::log(constant);
    out.log_lhs = safe_log(pack.v_h21_sq);
    out.log_decay_term = log_c + out.decay_exponent + safe_log(pack.v_h2_sq);
    out.log_data_term = log_c + 2.0 * std::log(delta) + out.data_exponent;
    const double hi = std::max(out.log_decay_term, out.log_data_term);
    const double lo = std::min(out.log_decay_term, out.log_data_term);
    out.log_rhs = lo == neg_inf ? hi : hi + std::log1p(std::exp(lo - hi));
    out.margin = out.log_rhs - out.log_lhs;
    out.holds = out.log_lhs <= out.log_rhs;
    return out;
}

// ---------------------------------------------------------------------------
// Sweep.

std::vector<double> default_scales() {
    std::vector<double> out;
    for (int i = 0; i < 6; ++i) out.push_back(std::pow(10.0, -4.0 + 3.0 * i / 5.0));
    return out;
}

SweepSetup default_sweep(GridPtr grid) {
    SolverOptions solver;
    solver.tol = 1e-12;
    solver.max_iter = 400;
    auto k1 = scenarios::default_coefficient(grid);
    auto dk = scenarios::coefficient_perturbation(grid);
    auto m0 = scenarios::default_density(grid);
    return SweepSetup{grid,
                      Kernel::none(),
                      scenarios::default_value(),
                      std::move(k1),
                      std::move(dk),
                      std::move(m0),
                      ManufactureOptions{},
                      solver,
                      Completeness::Full,
                      0.5,
                      0.2,
                      1.0,
                      0.5,
                      0.25,
                      default_scales()};
}

namespace {

ClosedForm shifted(const ClosedForm& cf, double shift) {
    ClosedForm out;
    out.value = [f = cf.value, shift](std::span<const double> x, double t) { return f(x, t - shift); };
    out.u_t = [f = cf.u_t, shift](std::span<const double> x, double t) { return f(x, t - shift); };
    out.laplacian = [f = cf.laplacian, shift](std::span<const double> x, double t) { return f(x, t - shift); };
    out.gradient = [f = cf.gradient, shift](std::span<const double> x, double t, std::span<double> g) {
        f(x, t - shift, g);
    };
    return out;
}

GridPtr padded_grid(const GridPtr& grid, double padding, std::size_t& offset) {
    require(padding >= 0.0 && std::isfinite(padding), "padding must be finite and >= 0");
    offset = static_cast<std::size_t>(std::llround(padding / grid->tau()));
    Prism p = grid->prism();
    p.T += 2.0 * static_cast<double>(offset) * grid->tau();
    return make_grid(p, grid->nx(), grid->nt() + 2 * offset);
}

Manufactured manufacture_padded(const SweepSetup& setup, const GridPtr& padded, std::size_t offset) {
    const double shift = static_cast<double>(offset) * setup.grid->tau();
    return manufacture_triple(padded, setup.kernel, rebind(setup.k1, padded), shifted(setup.value, shift),
                              rebind(setup.m0, padded), setup.manufacture);
}

}  // namespace

PerturbationFamily::PerturbationFamily(const SweepSetup& setup)
    : grid_(setup.grid),
      offset_(0),
      padded_(padded_grid(setup.grid, setup.padding, offset_)),
      k1_(setup.k1),
      dk_(setup.dk),
      solver_(setup.solver),
      padded_spec_(manufacture_padded(setup, padded_, offset_).spec),
      base_report_(solve_mfg_picard(padded_spec_, rebind(k1_, padded_), solver_)),
      base_(restrict_triple(base_report_.triple)),
      spec_(spec_from_fields(grid_, setup.kernel, restrict_levels(padded_spec_.f, grid_, offset_), base_.u, base_.m)) {
    require_same_grid(*grid_, dk_.grid(), "perturbation family");
}

SpaceField PerturbationFamily::coefficient(double scale) const { return k1_ + scale * dk_; }

MFGTriple PerturbationFamily::solve(double scale) const {
    const auto k = coefficient(scale);
    require(k.min() > 0.0, "perturbed coefficient is not positive");
    return restrict_triple(solve_mfg_picard(padded_spec_, rebind(k, padded_), solver_).triple);
}

MFGTriple PerturbationFamily::restrict_triple(const MFGTriple& t) const {
    return MFGTriple{restrict_levels(t.u, grid_, offset_), restrict_levels(t.m, grid_, offset_), rebind(t.k, grid_)};
}

SweepReport holder_sweep(const SweepSetup& setup) {
    const GridPtr& grid = setup.grid;
    require(grid != nullptr, "sweep: grid is required");
    require(!setup.scales.empty(), "sweep: at least one perturbation scale is required");
    const double t0 = 0.5 * grid->T();

    SweepReport report;
    report.params = select_parameters(setup.rho, setup.epsilon, grid->prism(), setup.lambda1);
    const PerturbationFamily family(setup);
    report.base_iterations = family.base_iterations();
    const MFGTriple& first = family.base();
    const ProblemSpec& spec = family.spec();
    const auto data1 = extract(first, setup.completeness);
    const auto u01 = snapshot(first.u, t0);

    std::vector<std::optional<SweepRow>> rows(setup.scales.size());
    std::vector<std::optional<std::string>> failures(setup.scales.size());
    parallel_for(setup.scales.size(), [&](std::size_t i) {
        const double scale = setup.scales[i];
        if (scale == 0.0) {
            failures[i] = "zero perturbation: delta = 0 has no logarithm";
            return;
        }
        try {
            const auto second = family.solve(scale);
            const auto& k2 = second.k;
            auto data2 = extract(second, setup.completeness);
            if (setup.noise.delta > 0.0)
                data2 = inject_noise(data2, {setup.noise.delta, setup.noise.seed + i, setup.noise.profile});
            const auto pack = form_difference(first, second, setup.epsilon);
            SweepRow row;
            row.scale = scale;
            row.delta = measure_delta(data1, data2, setup.completeness);
            row.err_k = norm_l2(pack.k);
            const Region window = Region::truncated(setup.epsilon);
            const Field* us[3] = {&pack.u, &pack.v, &pack.w};
            const Field* ms[3] = {&pack.m, &pack.q, &pack.r};
            for (std::size_t s = 0; s < 3; ++s) {
                row.err_u[s] = norm_h21(*us[s], window);
                row.err_m[s] = norm_h21(*ms[s], window);
            }
            const auto F = compute_F(pack, u01, snapshot(second.u, t0), k2, setup.kernel, spec.f, setup.c);
            row.err_k_reconstructed = norm_l2(reconstruct_k_tilde(pack, u01, F, setup.c) - pack.k);
            rows[i] = row;
        } catch (const Error& e) {
            failures[i] = e.what();
        }
    });

    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i]) report.rows.push_back(*rows[i]);
        if (failures[i]) report.excluded.push_back({setup.scales[i], *failures[i]});
    }
    std::vector<double> delta, ek;
    std::array<std::vector<double>, 3> eu, em;
    for (const auto& r : report.rows) {
        delta.push_back(r.delta);
        ek.push_back(r.err_k);
        for (std::size_t s = 0; s < 3; ++s) {
            eu[s].push_back(r.err_u[s]);
            em[s].push_back(r.err_m[s]);
        }
    }
    if (report.rows.size() >= 2) {
        report.fit_k = fit_loglog(delta, ek);
        for (std::size_t s = 0; s < 3; ++s) {
            report.fit_u[s] = fit_loglog(delta, eu[s]);
            report.fit_m[s] = fit_loglog(delta, em[s]);
        }
    }
    return report;
}

}  // namespace mfglab

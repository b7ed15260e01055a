#include "support.hpp"

#include "mfglab/error.hpp"
#include "mfglab/mfg.hpp"
#include "mfglab/numerics.hpp"
#include "mfglab/scenarios.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace mfglab;
using mfglab::support::kPi;
using mfglab::support::line_grid;

namespace {

/// Heat-equation spec: zero kernel and f, data read off `u` and `m`.
ProblemSpec plain_spec(GridPtr g, const Field& u, const Field& m) {
    return spec_from_fields(g, Kernel::none(), Field::zeros(g), u, m);
}

ClosedForm zero_value() {
    auto zero = [](std::span<const double>, double) { return 0.0; };
    return {zero, zero, zero, [](std::span<const double>, double, std::span<double> grad) {
                for (double& g : grad) g = 0.0;
            }};
}

std::vector<double> mirror(std::span<const double> level) { return {level.rbegin(), level.rend()}; }

}  // namespace

TEST(FokkerPlanck, ConstantStaysConstant) {
    auto g = line_grid(33, 33);
    const Field one = Field::constant(g, 1.0);
    const Field m = solve_fokker_planck(plain_spec(g, Field::zeros(g), one), SpaceField::zeros(g), Field::zeros(g));
    EXPECT_LT((m - one).max_abs(), 1e-13);
}

TEST(FokkerPlanck, HeatAgainstSeparatedVariables) {
    Prism p = support::unit_prism();
    p.T = 0.1;
    auto g = make_grid(p, {129}, 257);
    const Field exact = Field::sample(g, [](auto x, double t) { return 2 + std::exp(-kPi * kPi * t) * std::sin(kPi * x[0]); });
    const Field m = solve_fokker_planck(plain_spec(g, Field::zeros(g), exact), SpaceField::zeros(g), Field::zeros(g));
    const std::size_t last = g->nt() - 1;
    double err = 0.0;
    for (std::size_t s = 0; s < g->space_size(); ++s) err = std::max(err, std::abs(m(s, last) - exact(s, last)));
    EXPECT_LE(err, 5e-3);
}

TEST(FokkerPlanck, ConservationWithoutDrift) {
    auto g = line_grid(65, 65);
    const Field c = Field::constant(g, 0.7);
    const Field m = solve_fokker_planck(plain_spec(g, Field::zeros(g), c), SpaceField::zeros(g), Field::zeros(g));
    const double mass0 = integrate(m, Region::slice(0));
    for (std::size_t n = 1; n < g->nt(); ++n) EXPECT_NEAR(integrate(m, Region::slice(n)), mass0, 1e-8 * mass0);
}

TEST(FokkerPlanck, PositivityOnDefaultGrid) {
    auto g = line_grid(65, 129);
    const Field u = scenarios::default_value().sample(g);
    const Field m0 = Field::broadcast(SpaceField::sample(g, [](auto x) { return 0.1 + 0.5 * std::pow(std::sin(kPi * x[0]), 2); }));
    const Field m = solve_fokker_planck(plain_spec(g, u, m0), scenarios::default_coefficient(g), u);
    EXPECT_GT(m.min(), 0.0);
}

TEST(FokkerPlanck, ExplicitPathAgreesWithImplicit) {
    auto g = line_grid(17, 1025);
    const Field u = scenarios::quadratic_value().sample(g);
    const Field m0 = Field::broadcast(scenarios::default_density(g));
    const auto spec = plain_spec(g, u, m0);
    const SpaceField k = SpaceField::constant(g, 1.0);
    const Field a = solve_fokker_planck(spec, k, u, TimeScheme::Implicit);
    const Field b = solve_fokker_planck(spec, k, u, TimeScheme::Explicit);
    EXPECT_LT((a - b).max_abs(), 5e-3);
}

TEST(Hjb, ZeroDataGivesZero) {
    auto g = line_grid(33, 33);
    const Field z = Field::zeros(g);
    const Field one = Field::constant(g, 1.0);
    EXPECT_EQ(solve_hjb(plain_spec(g, z, one), SpaceField::zeros(g), one).max_abs(), 0.0);
}

TEST(Hjb, BackwardHeatAgainstSeparatedVariables) {
    Prism p = support::unit_prism();
    p.T = 0.1;
    auto g = make_grid(p, {129}, 257);
    const Field exact = Field::sample(g, [](auto x, double t) { return std::exp(-kPi * kPi * (0.1 - t)) * std::sin(kPi * x[0]); });
    const Field one = Field::constant(g, 1.0);
    const Field u = solve_hjb(plain_spec(g, exact, one), SpaceField::zeros(g), one);
    double err = 0.0;
    for (std::size_t s = 0; s < g->space_size(); ++s) err = std::max(err, std::abs(u(s, 0) - exact(s, 0)));
    EXPECT_LE(err, 5e-3);
}

TEST(Picard, DecoupledConvergesInOneIteration) {
    auto g = line_grid(33, 33);
    const Field u = Field::sample(g, [](auto x, double t) { return std::sin(kPi * x[0]) * t; });
    const auto report = solve_mfg_picard(plain_spec(g, u, Field::constant(g, 1.0)), SpaceField::zeros(g));
    EXPECT_EQ(report.iterations, 1u);
    EXPECT_TRUE(report.decoupled);
}

TEST(Picard, SmallCouplingConverges) {
    auto g = line_grid(65, 129);
    const auto made = manufacture_triple(g, Kernel::none(), scenarios::default_coefficient(g), scenarios::default_value(),
                                         scenarios::default_density(g));
    const auto spec = spec_from_fields(g, Kernel::heaviside_causal(Profile::constant(0.1)), 0.1 * made.f,
                                       made.triple.u, made.triple.m);
    const auto report = solve_mfg_picard(spec, made.triple.k, SolverOptions{TimeScheme::Implicit, 0.5, 30, 1e-8});
    EXPECT_LE(report.iterations, 30u);
    EXPECT_LT(report.history.back(), 1e-8);
    EXPECT_FALSE(report.decoupled);
}

TEST(Picard, StrongCouplingReportsNonConvergence) {
    auto g = line_grid(33, 33);
    const auto made = manufacture_triple(g, Kernel::none(), scenarios::default_coefficient(g), scenarios::default_value(),
                                         scenarios::default_density(g));
    const auto spec = spec_from_fields(g, Kernel::heaviside_causal(Profile::constant(20.0)), 20.0 * made.f,
                                       made.triple.u, made.triple.m);
    try {
        solve_mfg_picard(spec, made.triple.k, SolverOptions{TimeScheme::Implicit, 1.0, 40, 1e-10});
        FAIL() << "strong coupling converged";
    } catch (const NonConvergenceError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonConvergence);
        ASSERT_EQ(e.history().size(), 40u);
        for (double h : e.history()) EXPECT_TRUE(std::isfinite(h));
        EXPECT_GT(e.history().back(), 1e-2);
    }
}

TEST(Picard, BlowUpIsReportedNotReturned) {
    auto g = line_grid(33, 33);
    const auto made = manufacture_triple(g, Kernel::none(), scenarios::default_coefficient(g), scenarios::default_value(),
                                         scenarios::default_density(g));
    const auto spec = spec_from_fields(g, Kernel::heaviside_causal(Profile::constant(100.0)), -100.0 * made.f,
                                       made.triple.u, made.triple.m);
    try {
        solve_mfg_picard(spec, made.triple.k, SolverOptions{TimeScheme::Implicit, 1.0, 40, 1e-10});
        FAIL() << "blow-up went unnoticed";
    } catch (const NonConvergenceError& e) {
        EXPECT_NE(std::string(e.what()).find("blew up at x = ("), std::string::npos) << e.what();
    }
}

TEST(Picard, MirroredDataGiveMirroredSolutions) {
    auto g = line_grid(33, 33);
    auto even = [](double x) { return std::cos(2 * kPi * (x - 1.5)); };
    const Field u = Field::sample(g, [&](auto x, double) { return 0.1 * even(x[0]); });
    const Field m = Field::sample(g, [&](auto x, double) { return 1 + 0.2 * even(x[0]); });
    const Field f = Field::sample(g, [&](auto x, double t) { return 0.1 * even(x[0]) * (1 + t); });
    const auto spec = spec_from_fields(g, Kernel::separable_delta(Profile::constant(0.1)), f, u, m);
    const SpaceField k = SpaceField::sample(g, [&](auto x) { return 1 + 0.2 * even(x[0]); });
    const auto report = solve_mfg_picard(spec, k, SolverOptions{TimeScheme::Implicit, 0.5, 200, 1e-12});
    for (std::size_t n = 0; n < g->nt(); ++n) {
        const auto ul = report.triple.u.level(n);
        const auto ml = report.triple.m.level(n);
        const auto ur = mirror(ul);
        const auto mr = mirror(ml);
        for (std::size_t i = 0; i < ul.size(); ++i) {
            EXPECT_NEAR(ul[i], ur[i], 1e-10);
            EXPECT_NEAR(ml[i], mr[i], 1e-10);
        }
    }
}

TEST(Manufacture, ZeroValueGivesZeroSource) {
    auto g = line_grid(33, 33);
    const auto made = manufacture_triple(g, Kernel::none(), SpaceField::zeros(g), zero_value(), SpaceField::constant(g, 1.0));
    EXPECT_LT(made.f.max_abs(), 1e-13);
    EXPECT_LT((made.triple.m - Field::constant(g, 1.0)).max_abs(), 1e-13);
}

TEST(Manufacture, RejectsDensityBelowFloor) {
    auto g = line_grid(33, 33);
    const SpaceField crossing = SpaceField::sample(g, [](auto x) { return x[0] - 1.5; });
    EXPECT_THROW(manufacture_triple(g, Kernel::none(), SpaceField::zeros(g), zero_value(), crossing), Error);
    try {
        const SpaceField thin = SpaceField::sample(g, [](auto x) { return 1e-3 * std::pow(x[0] - 1.5, 2) + 1e-9; });
        manufacture_triple(g, Kernel::none(), SpaceField::zeros(g), zero_value(), thin, ManufactureOptions{1e-6, 0.0});
        FAIL() << "density below the floor accepted";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("at x = (1.5"), std::string::npos) << e.what();
    }
}

TEST(Manufacture, ResidualsConvergeAtSecondOrder) {
    // (h, tau) -> (h/2, tau/4).
    std::vector<double> hs, hjb, fp;
    for (auto [nx, nt] : {std::pair{17u, 17u}, {33u, 65u}, {65u, 257u}}) {
        auto g = line_grid(nx, nt);
        const auto made = manufacture_triple(g, Kernel::none(), SpaceField::constant(g, 1.0),
                                             scenarios::quadratic_value(), scenarios::default_density(g));
        hs.push_back(g->h(0));
        hjb.push_back(residual(made.triple, made.spec, Equation::Hjb).l2);
        fp.push_back(residual(made.triple, made.spec, Equation::Fp).l2);
    }
    EXPECT_GE(fit_loglog(hs, fp).slope, 1.8);
    // u is closed form, so the HJB residual is pure operator error (exact on x1^2 + t).
    EXPECT_LT(hjb.back(), 1e-9);
}

TEST(Residual, ZeroTripleHasZeroResidual) {
    auto g = line_grid(17, 17);
    const MFGTriple t{Field::zeros(g), Field::constant(g, 1.0), SpaceField::zeros(g)};
    const auto spec = plain_spec(g, t.u, t.m);
    EXPECT_EQ(residual(t, spec, Equation::Hjb).max, 0.0);
    EXPECT_EQ(residual(t, spec, Equation::Fp).max, 0.0);
}

TEST(Residual, GrowsContinuouslyUnderPerturbation) {
    auto g = line_grid(33, 65);
    const auto made = manufacture_triple(g, Kernel::none(), scenarios::default_coefficient(g), scenarios::default_value(),
                                         scenarios::default_density(g));
    const double base = residual(made.triple, made.spec, Equation::Hjb).max;
    const double eps = 1e-3;
    const Field bump = Field::sample(g, [&](auto x, double) { return eps * std::sin(kPi * x[0]); });
    const MFGTriple moved{made.triple.u + bump, made.triple.m, made.triple.k};
    const double after = residual(moved, made.spec, Equation::Hjb).max;
    EXPECT_GT(after, base);
    EXPECT_LT(after - base, 10 * eps / (g->h(0) * g->h(0)));
}

TEST(Bounds, NonDegeneracyOfDefaultValue) {
    auto g = line_grid(33, 33);
    const auto made = manufacture_triple(g, Kernel::none(), scenarios::default_coefficient(g), scenarios::default_value(),
                                         scenarios::default_density(g));
    const auto b = triple_bounds(made.triple);
    // |u_x| >= 2a - 0.1 pi T at every node.
    EXPECT_GE(b.c, 0.5 * std::pow(2.0 - 0.1 * kPi, 2) - 1e-9);
    EXPECT_GT(b.n2, 0.0);
    EXPECT_GE(b.n3, 1.2 - 1e-9);
    EXPECT_LE(b.n3, 1.2 + 0.2 * kPi);
    EXPECT_GT(made.spec.f_bound(), 0.0);
}

#include "support.hpp"

#include "mfglab/error.hpp"
#include "mfglab/grid.hpp"
#include "mfglab/numerics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace mfglab;
using mfglab::support::kPi;
using mfglab::support::line_grid;
using mfglab::support::square_prism;
using mfglab::support::unit_prism;

namespace {

double x1(std::span<const double> x, double) { return x[0]; }

}  // namespace

TEST(MakeGrid, SpacingsAndMidLevel) {
    auto g = make_grid(unit_prism(), {129}, 257);
    EXPECT_DOUBLE_EQ(g->h(0), 1.0 / 128.0);
    EXPECT_DOUBLE_EQ(g->tau(), 1.0 / 256.0);
    EXPECT_EQ(g->mid_level(), 128u);
    EXPECT_DOUBLE_EQ(g->t(128), 0.5);
    EXPECT_EQ(g->level_of(0.5), 128u);
}

TEST(MakeGrid, RejectsEvenTimeCount) {
    try {
        make_grid(unit_prism(), {129}, 256);
        FAIL() << "even nt accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
        EXPECT_NE(std::string(e.what()).find("t₀ off-grid"), std::string::npos);
    }
}

TEST(MakeGrid, RejectsSmallCounts) {
    EXPECT_THROW(make_grid(unit_prism(), {4}, 9), Error);
    EXPECT_THROW(make_grid(unit_prism(), {9}, 3), Error);
    EXPECT_THROW(make_grid(Prism{0.0, 1.0, {}, 1.0}, {9}, 9), Error);
}

TEST(MakeGrid, TwoDimensionalMeasure) {
    auto g = make_grid(square_prism(), {65, 65}, 129);
    EXPECT_EQ(g->dim(), 2u);
    EXPECT_DOUBLE_EQ(g->prism().transverse_measure(), 2.0);
    EXPECT_DOUBLE_EQ(unit_prism().transverse_measure(), 1.0);
    EXPECT_EQ(g->faces().size(), 4u);
}

TEST(Field, RejectsNonFiniteSamples) {
    auto g = line_grid(9, 9);
    std::vector<double> v(g->size(), 1.0);
    v[7] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(Field(g, v), Error);
    EXPECT_THROW(Field(g, std::vector<double>(3, 0.0)), Error);
}

TEST(Differences, ExactOnLinearsAndQuadratics) {
    auto g = make_grid(square_prism(), {17, 13}, 9);
    const Field lin = Field::sample(g, x1);
    EXPECT_LT((d_dx(lin, 0) - Field::constant(g, 1.0)).max_abs(), 1e-12);
    EXPECT_LT(d_dx(lin, 1).max_abs(), 1e-12);

    const Field quad = Field::sample(g, [](auto x, double) { return x[0] * x[0]; });
    EXPECT_LT(support::interior_gap(laplacian(quad), Field::constant(g, 2.0)), 1e-9);
    // One-sided second-order ends are exact on quadratics too.
    EXPECT_LT((d2_dx2(quad, 0) - Field::constant(g, 2.0)).max_abs(), 1e-8);

    const Field mixed = Field::sample(g, [](auto x, double) { return x[0] * x[1]; });
    EXPECT_LT((d2_dxdx(mixed, 0, 1) - Field::constant(g, 1.0)).max_abs(), 1e-10);
}

TEST(Differences, TimeDerivativeOfLinearInTime) {
    auto g = line_grid(33, 17);
    const Field u = Field::sample(g, [](auto x, double t) { return std::sin(kPi * x[0]) * t; });
    const Field want = Field::sample(g, [](auto x, double) { return std::sin(kPi * x[0]); });
    EXPECT_LT((d_dt(u) - want).max_abs(), 1e-12);
    EXPECT_LT(d2_dt2(u).max_abs(), 1e-9);
}

TEST(Differences, SecondOrderConvergence) {
    // u = sin(pi x) cos(t): Laplacian under h-halving, d/dt under tau-halving.
    auto u_of = [](auto x, double t) { return std::sin(kPi * x[0]) * std::cos(t); };
    std::vector<double> hs, lap_err, taus, dt_err;
    // From 65 points on both errors sit in the asymptotic range.
    for (std::size_t n : {65u, 129u, 257u, 513u}) {
        auto g = line_grid(n, 9);
        const Field exact = Field::sample(g, [](auto x, double t) { return -kPi * kPi * std::sin(kPi * x[0]) * std::cos(t); });
        hs.push_back(g->h(0));
        lap_err.push_back((laplacian(Field::sample(g, u_of)) - exact).max_abs());

        auto gt = line_grid(9, n);
        const Field exact_t = Field::sample(gt, [](auto x, double t) { return -std::sin(kPi * x[0]) * std::sin(t); });
        taus.push_back(gt->tau());
        dt_err.push_back((d_dt(Field::sample(gt, u_of)) - exact_t).max_abs());
    }
    EXPECT_NEAR(fit_loglog(hs, lap_err).slope, 2.0, 0.2);
    EXPECT_NEAR(fit_loglog(taus, dt_err).slope, 2.0, 0.2);
}

TEST(Integrate, UnitMeasures) {
    auto g = line_grid(33, 33);
    const Field one = Field::constant(g, 1.0);
    EXPECT_NEAR(integrate(one), 1.0, 1e-14);
    EXPECT_NEAR(integrate(one, Region::truncated(0.25)), 0.5, 1e-14);
    EXPECT_NEAR(integrate(one, Region::slice(3)), 1.0, 1e-14);
    EXPECT_NEAR(integrate(one, Region::face_cylinder(kGamma1Plus)), 1.0, 1e-14);
    EXPECT_NEAR(integrate(one, Region::lateral()), 2.0, 1e-14);
}

TEST(Integrate, TruncatedEpsilonOutsideWindowRejected) {
    auto g = line_grid(17, 33);
    const Field one = Field::constant(g, 1.0);
    EXPECT_THROW(integrate(one, Region::truncated(0.0)), Error);
    EXPECT_THROW(integrate(one, Region::truncated(0.5)), Error);
    EXPECT_THROW(integrate(one, Region::truncated(-0.1)), Error);
}

TEST(Integrate, EpsilonSnapsToNearestLevel) {
    auto g = line_grid(17, 33);  // tau = 1/32
    const auto w = snap_epsilon(*g, 0.2);
    EXPECT_EQ(w.first_level, 6u);
    EXPECT_EQ(w.last_level, 26u);
    EXPECT_DOUBLE_EQ(w.epsilon, 6.0 / 32.0);
}

TEST(Integrate, SineSquaredSlice) {
    auto g = line_grid(129, 9);
    const Field f = Field::sample(g, [](auto x, double) { return std::pow(std::sin(kPi * x[0]), 2); });
    EXPECT_NEAR(integrate(f, Region::slice(0)), 0.5, 1e-6);
}

TEST(Integrate, ExactForMultilinearFields) {
    auto g = make_grid(square_prism(), {9, 7}, 11);
    const Field f = Field::sample(g, [](auto x, double t) { return (1 + 2 * x[0]) * (3 - x[1]) * (0.5 + t); });
    // int_1^2 (1 + 2x) dx = 4, int_{-1}^1 (3 - y) dy = 6, int_0^1 (0.5 + t) dt = 1.
    EXPECT_NEAR(integrate(f), 24.0, 24.0 * 1e-12);
}

TEST(Norms, ZeroFieldIsZeroForEveryKind) {
    auto g = make_grid(square_prism(), {9, 9}, 9);
    const Field z = Field::zeros(g);
    const SpaceField zs = SpaceField::zeros(g);
    EXPECT_EQ(norm_l2(z), 0.0);
    EXPECT_EQ(norm_h2(z), 0.0);
    EXPECT_EQ(norm_h21(z), 0.0);
    EXPECT_EQ(norm_h21(z, Region::truncated(0.25)), 0.0);
    EXPECT_EQ(norm_l2(zs), 0.0);
    EXPECT_EQ(norm_h1(zs), 0.0);
    EXPECT_EQ(norm_h2(zs), 0.0);
    EXPECT_EQ(h21_lateral_sq(z), 0.0);
    EXPECT_EQ(h10_lateral_sq(z), 0.0);
    EXPECT_EQ(h21_sq(trace(z, TraceKind::Dirichlet, kGamma1Plus)), 0.0);
    EXPECT_EQ(h10_sq(trace(z, TraceKind::Neumann, kGamma1Minus)), 0.0);
}

TEST(Norms, ConstantOverCylinder) {
    auto g = make_grid(square_prism(), {9, 9}, 9);
    EXPECT_NEAR(norm_l2(Field::constant(g, -3.0)), 3.0 * std::sqrt(2.0), 1e-12);
}

TEST(Norms, SineOnUnitInterval) {
    auto g = line_grid(129, 5);
    const SpaceField s = SpaceField::sample(g, [](auto x) { return std::sin(kPi * x[0]); });
    EXPECT_NEAR(norm_l2(s), 1.0 / std::sqrt(2.0), 1e-5);
}

TEST(Norms, Monotonicity) {
    auto g = make_grid(square_prism(), {17, 17}, 17);
    const Field f = Field::sample(g, [](auto x, double t) { return std::sin(x[0] + 0.3 * x[1]) * std::exp(-t); });
    const double l2 = l2_sq(f);
    double h1 = l2;
    for (const auto& c : gradient(f)) h1 += l2_sq(c);
    EXPECT_GE(h2_sq(f), h1);
    EXPECT_GE(h1, l2);
    EXPECT_GE(h21_sq(f), l2);
}

TEST(Norms, LateralDecompositionSumsFaces) {
    auto g = make_grid(square_prism(), {17, 13}, 9);
    const Field f = Field::sample(g, [](auto x, double t) { return x[0] * x[0] * std::cos(x[1]) + t * x[1]; });
    for (auto reading : {FaceNormReading::PerFace, FaceNormReading::Literal}) {
        double sum = 0.0;
        for (const auto& face : g->faces()) sum += h21_face_sq(f, face, reading);
        EXPECT_DOUBLE_EQ(sum, h21_lateral_sq(f, reading));
    }
    double sum10 = 0.0;
    for (const auto& face : g->faces()) sum10 += h10_face_sq(f, face);
    EXPECT_DOUBLE_EQ(sum10, h10_lateral_sq(f));
}

TEST(Norms, TraceNormsMatchFieldNorms) {
    // The field norm also carries the mixed normal-tangential derivative, which
    // the Dirichlet trace cannot see; with no such term the two agree.
    auto g = make_grid(square_prism(), {17, 13}, 9);
    const Field separable = Field::sample(g, [](auto x, double t) { return x[0] * x[0] + std::sin(x[1]) + t * t; });
    const Field mixed = Field::sample(g, [](auto x, double t) { return x[0] * std::sin(x[1]) + t * t; });
    for (const auto& face : g->faces()) {
        EXPECT_NEAR(h21_sq(trace(separable, TraceKind::Dirichlet, face)), h21_face_sq(separable, face), 1e-9);
        EXPECT_LT(h21_sq(trace(mixed, TraceKind::Dirichlet, face)), h21_face_sq(mixed, face));
        EXPECT_NEAR(h10_sq(trace(mixed, TraceKind::Dirichlet, face)), h10_face_sq(mixed, face), 1e-9);
    }
}

TEST(Trace, NeumannSignFollowsOutwardNormal) {
    auto g = make_grid(square_prism(), {9, 9}, 9);
    const Field u = Field::sample(g, x1);
    const auto plus = trace(u, TraceKind::Neumann, kGamma1Plus);
    const auto minus = trace(u, TraceKind::Neumann, kGamma1Minus);
    for (double v : plus.values()) EXPECT_NEAR(v, 1.0, 1e-12);
    for (double v : minus.values()) EXPECT_NEAR(v, -1.0, 1e-12);
}

TEST(Trace, DirichletOfConstant) {
    auto g = make_grid(square_prism(), {9, 9}, 9);
    const Field five = Field::constant(g, 5.0);
    for (const auto& face : g->faces()) {
        const auto tr = trace(five, TraceKind::Dirichlet, face);
        for (double v : tr.values()) EXPECT_EQ(v, 5.0);
    }
}

TEST(Trace, EmbedIsIdentityOnFaceNodes) {
    auto g = make_grid(square_prism(), {9, 7}, 9);
    const Field f = Field::sample(g, [](auto x, double t) { return std::cos(x[0] * x[1]) + t; });
    const Field blank = Field::zeros(g);
    for (const auto& face : g->faces()) {
        const auto tr = trace(f, TraceKind::Dirichlet, face);
        const auto back = trace(embed(blank, tr), TraceKind::Dirichlet, face);
        EXPECT_EQ((back - tr).max_abs(), 0.0);
    }
}

TEST(Snapshot, RestrictsToLevel) {
    auto g = line_grid(17, 33);
    const Field u = Field::sample(g, [](auto x, double t) { return t * x[0]; });
    const SpaceField mid = snapshot(u, 0.5);
    for (std::size_t i = 0; i < g->space_size(); ++i) {
        EXPECT_DOUBLE_EQ(mid[i], u(i, g->mid_level()));
        EXPECT_NEAR(mid[i], 0.5 * g->x(0, i), 1e-15);
    }
    EXPECT_THROW(snapshot(u, 0.5 + 0.5 * g->tau()), Error);
}

TEST(Integrals, MidpointPrimitiveIsExactForLinears) {
    auto g = line_grid(9, 17);
    const Field v = Field::sample(g, [](auto x, double t) { return x[0] * (1 + 2 * t); });
    const Field want = Field::sample(g, [](auto x, double t) { return x[0] * ((t + t * t) - 0.75); });
    EXPECT_LT((integrate_from_mid(v) - want).max_abs(), 1e-14);
}

TEST(Restriction, WindowOfLevels) {
    Prism wide = unit_prism();
    wide.T = 2.0;
    auto big = line_grid(9, 33);
    auto src = make_grid(wide, {9}, 65);
    const Field f = Field::sample(src, [](auto x, double t) { return x[0] + t; });
    const Field r = restrict_levels(f, big, 16);
    const Field want = Field::sample(big, [](auto x, double t) { return x[0] + t + 0.5; });
    EXPECT_LT((r - want).max_abs(), 1e-14);
    EXPECT_THROW(restrict_levels(f, big, 40), Error);
}

#include "support.hpp"

#include "mfglab/cip.hpp"
#include "mfglab/error.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

using namespace mfglab;
using mfglab::support::line_grid;
using mfglab::support::square_prism;

namespace {

MFGTriple triple_from(GridPtr g, auto u_fn, auto m_fn) {
    return MFGTriple{Field::sample(g, u_fn), Field::sample(g, m_fn), SpaceField::constant(g, 1.0)};
}

MFGTriple smooth_triple(GridPtr g) {
    return triple_from(
        g, [](auto x, double t) { return x[0] * x[0] + 0.1 * std::sin(t + x[0]); },
        [](auto x, double t) { return 1.0 + 0.2 * std::cos(x[0] - t); });
}

double largest(const std::vector<BudgetLine>& lines) {
    double v = 0.0;
    for (const auto& l : lines) v = std::max(v, l.value);
    return v;
}

}  // namespace

TEST(Extract, LinearValueHasUnitNormalDerivative) {
    auto g = line_grid(33, 17);
    const auto data = extract(triple_from(g, [](auto x, double) { return x[0]; }, [](auto, double) { return 1.0; }),
                              Completeness::Full);
    ASSERT_EQ(data.g1.at(0).size(), 2u);
    for (const auto& tr : data.g1.at(0)) {
        const double want = tr.face().side == Side::Upper ? 1.0 : -1.0;
        for (double v : tr.values()) EXPECT_NEAR(v, want, 1e-12) << to_string(tr.face());
    }
    for (const auto& tr : data.g0.at(1)) EXPECT_LT(tr.max_abs(), 1e-12);
}

TEST(Extract, FirstTimeDerivativeTrace) {
    auto g = line_grid(17, 33);
    const auto data =
        extract(triple_from(g, [](auto x, double t) { return t * x[0]; }, [](auto, double) { return 1.0; }),
                Completeness::Full);
    const auto* upper = data.g0.find(1, kGamma1Plus);
    const auto* lower = data.g0.find(1, kGamma1Minus);
    ASSERT_TRUE(upper && lower);
    for (double v : upper->values()) EXPECT_NEAR(v, 2.0, 1e-12);
    for (double v : lower->values()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Extract, SnapshotsAtMidTime) {
    auto g = line_grid(17, 33);
    const auto data =
        extract(triple_from(g, [](auto x, double t) { return t + x[0]; }, [](auto, double t) { return t * t; }),
                Completeness::Full);
    for (std::size_t i = 0; i < g->space_size(); ++i) {
        EXPECT_NEAR(data.u0[i], 0.5 + g->x(0, i), 1e-14);
        EXPECT_NEAR(data.m0[i], 0.25, 1e-14);
    }
}

TEST(Extract, IncompleteKeepsNeumannOnGamma1PlusOnly) {
    auto g = make_grid(square_prism(), {9, 9}, 9);
    const auto data = extract(smooth_triple(g), Completeness::Incomplete);
    EXPECT_EQ(data.completeness, Completeness::Incomplete);
    EXPECT_EQ(data.g0.at(0).size(), 4u);
    ASSERT_EQ(data.g1.at(0).size(), 1u);
    EXPECT_EQ(data.g1.at(0)[0].face(), kGamma1Plus);
    EXPECT_EQ(data.p1.find(0, kGamma1Minus), nullptr);
}

TEST(Extract, TracesOfTimeDerivativesAreConsistent) {
    for (std::size_t nt : {17u, 33u, 65u}) {
        const auto data = extract(smooth_triple(make_grid(square_prism(), {9, 9}, nt)), Completeness::Full);
        EXPECT_LT(trace_consistency(data), 1e-9) << "nt " << nt;
    }
    auto g = line_grid(17, 17);
    auto broken = extract(smooth_triple(g), Completeness::Full);
    broken.g0.order[1][0] = 2.0 * broken.g0.order[1][0];
    EXPECT_GT(trace_consistency(broken), 1e-3);
}

TEST(Noise, ZeroDeltaReturnsDataUnchanged) {
    auto g = line_grid(17, 17);
    const auto data = extract(smooth_triple(g), Completeness::Full);
    const auto same = inject_noise(data, {0.0, 7});
    EXPECT_EQ(measure_delta(data, same, Completeness::Full), 0.0);
    EXPECT_EQ((same.u0 - data.u0).max_abs(), 0.0);
}

TEST(Noise, MeasuredDeltaMatchesRequest) {
    for (NoiseProfile profile : {NoiseProfile::SmoothLowMode, NoiseProfile::WhitePerNode}) {
        for (Completeness mode : {Completeness::Full, Completeness::Incomplete}) {
            auto g = make_grid(square_prism(), {17, 9}, 17);
            const auto data = extract(smooth_triple(g), mode);
            const auto noisy = inject_noise(data, {1e-2, 11, profile});
            const double delta = measure_delta(data, noisy, mode);
            EXPECT_GE(delta, 9e-3) << to_string(profile) << ' ' << to_string(mode);
            EXPECT_LE(delta, 1e-2) << to_string(profile) << ' ' << to_string(mode);
        }
    }
}

TEST(Noise, DeterministicPerSeed) {
    auto g = line_grid(17, 17);
    const auto data = extract(smooth_triple(g), Completeness::Full);
    const auto a = inject_noise(data, {1e-3, 5});
    const auto b = inject_noise(data, {1e-3, 5});
    const auto c = inject_noise(data, {1e-3, 6});
    EXPECT_EQ(measure_delta(a, b, Completeness::Full), 0.0);
    EXPECT_GT(measure_delta(a, c, Completeness::Full), 0.0);
}

TEST(Budget, IdenticalDataMeasureZero) {
    auto g = make_grid(square_prism(), {9, 9}, 9);
    const auto data = extract(smooth_triple(g), Completeness::Full);
    const auto lines = budget_lines(data, data, Completeness::Full);
    EXPECT_FALSE(lines.empty());
    EXPECT_EQ(largest(lines), 0.0);
}

TEST(Budget, DeltaIsLargestLine) {
    auto g = line_grid(17, 17);
    const auto data = extract(smooth_triple(g), Completeness::Full);
    const auto noisy = inject_noise(data, {1e-3, 2});
    EXPECT_EQ(measure_delta(data, noisy, Completeness::Full), largest(budget_lines(data, noisy, Completeness::Full)));
}

TEST(Budget, IncompleteRejectsOffFaceDirichletDifference) {
    auto g = line_grid(17, 17);
    const auto a = extract(smooth_triple(g), Completeness::Incomplete);
    const auto b = extract(triple_from(
                               g, [](auto x, double t) { return x[0] * x[0] + 0.1 * std::sin(t + x[0]) + 1e-3; },
                               [](auto x, double t) { return 1.0 + 0.2 * std::cos(x[0] - t); }),
                           Completeness::Incomplete);
    try {
        budget_lines(a, b, Completeness::Incomplete);
        FAIL() << "expected a rejection";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("Gamma_1-"), std::string::npos) << e.what();
    }
}

TEST(CipIo, DirectoryRoundTrip) {
    auto g = make_grid(square_prism(), {9, 7}, 9);
    const auto data = inject_noise(extract(smooth_triple(g), Completeness::Incomplete), {1e-3, 3});
    const auto dir = std::filesystem::temp_directory_path() / "mfglab_cip_roundtrip";
    std::filesystem::remove_all(dir);
    write_cip(dir, data, {{"note", "roundtrip"}});
    const auto back = read_cip(dir);
    EXPECT_EQ(back.completeness, Completeness::Incomplete);
    EXPECT_EQ(measure_delta(data, back, Completeness::Incomplete), 0.0);
    std::filesystem::remove_all(dir);
}

TEST(CipNames, StringRoundTrips) {
    for (Completeness c : {Completeness::Full, Completeness::Incomplete})
        EXPECT_EQ(completeness_from_string(to_string(c)), c);
    for (NoiseProfile p : {NoiseProfile::WhitePerNode, NoiseProfile::SmoothLowMode})
        EXPECT_EQ(noise_profile_from_string(to_string(p)), p);
    EXPECT_THROW(completeness_from_string("partial"), Error);
    EXPECT_THROW(noise_profile_from_string("pink"), Error);
}

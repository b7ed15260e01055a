#include "support.hpp"

#include "mfglab/error.hpp"
#include "mfglab/io.hpp"
#include "mfglab/reports.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace mfglab;
using mfglab::support::square_prism;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("mfglab_io_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

Field wavy(GridPtr g) {
    return Field::sample(std::move(g), [](auto x, double t) { return std::exp(x[0]) * std::sin(3 * x[1]) / 7 + t; });
}

}  // namespace

TEST(Io, FormatDoubleRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(io::format_double(v)), v);
}

TEST(Io, GridJsonRoundTrip) {
    auto g = make_grid(square_prism(), {9, 7}, 11);
    const auto j = io::to_json(*g);
    EXPECT_TRUE(j.contains("prism"));
    auto back = io::grid_from_json(j);
    EXPECT_TRUE(*back == *g);
    EXPECT_DOUBLE_EQ(back->tau(), g->tau());
}

TEST(Io, FieldCsvRoundTripIsBitExact) {
    auto g = make_grid(square_prism(), {9, 7}, 11);
    const Field f = wavy(g);
    std::stringstream ss;
    io::write_csv(ss, f);
    const Field back = io::read_field_csv(ss, g);
    EXPECT_EQ((back - f).max_abs(), 0.0);
}

TEST(Io, SpaceFieldAndTraceRoundTrip) {
    auto g = make_grid(square_prism(), {9, 7}, 11);
    const Field f = wavy(g);
    const SpaceField s = f.level_field(4);
    std::stringstream ss;
    io::write_csv(ss, s);
    EXPECT_EQ((io::read_space_field_csv(ss, g) - s).max_abs(), 0.0);

    for (const auto& face : g->faces()) {
        const auto tr = trace(f, TraceKind::Neumann, face);
        std::stringstream ts;
        io::write_csv(ts, tr);
        EXPECT_EQ((io::read_trace_csv(ts, g, face) - tr).max_abs(), 0.0);
    }
}

TEST(Io, RejectsRowCountMismatch) {
    auto small = make_grid(square_prism(), {5, 5}, 5);
    auto big = make_grid(square_prism(), {7, 5}, 5);
    std::stringstream ss;
    io::write_csv(ss, Field::zeros(small));
    EXPECT_THROW(io::read_field_csv(ss, big), Error);
    std::stringstream empty;
    EXPECT_THROW(io::read_field_csv(empty, small), Error);
}

TEST(Io, TripleDirectoryRoundTrip) {
    auto g = make_grid(square_prism(), {9, 7}, 11);
    const MFGTriple t{wavy(g), Field::constant(g, 1.5), SpaceField::constant(g, 0.25)};
    const Field f = Field::constant(g, -0.5);
    const auto dir = scratch_dir("triple");
    io::write_triple(dir, t, f, {{"scheme", "implicit"}});
    for (const char* name : {"grid.json", "u.csv", "m.csv", "k.csv", "f.csv", "provenance.json"})
        EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
    const auto back = io::read_triple(dir);
    EXPECT_EQ((back.triple.u - t.u).max_abs(), 0.0);
    EXPECT_EQ((back.triple.m - t.m).max_abs(), 0.0);
    EXPECT_EQ((back.triple.k - t.k).max_abs(), 0.0);
    EXPECT_EQ((back.f - f).max_abs(), 0.0);
    EXPECT_EQ(io::read_json(dir / "provenance.json").at("scheme"), "implicit");
    std::filesystem::remove_all(dir);
}

TEST(Io, MissingFileIsAnError) {
    EXPECT_THROW(io::read_json(scratch_dir("absent") / "grid.json"), Error);
}

TEST(Reports, SweepCsvAndFit) {
    SweepReport r;
    r.rows.push_back({1e-3, 2e-3, 3e-3, {1, 2, 3}, {4, 5, 6}, 7e-6});
    r.fit_k = {1.0, 0.5, 0.99};
    r.excluded.push_back({0.0, "zero perturbation"});
    std::stringstream ss;
    io::write_csv(ss, r);
    std::string header, row;
    std::getline(ss, header);
    std::getline(ss, row);
    EXPECT_EQ(header, "scale,delta,err_k,err_u_s0,err_u_s1,err_u_s2,err_m_s0,err_m_s1,err_m_s2,err_k_reconstructed");
    EXPECT_EQ(row, "0.001,0.002,0.0030000000000000001,1,2,3,4,5,6,6.9999999999999999e-06");
    const auto fit = io::fit_json(r);
    EXPECT_EQ(fit.at("slope"), 1.0);
    EXPECT_EQ(fit.at("err_u").size(), 3u);
    EXPECT_EQ(fit.at("excluded")[0].at("message"), "zero perturbation");
}

TEST(Reports, NonFiniteValuesBecomeNull) {
    EXPECT_TRUE(io::to_json(LinearFit{std::nan(""), 0.0, 1.0}).at("slope").is_null());
    CarlemanTerms t;
    t.log_boundary = -INFINITY;
    EXPECT_TRUE(io::to_json(t).at("log_boundary").is_null());
}

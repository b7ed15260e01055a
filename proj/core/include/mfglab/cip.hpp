#pragma once

#include "mfglab/grid.hpp"
#include "mfglab/mfg.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mfglab {

/// Full: Dirichlet and Neumann data on every lateral face. Incomplete: Neumann
/// data on Gamma_1+ only.
enum class Completeness { Full, Incomplete };

std::string to_string(Completeness c);
Completeness completeness_from_string(const std::string& s);

/// Traces of one quantity on a set of faces, with their first two time derivatives.
struct TraceSet {
    std::array<std::vector<BoundaryTrace>, 3> order;  // order[s][k]: d^s/dt^s on the k-th face

    const std::vector<BoundaryTrace>& at(std::size_t s) const { return order.at(s); }
    /// nullptr when the face carries no data.
    const BoundaryTrace* find(std::size_t s, const Face& face) const;
};

/// Single-measurement data: snapshots at t0 = T/2 plus lateral Cauchy data.
struct CIPData {
    GridPtr grid;
    Completeness completeness = Completeness::Full;
    SpaceField u0;
    SpaceField m0;
    TraceSet g0;  // u, Dirichlet
    TraceSet g1;  // u, outward normal derivative
    TraceSet p0;  // m, Dirichlet
    TraceSet p1;  // m, outward normal derivative
};

/// Time derivatives are taken on the fields first, then traced.
CIPData extract(const MFGTriple& triple, Completeness completeness);

/// Largest sup-norm gap between the first and second time differences of the
/// s = 0 trace and the stored s = 1, 2 traces. Differencing commutes with
/// restriction, so extracted data agree to roundoff.
double trace_consistency(const CIPData& data);

enum class NoiseProfile { WhitePerNode, SmoothLowMode };

std::string to_string(NoiseProfile p);
NoiseProfile noise_profile_from_string(const std::string& s);

struct NoiseSpec {
    double delta = 0.0;
    std::uint64_t seed = 0;
    NoiseProfile profile = NoiseProfile::SmoothLowMode;
};

/// Adds noise to every component and rescales it so that each budget line of the
/// dataset's mode equals delta (1 - 1e-9) at its largest time order. delta = 0
/// returns the data unchanged.
CIPData inject_noise(const CIPData& data, const NoiseSpec& noise);

struct BudgetLine {
    std::string name;
    double value = 0.0;
};

/// Every norm line of the data budget evaluated on d1 - d2. Incomplete mode
/// rejects nonzero Dirichlet differences off Gamma_1+.
std::vector<BudgetLine> budget_lines(const CIPData& d1, const CIPData& d2, Completeness mode);

/// The experimental delta: the largest budget line.
double measure_delta(const CIPData& d1, const CIPData& d2, Completeness mode);

/// Directory layout: grid.json, manifest.json, u0.csv, m0.csv and one CSV per trace.
void write_cip(const std::filesystem::path& dir, const CIPData& data, const nlohmann::json& extra = {});
CIPData read_cip(const std::filesystem::path& dir);

}  // namespace mfglab

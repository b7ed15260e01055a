#include "mfglab/cip.hpp"

#include "mfglab/error.hpp"
#include "mfglab/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace mfglab {

std::string to_string(Completeness c) { return c == Completeness::Full ? "full" : "incomplete"; }

Completeness completeness_from_string(const std::string& s) {
    if (s == "full") return Completeness::Full;
    if (s == "incomplete") return Completeness::Incomplete;
    fail(ErrorKind::InvalidArgument, "unknown completeness '" + s + "' (expected full or incomplete)");
}

std::string to_string(NoiseProfile p) { return p == NoiseProfile::WhitePerNode ? "white-per-node" : "smooth-low-mode"; }

NoiseProfile noise_profile_from_string(const std::string& s) {
    if (s == "white-per-node") return NoiseProfile::WhitePerNode;
    if (s == "smooth-low-mode") return NoiseProfile::SmoothLowMode;
    fail(ErrorKind::InvalidArgument, "unknown noise profile '" + s + "'");
}

const BoundaryTrace* TraceSet::find(std::size_t s, const Face& face) const {
    for (const auto& tr : order.at(s))
        if (tr.face() == face) return &tr;
    return nullptr;
}

namespace {

TraceSet trace_set(const std::array<Field, 3>& parents, TraceKind kind, const std::vector<Face>& faces) {
    TraceSet set;
    for (std::size_t s = 0; s < 3; ++s)
        for (const auto& face : faces) set.order[s].push_back(trace(parents[s], kind, face));
    return set;
}

}  // namespace

CIPData extract(const MFGTriple& triple, Completeness completeness) {
    const Grid& g = triple.u.grid();
    require_same_grid(g, triple.m.grid(), "extract");
    const double t0 = 0.5 * g.T();
    const std::array<Field, 3> u{triple.u, d_dt(triple.u), d2_dt2(triple.u)};
    const std::array<Field, 3> m{triple.m, d_dt(triple.m), d2_dt2(triple.m)};
    const auto all = g.faces();
    const std::vector<Face> neumann = completeness == Completeness::Full ? all : std::vector<Face>{kGamma1Plus};
    return CIPData{triple.u.grid_ptr(),
                   completeness,
                   snapshot(triple.u, t0),
                   snapshot(triple.m, t0),
                   trace_set(u, TraceKind::Dirichlet, all),
                   trace_set(u, TraceKind::Neumann, neumann),
                   trace_set(m, TraceKind::Dirichlet, all),
                   trace_set(m, TraceKind::Neumann, neumann)};
}

double trace_consistency(const CIPData& data) {
    double worst = 0.0;
    const std::size_t time_axis = data.grid->dim();
    for (const TraceSet* set : {&data.g0, &data.g1, &data.p0, &data.p1}) {
        for (std::size_t k = 0; k < set->order[0].size(); ++k) {
            for (int s = 1; s <= 2; ++s) {
                auto gap = d_tangential(set->order[0][k], time_axis, s) - set->order[s][k];
                worst = std::max(worst, gap.max_abs());
            }
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Noise.

namespace {

constexpr std::size_t kLowModes = 5;
constexpr double kBudgetFill = 1.0 - 1e-9;

class Draws {
public:
    explicit Draws(std::uint64_t seed) : rng_(seed) {}
    /// Uniform in [-1, 1] from the raw engine bits, so results do not depend on
    /// the standard library's distribution implementations.
    double signed_unit() { return 2.0 * static_cast<double>(rng_() >> 11) * 0x1.0p-53 - 1.0; }
    double phase() { return std::numbers::pi * (signed_unit() + 1.0); }
    std::size_t wave(std::size_t below) { return static_cast<std::size_t>(rng_() % below); }

private:
    std::mt19937_64 rng_;
};

SpaceField space_noise(const GridPtr& grid, NoiseProfile profile, Draws& draws) {
    const Grid& g = *grid;
    std::vector<double> v(g.space_size());
    if (profile == NoiseProfile::WhitePerNode) {
        for (double& x : v) x = draws.signed_unit();
        return SpaceField(grid, std::move(v));
    }
    struct Mode {
        double amp, phase;
        std::vector<std::size_t> waves;
    };
    std::vector<Mode> modes;
    for (std::size_t k = 1; k <= kLowModes; ++k) {
        Mode m{draws.signed_unit(), draws.phase(), {k}};
        for (std::size_t ax = 1; ax < g.dim(); ++ax) m.waves.push_back(draws.wave(3));
        modes.push_back(std::move(m));
    }
    const Prism& p = g.prism();
    std::vector<double> x(g.dim());
    for (std::size_t s = 0; s < g.space_size(); ++s) {
        g.coords(s, x);
        double sum = 0.0;
        for (const auto& m : modes) {
            double term = m.amp * std::cos(m.waves[0] * std::numbers::pi * (x[0] - p.a) / p.length(0) + m.phase);
            for (std::size_t ax = 1; ax < g.dim(); ++ax)
                term *= std::cos(m.waves[ax] * std::numbers::pi * (x[ax] - p.lower(ax)) / p.length(ax));
            sum += term;
        }
        v[s] = sum;
    }
    return SpaceField(grid, std::move(v));
}

/// Noise on one face with its first two time derivatives.
std::array<BoundaryTrace, 3> trace_noise(const GridPtr& grid, const Face& face, NoiseProfile profile, Draws& draws) {
    const Grid& g = *grid;
    const auto nodes = g.face_nodes(face);
    const std::size_t count = nodes.size() * g.nt();
    if (profile == NoiseProfile::WhitePerNode) {
        std::vector<double> v(count);
        for (double& x : v) x = draws.signed_unit();
        BoundaryTrace n0(grid, face, std::move(v));
        auto n1 = d_tangential(n0, g.dim());
        auto n2 = d_tangential(n0, g.dim(), 2);
        return {std::move(n0), std::move(n1), std::move(n2)};
    }
    const auto tang = g.tangential_axes(face);
    struct Mode {
        double amp, phase;
        std::vector<std::size_t> waves;
    };
    std::vector<Mode> modes;
    for (std::size_t k = 1; k <= kLowModes; ++k) {
        Mode m{draws.signed_unit(), draws.phase(), {}};
        for (std::size_t j = 0; j < tang.size(); ++j) m.waves.push_back(draws.wave(3));
        modes.push_back(std::move(m));
    }
    const Prism& p = g.prism();
    const double T = g.T();
    std::array<std::vector<double>, 3> out;
    for (auto& o : out) o.reserve(count);
    std::vector<double> x(g.dim());
    for (std::size_t n = 0; n < g.nt(); ++n) {
        const double t = g.t(n);
        for (std::size_t s : nodes) {
            g.coords(s, x);
            double v0 = 0.0, v1 = 0.0, v2 = 0.0;
            for (std::size_t k = 0; k < modes.size(); ++k) {
                const auto& m = modes[k];
                double shape = m.amp;
                for (std::size_t j = 0; j < tang.size(); ++j) {
                    const std::size_t ax = tang[j];
                    shape *= std::cos(m.waves[j] * std::numbers::pi * (x[ax] - p.lower(ax)) / p.length(ax));
                }
                const double omega = static_cast<double>(k + 1) * std::numbers::pi / T;
                const double arg = omega * t + m.phase;
                v0 += shape * std::sin(arg);
                v1 += shape * omega * std::cos(arg);
                v2 -= shape * omega * omega * std::sin(arg);
            }
            out[0].push_back(v0);
            out[1].push_back(v1);
            out[2].push_back(v2);
        }
    }
    return {BoundaryTrace(grid, face, std::move(out[0])), BoundaryTrace(grid, face, std::move(out[1])),
            BoundaryTrace(grid, face, std::move(out[2]))};
}

double trace_norm_sq(std::span<const BoundaryTrace> traces, TraceKind kind) {
    return kind == TraceKind::Dirichlet ? h21_sq(traces) : h10_sq(traces);
}

void perturb_set(TraceSet& set, TraceKind kind, bool only_gamma1_plus, const CIPData& data, const NoiseSpec& noise,
                 Draws& draws) {
    std::vector<std::size_t> targets;
    for (std::size_t k = 0; k < set.order[0].size(); ++k)
        if (!only_gamma1_plus || set.order[0][k].face() == kGamma1Plus) targets.push_back(k);
    if (targets.empty()) return;

    std::array<std::vector<BoundaryTrace>, 3> eta;
    for (std::size_t k : targets) {
        auto n = trace_noise(data.grid, set.order[0][k].face(), noise.profile, draws);
        for (std::size_t s = 0; s < 3; ++s) eta[s].push_back(std::move(n[s]));
    }
    double largest = 0.0;
    for (const auto& e : eta) largest = std::max(largest, trace_norm_sq(e, kind));
    if (largest <= 0.0) return;
    const double scale = noise.delta * kBudgetFill / std::sqrt(largest);
    for (std::size_t s = 0; s < 3; ++s)
        for (std::size_t j = 0; j < targets.size(); ++j)
            set.order[s][targets[j]] = set.order[s][targets[j]] + scale * eta[s][j];
}

}  // namespace

CIPData inject_noise(const CIPData& data, const NoiseSpec& noise) {
    require(noise.delta >= 0.0 && std::isfinite(noise.delta), "noise: delta must be finite and >= 0");
    CIPData out = data;
    if (noise.delta == 0.0) return out;

    Draws draws(noise.seed);
    const bool incomplete = data.completeness == Completeness::Incomplete;
    const double target = noise.delta * kBudgetFill;

    auto nu = space_noise(data.grid, noise.profile, draws);
    const double nu_norm = std::sqrt(incomplete ? h2_sq(nu) : h1_sq(nu));
    out.u0 = data.u0 + (target / nu_norm) * nu;
    auto nm = space_noise(data.grid, noise.profile, draws);
    out.m0 = data.m0 + (target / std::sqrt(h1_sq(nm))) * nm;

    perturb_set(out.g0, TraceKind::Dirichlet, incomplete, data, noise, draws);
    perturb_set(out.g1, TraceKind::Neumann, false, data, noise, draws);
    perturb_set(out.p0, TraceKind::Dirichlet, incomplete, data, noise, draws);
    perturb_set(out.p1, TraceKind::Neumann, false, data, noise, draws);
    return out;
}

// ---------------------------------------------------------------------------
// Budget.

namespace {

constexpr double kOffFaceTolerance = 1e-12;

std::vector<BoundaryTrace> differences(const TraceSet& a, const TraceSet& b, std::size_t s,
                                       const std::vector<Face>& faces, const char* name) {
    std::vector<BoundaryTrace> out;
    for (const auto& face : faces) {
        const auto* x = a.find(s, face);
        const auto* y = b.find(s, face);
        require(x && y, std::string("measure_delta: ") + name + " has no data on " + to_string(face));
        out.push_back(*x - *y);
    }
    return out;
}

}  // namespace

std::vector<BudgetLine> budget_lines(const CIPData& d1, const CIPData& d2, Completeness mode) {
    require_same_grid(*d1.grid, *d2.grid, "measure_delta");
    const Grid& g = *d1.grid;
    const bool incomplete = mode == Completeness::Incomplete;
    std::vector<BudgetLine> lines;

    const auto du = d1.u0 - d2.u0;
    lines.push_back({incomplete ? "u0 H2" : "u0 H1", std::sqrt(incomplete ? h2_sq(du) : h1_sq(du))});
    lines.push_back({"m0 H1", std::sqrt(h1_sq(d1.m0 - d2.m0))});

    const std::vector<Face> faces = incomplete ? std::vector<Face>{kGamma1Plus} : g.faces();
    if (incomplete) {
        for (const auto* name : {"g0", "p0"}) {
            const TraceSet& a = name[0] == 'g' ? d1.g0 : d1.p0;
            const TraceSet& b = name[0] == 'g' ? d2.g0 : d2.p0;
            for (const auto& face : g.faces()) {
                if (face == kGamma1Plus) continue;
                for (std::size_t s = 0; s < 3; ++s) {
                    const auto* x = a.find(s, face);
                    const auto* y = b.find(s, face);
                    if (!x || !y) continue;
                    const double gap = (*x - *y).max_abs();
                    if (gap > kOffFaceTolerance) {
                        std::ostringstream os;
                        os << "measure_delta: incomplete data require zero Dirichlet difference off Gamma_1+, but "
                           << name << " differs by " << gap << " on " << to_string(face);
                        fail(ErrorKind::InvalidArgument, os.str());
                    }
                }
            }
        }
    }

    struct Component {
        const char* name;
        const TraceSet& a;
        const TraceSet& b;
        TraceKind kind;
    };
    const Component components[] = {{"g0", d1.g0, d2.g0, TraceKind::Dirichlet},
                                    {"g1", d1.g1, d2.g1, TraceKind::Neumann},
                                    {"p0", d1.p0, d2.p0, TraceKind::Dirichlet},
                                    {"p1", d1.p1, d2.p1, TraceKind::Neumann}};
    for (const auto& c : components) {
        for (std::size_t s = 0; s < 3; ++s) {
            auto diff = differences(c.a, c.b, s, faces, c.name);
            std::ostringstream name;
            name << c.name << " s=" << s << (c.kind == TraceKind::Dirichlet ? " H21" : " H10");
            lines.push_back({name.str(), std::sqrt(trace_norm_sq(diff, c.kind))});
        }
    }
    return lines;
}

double measure_delta(const CIPData& d1, const CIPData& d2, Completeness mode) {
    double delta = 0.0;
    for (const auto& line : budget_lines(d1, d2, mode)) delta = std::max(delta, line.value);
    return delta;
}

// ---------------------------------------------------------------------------
// Directory format.

namespace {

std::string face_tag(const Face& f) { return "x" + std::to_string(f.axis + 1) + (f.side == Side::Upper ? "p" : "m"); }

std::string trace_file(const char* set, std::size_t s, const Face& f) {
    return std::string(set) + "_s" + std::to_string(s) + "_" + face_tag(f) + ".csv";
}

nlohmann::json face_json(const Face& f) { return {{"axis", f.axis}, {"side", f.side == Side::Upper ? "+" : "-"}}; }

Face face_from_json(const nlohmann::json& j) {
    return {j.at("axis").get<std::size_t>(), j.at("side").get<std::string>() == "+" ? Side::Upper : Side::Lower};
}

}  // namespace

void write_cip(const std::filesystem::path& dir, const CIPData& data, const nlohmann::json& extra) {
    io::write_json(dir / "grid.json", io::to_json(*data.grid));
    io::write_csv_file(dir / "u0.csv", data.u0);
    io::write_csv_file(dir / "m0.csv", data.m0);
    nlohmann::json sets = nlohmann::json::object();
    const std::pair<const char*, const TraceSet*> named[] = {
        {"g0", &data.g0}, {"g1", &data.g1}, {"p0", &data.p0}, {"p1", &data.p1}};
    for (const auto& [name, set] : named) {
        nlohmann::json faces = nlohmann::json::array();
        for (const auto& tr : set->order[0]) faces.push_back(face_json(tr.face()));
        sets[name] = faces;
        for (std::size_t s = 0; s < 3; ++s)
            for (const auto& tr : set->order[s]) io::write_csv_file(dir / trace_file(name, s, tr.face()), tr);
    }
    nlohmann::json manifest{{"mode", to_string(data.completeness)}, {"t0", 0.5 * data.grid->T()}, {"faces", sets}};
    if (!extra.is_null()) manifest["provenance"] = extra;
    io::write_json(dir / "manifest.json", manifest);
}

CIPData read_cip(const std::filesystem::path& dir) {
    auto grid = io::grid_from_json(io::read_json(dir / "grid.json"));
    const auto manifest = io::read_json(dir / "manifest.json");
    auto open = [&](const std::string& file) {
        std::ifstream is(dir / file);
        if (!is) fail(ErrorKind::InvalidArgument, "cip: missing " + (dir / file).string());
        return is;
    };
    auto read_set = [&](const char* name) {
        TraceSet set;
        for (const auto& fj : manifest.at("faces").at(name)) {
            const Face face = face_from_json(fj);
            for (std::size_t s = 0; s < 3; ++s) {
                auto is = open(trace_file(name, s, face));
                set.order[s].push_back(io::read_trace_csv(is, grid, face));
            }
        }
        return set;
    };
    auto u0_is = open("u0.csv");
    auto m0_is = open("m0.csv");
    auto u0 = io::read_space_field_csv(u0_is, grid);
    auto m0 = io::read_space_field_csv(m0_is, grid);
    return CIPData{grid,
                   completeness_from_string(manifest.at("mode").get<std::string>()),
                   std::move(u0),
                   std::move(m0),
                   read_set("g0"),
                   read_set("g1"),
                   read_set("p0"),
                   read_set("p1")};
}

}  // namespace mfglab

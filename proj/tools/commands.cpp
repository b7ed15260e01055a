#include "commands.hpp"

#include "mfglab/error.hpp"
#include "mfglab/io.hpp"
#include "mfglab/reports.hpp"
#include "mfglab/scenarios.hpp"
#include "mfglab/stability.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

namespace mfglab::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";
constexpr std::uint64_t kFubiniSeeds = 10;

json provenance(const RunContext& ctx) {
    return {{"tool", "mfglab"}, {"version", kVersion}, {"command", ctx.command}, {"config", to_json(ctx.config)}};
}

fs::path prepare_out(const RunContext& ctx) {
    const fs::path dir = ctx.config.out;
    fs::create_directories(dir);
    io::write_json(dir / "provenance.json", provenance(ctx));
    return dir;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
void write_text(const fs::path& path, const T& value) {
    std::ostringstream os;
    io::write_csv(os, value);
    io::write_file(path, os.str());
}

void write_history(const fs::path& path, const std::vector<double>& history) {
    std::ostringstream os;
    os << "iteration,update\n";
    for (std::size_t i = 0; i < history.size(); ++i) os << i + 1 << ',' << io::format_double(history[i]) << '\n';
    io::write_file(path, os.str());
}

Manufactured default_manufactured(const Kernel& kernel, const GridPtr& grid) {
    return manufacture_triple(grid, kernel, scenarios::default_coefficient(grid), scenarios::default_value(),
                              scenarios::default_density(grid));
}

// Exact rationals for values with at most nine decimals.
std::optional<Ratio> as_ratio(double v) {
    long long den = 1;
    for (int k = 0; k <= 9; ++k, den *= 10) {
        const double num = v * static_cast<double>(den);
        if (std::abs(num - std::round(num)) < 1e-9 * std::max(1.0, std::abs(num)))
            return Ratio{std::llround(num), den};
    }
    return std::nullopt;
}

json params_json(const ExperimentConfig& c) {
    const auto p = select_parameters(c.rho, c.epsilon, c.prism, c.lambda1);
    json j = io::to_json(p);
    j["epsilon_window"] = {epsilon_window_lower(c.rho, c.prism.T), 0.5 * c.prism.T};
    const auto rho = as_ratio(c.rho), eps = as_ratio(c.epsilon), T = as_ratio(c.prism.T), b = as_ratio(c.prism.b),
               l1 = as_ratio(c.lambda1);
    if (rho && eps && T && b && l1) {
        const auto e = select_parameters_exact(*rho, *eps, *T, *b, *l1);
        j["exact"] = {{"s", e.s}, {"beta", e.beta}, {"alpha", e.alpha}, {"d", e.d}, {"log_delta0", e.log_delta0}};
    }
    return j;
}

}  // namespace

int cmd_forward(const RunContext& ctx) {
    const auto& c = ctx.config;
    const auto grid = make_config_grid(c);
    // Source and boundary data of the interaction-free scenario; the configured
    // kernel and coupling then act on top of it.
    const auto made = default_manufactured(Kernel::none(), grid);
    ProblemSpec spec = made.spec;
    spec.kernel = c.kernel;
    spec.f = c.coupling * made.f;
    const SpaceField k = scenarios::default_coefficient(grid) + c.perturbation * scenarios::coefficient_perturbation(grid);
    const fs::path dir = prepare_out(ctx);
    try {
        const auto report = solve_mfg_picard(spec, k, c.solver);
        json prov = provenance(ctx);
        prov["history"] = report.history;
        io::write_triple(dir / "triple", report.triple, spec.f, prov);
        write_history(dir / "history.csv", report.history);
        io::write_json(dir / "report.json",
                       {{"converged", true}, {"iterations", report.iterations}, {"decoupled", report.decoupled}});
        std::printf("converged in %zu Picard iteration(s)%s\n", report.iterations,
                    report.decoupled ? " (decoupled)" : "");
        return kOk;
    } catch (const NonConvergenceError& e) {
        write_history(dir / "history.csv", e.history());
        io::write_json(dir / "report.json",
                       {{"converged", false}, {"iterations", e.history().size()}, {"message", e.what()}});
        std::fprintf(stderr, "non-convergence: %s\n", e.what());
        return kNonConvergence;
    }
}

int cmd_manufacture(const RunContext& ctx) {
    const auto& c = ctx.config;
    const auto grid = make_config_grid(c);
    const auto made = default_manufactured(c.kernel, grid);
    const fs::path dir = prepare_out(ctx);
    io::write_triple(dir / "triple", made.triple, made.f, provenance(ctx));
    json res;
    for (auto [name, eq] : {std::pair{"hjb", Equation::Hjb}, std::pair{"fp", Equation::Fp}}) {
        const auto r = residual(made.triple, made.spec, eq);
        res[name] = {{"l2", r.l2}, {"max", r.max}};
    }
    const auto bounds = triple_bounds(made.triple);
    res["bounds"] = {{"n2", bounds.n2}, {"n3", bounds.n3}, {"c", bounds.c}};
    io::write_json(dir / "residuals.json", res);
    std::printf("residual L2: hjb %.3e, fp %.3e\n", res["hjb"]["l2"].get<double>(), res["fp"]["l2"].get<double>());
    return kOk;
}

int cmd_carleman(const RunContext& ctx) {
    const auto& c = ctx.config;
    const auto grid = make_config_grid(c);
    const double alpha = carleman_alpha(c);
    const auto family =
        test_family(c.prism, c.members, c.seed, c.restricted ? FamilyKind::Restricted : FamilyKind::General);
    const auto sweep = carleman_family_sweep(family, grid, c.sign, alpha, c.lambdas, c.restricted);
    const fs::path dir = prepare_out(ctx);
    write_text(dir / "carleman.csv", sweep);
    json labels = json::array();
    for (const auto& f : family) labels.push_back(f.label);
    io::write_json(dir / "carleman.json", {{"alpha", alpha},
                                           {"c0", number(sweep.c0)},
                                           {"lambda0", sweep.lambda0 ? json(*sweep.lambda0) : json(nullptr)},
                                           {"all_pass", sweep.all_pass},
                                           {"restricted", c.restricted},
                                           {"decays", CarlemanParams{c.lambdas.front(), alpha}.decays(c.prism)},
                                           {"members", labels}});
    std::printf("C0 = %.6g, lambda0 = %s, all rows pass: %s\n", sweep.c0,
                sweep.lambda0 ? io::format_double(*sweep.lambda0).c_str() : "none", sweep.all_pass ? "yes" : "no");
    return kOk;
}

int cmd_lemmas(const RunContext& ctx) {
    const auto& c = ctx.config;
    const auto grid = make_config_grid(c);
    const double alpha = carleman_alpha(c);
    const Kernel separable = Kernel::separable_delta(Profile::cosine_product());
    const Kernel causal = Kernel::heaviside_causal(Profile::cosine_product());
    const auto family = test_family(c.prism, c.lemma_members, c.seed);

    const fs::path dir = prepare_out(ctx);
    json summary;
    for (auto [which, kernel] : {std::pair{Lemma::TimeIntegral, (const Kernel*)nullptr},
                                 std::pair{Lemma::SeparableKernel, &separable}, std::pair{Lemma::CausalKernel, &causal}}) {
        std::vector<LemmaReport> reports;
        json rows = json::array();
        for (const auto& h : family) {
            reports.push_back(verify_lemma(which, h.sample(grid), kernel, alpha, c.lemma_lambdas));
            rows.push_back(io::to_json(reports.back()));
        }
        const std::string name = to_string(which);
        write_text(dir / ("lemma_" + name + ".csv"), std::span<const LemmaReport>(reports));
        summary[name] = rows;
    }
    double fubini = 0.0;
    for (std::uint64_t s = 0; s < kFubiniSeeds; ++s)
        fubini = std::max(fubini, fubini_swap_residual(random_swap_integrand(c.seed + s), c.prism.a, c.prism.b));
    summary["fubini_residual"] = fubini;
    io::write_json(dir / "lemmas.json", summary);
    std::printf("wrote %s (Fubini residual %.2e)\n", (dir / "lemmas.json").string().c_str(), fubini);
    return kOk;
}

int cmd_params(const RunContext& ctx) {
    const json j = params_json(ctx.config);
    std::cout << j.dump(2) << '\n';
    if (!ctx.params_only) {
        const fs::path dir = prepare_out(ctx);
        io::write_json(dir / "params.json", j);
    }
    return kOk;
}

int cmd_sweep(const RunContext& ctx) {
    const auto& c = ctx.config;
    if (ctx.params_only) return cmd_params(ctx);
    auto setup = default_sweep(make_config_grid(c));
    setup.kernel = c.kernel;
    setup.solver = c.solver;
    setup.completeness = c.completeness;
    setup.rho = c.rho;
    setup.epsilon = c.epsilon;
    setup.lambda1 = c.lambda1;
    setup.c = c.guard_c;
    setup.padding = c.padding;
    if (!c.scales.empty()) setup.scales = c.scales;
    setup.noise = c.noise;

    const auto report = holder_sweep(setup);
    const fs::path dir = prepare_out(ctx);
    write_text(dir / "sweep.csv", report);
    io::write_json(dir / "fit.json", io::fit_json(report));
    io::write_json(dir / "params.json", params_json(c));
    for (const auto& e : report.excluded) std::fprintf(stderr, "excluded scale %g: %s\n", e.scale, e.message.c_str());
    if (report.rows.size() < 2) {
        std::fprintf(stderr, "sweep: fewer than two scales produced a data point\n");
        return kNonConvergence;
    }
    std::printf("slope of ||k1 - k2|| vs delta: %.4f (r2 %.6f), %zu of %zu scales\n", report.fit_k.slope,
                report.fit_k.r2, report.rows.size(), setup.scales.size());
    return kOk;
}

}  // namespace mfglab::cli

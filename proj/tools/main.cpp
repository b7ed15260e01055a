#include "commands.hpp"
#include "config.hpp"

#include "mfglab/error.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <map>

using namespace mfglab;
using namespace mfglab::cli;

namespace {

int exit_code(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::NonConvergence: return kNonConvergence;
        case ErrorKind::NumericRange: return kNumericRange;
        case ErrorKind::InvalidArgument:
        case ErrorKind::GridMismatch: return kConfigError;
    }
    return kConfigError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mfglab: mean field game inverse-problem lab"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out;
    std::optional<double> rho, epsilon;
    std::optional<std::uint64_t> seed;
    std::vector<double> lambda_grid;
    bool params_only = false;
    app.add_option("--config", config_path, "JSON experiment config (a provenance.json also works)");
    app.add_option("--out", out, "output directory");
    app.add_option("--rho", rho, "Hoelder exponent parameter, in (0, 1)");
    app.add_option("--epsilon", epsilon, "truncation of the time window, in ((T/2)(1 - sqrt(rho)), T/2)");
    app.add_option("--lambda-grid", lambda_grid, "comma separated Carleman lambdas")->delimiter(',');
    app.add_option("--seed", seed, "seed for the test family and measurement noise");
    app.add_flag("--params-only", params_only, "print the stability parameters without solving");

    const std::map<std::string, std::pair<const char*, std::function<int(const RunContext&)>>> commands{
        {"forward", {"solve the coupled system for the default scenario", cmd_forward}},
        {"manufacture", {"build a manufactured triple and report its residuals", cmd_manufacture}},
        {"carleman", {"evaluate the Carleman estimate over the seeded family", cmd_carleman}},
        {"lemmas", {"check the weighted integral lemmas", cmd_lemmas}},
        {"sweep", {"run the Hoelder stability sweep", cmd_sweep}},
        {"params", {"print the stability parameters", cmd_params}},
    };
    for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    RunContext ctx;
    ctx.command = app.get_subcommands().front()->get_name();
    ctx.params_only = params_only;
    try {
        if (!config_path.empty()) ctx.config = load_config(config_path);
        if (!out.empty()) ctx.config.out = out;
        if (rho) ctx.config.rho = *rho;
        if (epsilon) ctx.config.epsilon = *epsilon;
        if (!lambda_grid.empty()) ctx.config.lambdas = lambda_grid;
        if (seed) ctx.config.seed = ctx.config.noise.seed = *seed;
        validate(ctx.config);
        return commands.at(ctx.command).second(ctx);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kConfigError;
    }
}

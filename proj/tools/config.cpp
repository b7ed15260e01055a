#include "config.hpp"

#include "mfglab/error.hpp"
#include "mfglab/io.hpp"
#include "mfglab/stability.hpp"

#include <fstream>

namespace mfglab::cli {

namespace {

using nlohmann::json;

// Reads j[key] into out when present, naming the dotted key on a type error.
template <class T>
void read(const json& j, const char* key, T& out, const std::string& prefix) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(prefix + key, e.what());
    }
}

// Runs f, turning library precondition failures into a ConfigError on `key`.
template <class F>
auto checked(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::NumericRange) throw;
        throw ConfigError(key, e.what());
    } catch (const json::exception& e) {
        throw ConfigError(key, e.what());
    }
}

const char* to_string(TimeScheme s) { return s == TimeScheme::Implicit ? "implicit" : "explicit"; }

TimeScheme scheme_from_string(const std::string& s) {
    if (s == "implicit") return TimeScheme::Implicit;
    if (s == "explicit") return TimeScheme::Explicit;
    throw ConfigError("solver.scheme", "expected implicit or explicit, got '" + s + "'");
}

}  // namespace

ExperimentConfig config_from_json(const json& in) {
    const json& j = in.contains("config") && in.at("config").is_object() ? in.at("config") : in;
    ExperimentConfig c;
    if (j.contains("prism")) c.prism = checked("prism", [&] { return io::prism_from_json(j.at("prism")); });
    if (j.contains("grid")) {
        read(j.at("grid"), "nx", c.nx, "grid.");
        read(j.at("grid"), "nt", c.nt, "grid.");
    }
    if (j.contains("kernel")) c.kernel = checked("kernel", [&] { return kernel_from_json(j.at("kernel")); });
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        std::string scheme = to_string(c.solver.scheme);
        read(s, "scheme", scheme, "solver.");
        c.solver.scheme = scheme_from_string(scheme);
        read(s, "theta", c.solver.damping, "solver.");
        read(s, "tol", c.solver.tol, "solver.");
        read(s, "max_iter", c.solver.max_iter, "solver.");
    }
    if (j.contains("forward")) {
        read(j.at("forward"), "coupling", c.coupling, "forward.");
        read(j.at("forward"), "perturbation", c.perturbation, "forward.");
    }
    if (j.contains("stability")) {
        const json& s = j.at("stability");
        const std::string p = "stability.";
        read(s, "rho", c.rho, p);
        read(s, "epsilon", c.epsilon, p);
        read(s, "lambda1", c.lambda1, p);
        read(s, "guard_c", c.guard_c, p);
        read(s, "padding", c.padding, p);
        read(s, "scales", c.scales, p);
        std::string mode = mfglab::to_string(c.completeness);
        read(s, "completeness", mode, p);
        c.completeness = checked("stability.completeness", [&] { return completeness_from_string(mode); });
        if (s.contains("noise")) {
            const json& n = s.at("noise");
            read(n, "delta", c.noise.delta, "stability.noise.");
            read(n, "seed", c.noise.seed, "stability.noise.");
            std::string profile = mfglab::to_string(c.noise.profile);
            read(n, "profile", profile, "stability.noise.");
            c.noise.profile = checked("stability.noise.profile", [&] { return noise_profile_from_string(profile); });
        }
    }
    if (j.contains("carleman")) {
        const json& s = j.at("carleman");
        const std::string p = "carleman.";
        read(s, "lambdas", c.lambdas, p);
        if (s.contains("alpha") && !s.at("alpha").is_null()) {
            double a = 0.0;
            read(s, "alpha", a, p);
            c.alpha = a;
        }
        read(s, "members", c.members, p);
        read(s, "seed", c.seed, p);
        read(s, "restricted", c.restricted, p);
        std::string sign = c.sign == OperatorSign::Plus ? "plus" : "minus";
        read(s, "sign", sign, p);
        if (sign != "plus" && sign != "minus") throw ConfigError("carleman.sign", "expected plus or minus");
        c.sign = sign == "plus" ? OperatorSign::Plus : OperatorSign::Minus;
    }
    if (j.contains("lemmas")) {
        read(j.at("lemmas"), "lambdas", c.lemma_lambdas, "lemmas.");
        read(j.at("lemmas"), "members", c.lemma_members, "lemmas.");
    }
    if (j.contains("out")) {
        std::string out;
        read(j, "out", out, "");
        c.out = out;
    }
    return c;
}

json to_json(const ExperimentConfig& c) {
    return {
        {"prism", io::to_json(c.prism)},
        {"grid", {{"nx", c.nx}, {"nt", c.nt}}},
        {"kernel", mfglab::to_json(c.kernel)},
        {"solver",
         {{"scheme", to_string(c.solver.scheme)},
          {"theta", c.solver.damping},
          {"tol", c.solver.tol},
          {"max_iter", c.solver.max_iter}}},
        {"forward", {{"coupling", c.coupling}, {"perturbation", c.perturbation}}},
        {"stability",
         {{"rho", c.rho},
          {"epsilon", c.epsilon},
          {"lambda1", c.lambda1},
          {"guard_c", c.guard_c},
          {"padding", c.padding},
          {"scales", c.scales.empty() ? default_scales() : c.scales},
          {"completeness", mfglab::to_string(c.completeness)},
          {"noise",
           {{"delta", c.noise.delta}, {"seed", c.noise.seed}, {"profile", mfglab::to_string(c.noise.profile)}}}}},
        {"carleman",
         {{"lambdas", c.lambdas},
          {"alpha", c.alpha ? json(*c.alpha) : json(nullptr)},
          {"members", c.members},
          {"seed", c.seed},
          {"restricted", c.restricted},
          {"sign", c.sign == OperatorSign::Plus ? "plus" : "minus"}}},
        {"lemmas", {{"lambdas", c.lemma_lambdas}, {"members", c.lemma_members}}},
        {"out", c.out.string()},
    };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("--config", "cannot open " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError("--config", e.what());
    }
    return config_from_json(j);
}

GridPtr make_config_grid(const ExperimentConfig& c) {
    return checked("grid", [&] { return make_grid(c.prism, c.nx, c.nt); });
}

double carleman_alpha(const ExperimentConfig& c) {
    if (c.alpha) return *c.alpha;
    return select_parameters(c.rho, c.epsilon, c.prism, c.lambda1).alpha;
}

void validate(const ExperimentConfig& c) {
    checked("prism", [&] {
        c.prism.validate();
        return 0;
    });
    if (c.nx.size() != c.prism.dim()) throw ConfigError("grid.nx", "needs one count per spatial axis");
    const auto grid = make_config_grid(c);
    if (grid->nt() % 2 == 0) throw ConfigError("grid.nt", "must be odd so that T/2 is a time level");
    if (!(c.solver.damping > 0.0 && c.solver.damping <= 1.0)) throw ConfigError("solver.theta", "must lie in (0, 1]");
    if (!(c.solver.tol > 0.0)) throw ConfigError("solver.tol", "must be positive");
    if (c.solver.max_iter == 0) throw ConfigError("solver.max_iter", "must be at least 1");
    checked("stability.epsilon", [&] { return select_parameters(c.rho, c.epsilon, c.prism, c.lambda1); });
    checked("stability.epsilon", [&] { return snap_epsilon(*grid, c.epsilon); });
    if (!(c.guard_c > 0.0)) throw ConfigError("stability.guard_c", "must be positive");
    if (!(c.padding >= 0.0)) throw ConfigError("stability.padding", "must be non-negative");
    for (double s : c.scales)
        if (!std::isfinite(s) || s < 0.0) throw ConfigError("stability.scales", "scales must be finite and >= 0");
    if (!(c.noise.delta >= 0.0)) throw ConfigError("stability.noise.delta", "must be non-negative");
    if (c.lambdas.empty()) throw ConfigError("carleman.lambdas", "needs at least one lambda");
    if (c.alpha && !(*c.alpha > 0.0)) throw ConfigError("carleman.alpha", "must be positive");
    if (c.members == 0) throw ConfigError("carleman.members", "must be at least 1");
    if (c.lemma_lambdas.size() < 2) throw ConfigError("lemmas.lambdas", "needs at least two lambdas for a slope");
    if (c.lemma_members == 0) throw ConfigError("lemmas.members", "must be at least 1");
    // Representable-range guard: exits 3 rather than 1.
    for (const auto* set : {&c.lambdas, &c.lemma_lambdas})
        for (double lambda : *set) checked("carleman.lambdas", [&] {
                CarlemanParams{lambda, carleman_alpha(c)}.validate();
                return 0;
            });
    if (c.out.empty()) throw ConfigError("out", "output directory is required");
}

}  // namespace mfglab::cli

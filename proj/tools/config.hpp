#pragma once

#include "mfglab/carleman.hpp"
#include "mfglab/cip.hpp"
#include "mfglab/grid.hpp"
#include "mfglab/kernels.hpp"
#include "mfglab/mfg.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mfglab::cli {

/// A rejected configuration key; the runner exits with status 1.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

struct ExperimentConfig {
    Prism prism{1.0, 2.0, {}, 1.0};
    std::vector<std::size_t> nx{129};
    std::size_t nt = 321;
    Kernel kernel = Kernel::none();
    SolverOptions solver{};

    // forward / manufacture
    double coupling = 1.0;      // multiplies the manufactured source f
    double perturbation = 0.0;  // k = k1 + perturbation * dk

    // stability
    double rho = 0.5;
    double epsilon = 0.2;
    double lambda1 = 1.0;
    double guard_c = 0.5;
    double padding = 0.25;
    std::vector<double> scales;  // empty: six geometric scales in [1e-4, 1e-1]
    Completeness completeness = Completeness::Full;
    NoiseSpec noise{};

    // carleman
    std::vector<double> lambdas{2.0, 4.0, 8.0, 16.0};
    std::optional<double> alpha;  // default: from the stability parameters
    std::size_t members = 20;
    std::uint64_t seed = kFamilySeed;
    bool restricted = false;
    OperatorSign sign = OperatorSign::Plus;

    // lemmas
    std::vector<double> lemma_lambdas{1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
    std::size_t lemma_members = 10;

    std::filesystem::path out = "mfglab-out";
};

/// Keys absent from the JSON keep their defaults. A provenance.json written by
/// the runner is accepted too (its "config" member is read).
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks every field against the preconditions of the module that owns it.
/// Throws ConfigError naming the key.
void validate(const ExperimentConfig& c);

GridPtr make_config_grid(const ExperimentConfig& c);

/// Effective alpha for the Carleman weight.
double carleman_alpha(const ExperimentConfig& c);

}  // namespace mfglab::cli

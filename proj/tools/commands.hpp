#pragma once

#include "config.hpp"

#include <string>

namespace mfglab::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNonConvergence = 2, kNumericRange = 3 };

struct RunContext {
    std::string command;
    ExperimentConfig config;
    bool params_only = false;
};

int cmd_forward(const RunContext& ctx);
int cmd_manufacture(const RunContext& ctx);
int cmd_carleman(const RunContext& ctx);
int cmd_lemmas(const RunContext& ctx);
int cmd_sweep(const RunContext& ctx);
int cmd_params(const RunContext& ctx);

}  // namespace mfglab::cli

#pragma once

#include "mfglab/carleman.hpp"
#include "mfglab/numerics.hpp"
#include "mfglab/stability.hpp"

#include <iosfwd>
#include <span>

#include <nlohmann/json.hpp>

namespace mfglab::io {

nlohmann::json to_json(const CarlemanTerms& terms);
nlohmann::json to_json(const CarlemanReport& report);
nlohmann::json to_json(const LinearFit& fit);
nlohmann::json to_json(const StabilityParams& params);
nlohmann::json to_json(const LemmaReport& report);

/// Columns: member, lambda, lhs, main, boundary, negligible, log_scale, pass.
/// lhs, main, boundary and negligible are divided by exp(log_scale).
void write_csv(std::ostream& os, const FamilySweep& sweep);
/// One row per (member, lambda). Columns: member, lambda, ratio, scaled_ratio
/// (empty for the kernel lemmas).
void write_csv(std::ostream& os, std::span<const LemmaReport> members);
/// Columns: scale, delta, err_k, err_u_s0..s2, err_m_s0..s2, err_k_reconstructed.
void write_csv(std::ostream& os, const SweepReport& report);

/// fit_k plus the per-order fits and excluded scales.
nlohmann::json fit_json(const SweepReport& report);

}  // namespace mfglab::io

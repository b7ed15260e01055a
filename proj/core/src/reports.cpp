#include "mfglab/reports.hpp"

#include "mfglab/io.hpp"

#include <cmath>
#include <ostream>

namespace mfglab::io {

namespace {

// JSON has no infinities or NaN; they become null.
nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const CarlemanTerms& t) {
    return {{"lambda", t.lambda},          {"log_scale", t.log_scale},
            {"lhs", t.lhs},                {"main", t.main},
            {"boundary", t.boundary},      {"negligible", t.negligible},
            {"log_lhs", number(t.log_lhs)}, {"log_main", number(t.log_main)},
            {"log_boundary", number(t.log_boundary)}, {"log_negligible", number(t.log_negligible)}};
}

nlohmann::json to_json(const CarlemanReport& r) {
    return {{"terms", to_json(r.terms)}, {"c0", r.c0}, {"pass", r.pass}};
}

nlohmann::json to_json(const LinearFit& fit) {
    return {{"slope", number(fit.slope)}, {"intercept", number(fit.intercept)}, {"r2", number(fit.r2)}};
}

nlohmann::json to_json(const StabilityParams& p) {
    return {{"rho", p.rho},     {"epsilon", p.epsilon}, {"T", p.T},         {"a", p.a},
            {"b", p.b},         {"lambda1", p.lambda1}, {"s", p.s},         {"beta", p.beta},
            {"alpha", p.alpha}, {"d", p.d},             {"delta0", p.delta0}, {"log_delta0", p.log_delta0}};
}

nlohmann::json to_json(const LemmaReport& r) {
    nlohmann::json j{{"lemma", to_string(r.which)},
                     {"max_over_min", number(r.max_over_min)},
                     {"empirical_constant", number(r.empirical_constant)},
                     {"degenerate", r.degenerate},
                     {"pass", r.pass}};
    if (r.which == Lemma::TimeIntegral) {
        j["slope"] = number(r.slope);
        j["slope_ok"] = r.slope_ok;
    } else {
        j["analytic_bound"] = number(r.analytic_bound);
        j["bounded"] = r.bounded;
        j["within_bound"] = r.within_bound;
    }
    return j;
}

void write_csv(std::ostream& os, const FamilySweep& sweep) {
    os << "member,lambda,lhs,main,boundary,negligible,log_scale,pass\n";
    for (const auto& row : sweep.rows) {
        const auto& t = row.terms;
        os << row.member << ',' << format_double(t.lambda) << ',' << format_double(t.lhs) << ','
           << format_double(t.main) << ',' << format_double(t.boundary) << ',' << format_double(t.negligible) << ','
           << format_double(t.log_scale) << ',' << (row.pass ? 1 : 0) << '\n';
    }
}

void write_csv(std::ostream& os, std::span<const LemmaReport> members) {
    os << "member,lambda,ratio,scaled_ratio\n";
    for (std::size_t m = 0; m < members.size(); ++m) {
        const auto& r = members[m];
        for (std::size_t i = 0; i < r.lambdas.size(); ++i) {
            os << m << ',' << format_double(r.lambdas[i]) << ',' << format_double(r.ratios[i]) << ',';
            if (i < r.scaled_ratios.size()) os << format_double(r.scaled_ratios[i]);
            os << '\n';
        }
    }
}

void write_csv(std::ostream& os, const SweepReport& report) {
    os << "scale,delta,err_k,err_u_s0,err_u_s1,err_u_s2,err_m_s0,err_m_s1,err_m_s2,err_k_reconstructed\n";
    for (const auto& row : report.rows) {
        os << format_double(row.scale) << ',' << format_double(row.delta) << ',' << format_double(row.err_k);
        for (double e : row.err_u) os << ',' << format_double(e);
        for (double e : row.err_m) os << ',' << format_double(e);
        os << ',' << format_double(row.err_k_reconstructed) << '\n';
    }
}

nlohmann::json fit_json(const SweepReport& report) {
    nlohmann::json j = to_json(report.fit_k);
    j["err_u"] = nlohmann::json::array();
    j["err_m"] = nlohmann::json::array();
    for (std::size_t s = 0; s < 3; ++s) {
        j["err_u"].push_back(to_json(report.fit_u[s]));
        j["err_m"].push_back(to_json(report.fit_m[s]));
    }
    j["excluded"] = nlohmann::json::array();
    for (const auto& e : report.excluded) j["excluded"].push_back({{"scale", e.scale}, {"message", e.message}});
    j["base_iterations"] = report.base_iterations;
    return j;
}

}  // namespace mfglab::io

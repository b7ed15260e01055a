#pragma once

#include "mfglab/grid.hpp"
#include "mfglab/kernels.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mfglab {

/// Largest lambda the weighted integrals support, even in scaled form.
inline constexpr double kLambdaMax = 64.0;

struct CarlemanParams {
    double lambda = 1.0;
    double alpha = 1.0;

    void validate() const;
    /// alpha T^2 / 4 > b^2: the end-cap term decays in lambda.
    bool decays(const Prism& prism) const;
};

/// phi = scaled * exp(log_scale). log_scale is 0 unless 2 lambda b^2 > 700.
struct ScaledWeight {
    Field scaled;
    double log_scale = 0.0;
};

ScaledWeight weight_phi(const CarlemanParams& params, GridPtr grid);
/// Natural log of the weight at (x1, t).
double log_phi(const CarlemanParams& params, const Prism& prism, double x1, double t);

enum class OperatorSign { Plus, Minus };

/// Integrals of the Carleman functional at unit C0, all divided by exp(log_scale).
struct CarlemanTerms {
    double lambda = 0.0;
    double log_scale = 0.0;
    double lhs = 0.0;
    double main = 0.0;        // (1/lambda) int (u_t^2 + sum u_xixj^2) phi + int (lambda |grad u|^2 + lambda^3 u^2) phi
    double boundary = 0.0;    // (|d_n u|^2_{H10} + |u|^2_{H21}) e^{3 lambda b^2}
    double negligible = 0.0;  // (|u(T)|^2_{H1} + |u(0)|^2_{H1}) exp(-2 lambda (alpha T^2/4 - b^2))
    // Natural logs of the unscaled values (-inf when a term vanishes).
    double log_lhs = 0.0;
    double log_main = 0.0;
    double log_boundary = 0.0;
    double log_negligible = 0.0;

    /// main - boundary - negligible at unit C0.
    double bracket() const { return main - boundary - negligible; }
    bool passes(double c0) const;
};

struct CarlemanReport {
    CarlemanTerms terms;
    double c0 = 0.0;
    bool pass = false;
};

/// Full lateral boundary term.
CarlemanReport carleman_functional(const Field& u, OperatorSign sign, const CarlemanParams& params, double c0);
/// Boundary term on Gamma_1^+ only; requires u = 0 on every other face to 1e-10.
CarlemanReport carleman_functional_restricted(const Field& u, OperatorSign sign, const CarlemanParams& params,
                                              double c0);

CarlemanTerms carleman_terms(const Field& u, OperatorSign sign, const CarlemanParams& params, bool restricted);

// ---------------------------------------------------------------------------
// Seeded test families.

struct TestFunction {
    std::string label;
    SpaceTimeFunction fn;

    Field sample(GridPtr grid) const { return Field::sample(std::move(grid), fn); }
};

enum class FamilyKind {
    General,     // products of low-order polynomial and trigonometric factors; even
                 // members also vanish identically near every lateral face
    Restricted,  // vanishes on every lateral face except Gamma_1^+ (even members there too)
};

inline constexpr std::uint64_t kFamilySeed = 0x5EED;

std::vector<TestFunction> test_family(const Prism& prism, std::size_t count, std::uint64_t seed = kFamilySeed,
                                      FamilyKind kind = FamilyKind::General);

struct FamilyRow {
    std::size_t member = 0;
    CarlemanTerms terms;
    bool pass = false;
};

struct FamilySweep {
    std::vector<double> lambdas;
    std::vector<FamilyRow> rows;  // member-major, lambda-minor
    /// Infimum over rows with a positive bracket of lhs / bracket (+inf if none).
    double c0 = 0.0;
    /// Smallest grid lambda from which every row passes at c0.
    std::optional<double> lambda0;
    bool all_pass = false;
};

/// Evaluates every member at every lambda, sets C0 to the family infimum and
/// flags each row at that C0. Members and lambdas run concurrently.
FamilySweep carleman_family_sweep(std::span<const TestFunction> family, GridPtr grid, OperatorSign sign,
                                  double alpha, std::span<const double> lambdas, bool restricted = false);

/// lambda0 for a caller-chosen C0: smallest grid lambda from which every row passes.
std::optional<double> lambda0_for(const FamilySweep& sweep, double c0);

// ---------------------------------------------------------------------------
// Integral lemmas.

enum class Lemma { SeparableKernel, CausalKernel, TimeIntegral };

std::string to_string(Lemma which);

struct LemmaReport {
    Lemma which = Lemma::TimeIntegral;
    std::vector<double> lambdas;
    /// Kernel lemmas: int (K h)^2 phi / int h^2 phi. Time-integral lemma: the
    /// unnormalised int (int h)^2 phi / int h^2 phi.
    std::vector<double> ratios;
    /// Time-integral lemma only: ratio * lambda.
    std::vector<double> scaled_ratios;
    double max_over_min = 0.0;
    double empirical_constant = 0.0;  // max ratio (kernels) or max ratio*lambda
    double analytic_bound = 0.0;      // kernels only
    double slope = 0.0;               // time-integral lemma: log-log slope of ratio vs lambda (NaN for one lambda)
    bool degenerate = false;          // h == 0
    bool bounded = false;             // kernels: max/min <= 10
    bool within_bound = false;        // kernels: every ratio <= analytic bound
    bool slope_ok = false;            // time-integral: |slope + 1| <= 0.15
    bool pass = false;                // time-integral with one lambda: the ratio is finite
};

inline constexpr double kLemmaSpreadLimit = 10.0;
inline constexpr double kLemmaSlopeTolerance = 0.15;

/// `kernel` is required for the kernel lemmas and ignored otherwise.
LemmaReport verify_lemma(Lemma which, const Field& h, const Kernel* kernel, double alpha,
                         std::span<const double> lambdas);

/// Relative mismatch of int_a^b int_{x}^b f dy dx against int_a^b int_a^y f dx dy.
double fubini_swap_residual(const std::function<double(double x, double y)>& f, double a, double b);

/// Random smooth f(x, y) for the swap check.
std::function<double(double, double)> random_swap_integrand(std::uint64_t seed);

}  // namespace mfglab

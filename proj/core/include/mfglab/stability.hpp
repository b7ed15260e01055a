#pragma once

#include "mfglab/cip.hpp"
#include "mfglab/grid.hpp"
#include "mfglab/kernels.hpp"
#include "mfglab/mfg.hpp"
#include "mfglab/numerics.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mfglab {

/// Differences of two solution triples and their time derivatives.
struct DifferencePack {
    Field u;       // u1 - u2
    Field m;       // m1 - m2
    SpaceField k;  // k1 - k2
    Field v;       // u_t
    Field q;       // m_t
    Field w;       // u_tt
    Field r;       // m_tt
    SpaceField u0;  // u at T/2
    SpaceField m0;  // m at T/2
    double epsilon = 0.0;
    /// Sum of the H^{2,1}(Q_{eps,T}) norms of v, q, w, r (squared).
    double v_h21_sq = 0.0;
    /// Sum of the H^2(Q_T) norms of v, q, w, r (squared).
    double v_h2_sq = 0.0;
};

/// epsilon sets the truncated cylinder used by the V-norms; 0 picks 0.2 T.
DifferencePack form_difference(const MFGTriple& first, const MFGTriple& second, double epsilon = 0.0);

/// Residual of u = int_{T/2}^t v + u(T/2) at every node (max abs).
double integral_identity_gap(const DifferencePack& pack);

/// Which time slice supplies f in the source combination.
enum class SourceTime { Mid, Initial };

/// The data-only part of the coefficient difference:
/// F = 2 |grad u01|^-2 [lap u0 + K[m0] + f m0] - |grad u01|^-2 k2 grad u0 . grad(u01 + u02).
/// Nodes with |grad u01|^2 < 2c are rejected.
SpaceField compute_F(const DifferencePack& pack, const SpaceField& u01, const SpaceField& u02, const SpaceField& k2,
                     const Kernel& kernel, const Field& f, double c, SourceTime source = SourceTime::Mid);

enum class ReconstructionMode { Snapshot, Shifted };

/// k1 - k2 from the difference data. Snapshot reads v at T/2; shifted reads
/// v(t) - int_{T/2}^t w at the given time level.
SpaceField reconstruct_k_tilde(const DifferencePack& pack, const SpaceField& u01, const SpaceField& F, double c,
                               ReconstructionMode mode = ReconstructionMode::Snapshot,
                               std::optional<double> t = std::nullopt);

/// Largest pairwise L2 gap between shifted reconstructions at the given times.
double shifted_spread(const DifferencePack& pack, const SpaceField& u01, const SpaceField& F, double c,
                      std::span<const double> times);

/// The equations satisfied by the differences: the plain pair, then the pair
/// differentiated once and twice in time with the coefficient eliminated.
enum class DerivedEquation { Hjb, Fp, HjbFirst, FpFirst, HjbSecond, FpSecond };

std::string to_string(DerivedEquation e);

/// Two solutions sharing f, the kernel and the guard constant c.
struct SolutionPair {
    const MFGTriple& first;
    const MFGTriple& second;
    const ProblemSpec& spec;
    double c = 0.0;
    SourceTime source = SourceTime::Mid;
};

/// Pointwise residual; norms over the spatial interior of Q_{eps,T} (eps from the pack).
Residual residual_derived_system(const DifferencePack& pack, const SolutionPair& pair, DerivedEquation which);

enum class Inequality { Value, Density, ValueRate, DensityRate };

std::string to_string(Inequality i);

struct InequalityReport {
    double empirical_c = 0.0;      // max LHS / (bracket + slack) over resolved nodes
    double slack_l2 = 0.0;         // L2(Q_{eps,T}) norm of the data-driven slack
    double degenerate_fraction = 0.0;  // share of interior nodes with a vanishing bracket
    bool pass = false;             // empirical_c <= candidate and slack_l2 <= budget
};

inline constexpr double kBracketThreshold = 1e-10;

/// Checks |operator| <= C (bracket) + C slack at the nodes the residual norms use.
InequalityReport check_inequality(const DifferencePack& pack, const SolutionPair& pair, Inequality which,
                                  double c_candidate, double slack_budget);

// ---------------------------------------------------------------------------
// Parameter calculus.

struct StabilityParams {
    double rho = 0.5;
    double epsilon = 0.2;
    double T = 1.0;
    double a = 1.0;
    double b = 2.0;
    double lambda1 = 1.0;
    double s = 0.0;
    double beta = 0.0;
    double alpha = 0.0;
    double d = 0.0;
    double delta0 = 0.0;
    double log_delta0 = 0.0;

    /// (rho / d) ln(1 / delta).
    double lambda_for(double delta) const;
};

/// Lower end of the admissible epsilon window, (T/2)(1 - sqrt(rho)).
double epsilon_window_lower(double rho, double T);
/// (T/2 - eps)^2 / (eps (T - eps)).
double window_ratio(double epsilon, double T);
/// rho - (1 - rho) s; positive exactly inside the window.
double feasibility_margin(double rho, double epsilon, double T);

StabilityParams select_parameters(double rho, double epsilon, const Prism& prism, double lambda1 = 1.0);

struct Ratio {
    long long num = 0;
    long long den = 1;
};

/// Closed-form parameters in exact rational arithmetic, as "p/q" strings.
struct ExactParameters {
    std::string s;
    std::string beta;
    std::string alpha;
    std::string d;
    std::string log_delta0;  // -lambda1 d / rho
};

ExactParameters select_parameters_exact(Ratio rho, Ratio epsilon, Ratio T, Ratio b, Ratio lambda1);

struct FinalEstimate {
    double lambda = 0.0;
    double log_lhs = 0.0;          // log ||V||^2 over Q_{eps,T}; -inf for a zero pack
    double log_decay_term = 0.0;   // log C + decay_exponent + log ||V||^2_{H^2(Q_T)}
    double log_data_term = 0.0;    // log C + 2 log delta + data_exponent
    double log_rhs = 0.0;
    double decay_exponent = 0.0;   // -2 lambda (alpha eps (T - eps) - b^2)
    double data_exponent = 0.0;    // 2 lambda (3 b^2 / 2 + alpha (T/2 - eps)^2)
    double margin = 0.0;           // log_rhs - log_lhs
    bool holds = false;
};

FinalEstimate assemble_final_estimate(const DifferencePack& pack, const StabilityParams& params, double delta,
                                      double constant);

// ---------------------------------------------------------------------------
// Hoelder sweep.

struct SweepSetup {
    GridPtr grid;
    Kernel kernel = Kernel::none();
    ClosedForm value;
    SpaceField k1;
    SpaceField dk;
    SpaceField m0;
    ManufactureOptions manufacture{};
    SolverOptions solver{};
    Completeness completeness = Completeness::Full;
    double rho = 0.5;
    double epsilon = 0.2;
    double lambda1 = 1.0;
    double c = 0.5;  // guard: |grad u(., T/2)|^2 >= 2c
    double padding = 0.25;  // extra solve time before 0 and after T
    std::vector<double> scales;
    /// Measurement noise on the perturbed dataset before delta is measured; scale i
    /// uses seed + i. Off by default.
    NoiseSpec noise{};
};

/// 1-D defaults on the given grid: the default value, coefficient, perturbation
/// and density scenarios with six scales.
SweepSetup default_sweep(GridPtr grid);
/// Six scales geometric in [1e-4, 1e-1].
std::vector<double> default_scales();

/// Solutions for k1 + scale dk sharing f, the kernel and all boundary, initial and
/// terminal data. Solves run on [-padding, T + padding] and are restricted to
/// [0, T]: shared data cannot be compatible with two coefficients at the corners,
/// and the corner layers decay before the observation window.
class PerturbationFamily {
public:
    explicit PerturbationFamily(const SweepSetup& setup);

    const GridPtr& grid() const { return grid_; }
    /// Data restricted to [0, T].
    const ProblemSpec& spec() const { return spec_; }
    const MFGTriple& base() const { return base_; }
    std::size_t base_iterations() const { return base_report_.iterations; }
    SpaceField coefficient(double scale) const;
    /// Throws NonConvergenceError when the forward solve fails.
    MFGTriple solve(double scale) const;

private:
    MFGTriple restrict_triple(const MFGTriple& t) const;

    GridPtr grid_;
    std::size_t offset_ = 0;  // padded level of t = 0; set while building padded_
    GridPtr padded_;
    SpaceField k1_;
    SpaceField dk_;
    SolverOptions solver_;
    ProblemSpec padded_spec_;
    PicardReport base_report_;
    MFGTriple base_;
    ProblemSpec spec_;
};

struct SweepRow {
    double scale = 0.0;
    double delta = 0.0;
    double err_k = 0.0;                // ||k1 - k2||_{L2}
    std::array<double, 3> err_u{};     // ||d^s/dt^s (u1 - u2)||_{H^{2,1}(Q_{eps,T})}
    std::array<double, 3> err_m{};
    double err_k_reconstructed = 0.0;  // ||reconstruction - (k1 - k2)||_{L2}
};

struct SweepFailure {
    double scale = 0.0;
    std::string message;
};

struct SweepReport {
    StabilityParams params;
    std::vector<SweepRow> rows;
    std::vector<SweepFailure> excluded;
    LinearFit fit_k;
    std::array<LinearFit, 3> fit_u{};
    std::array<LinearFit, 3> fit_m{};
    std::size_t base_iterations = 0;
};

/// Two forward solves per scale (k1 and k1 + scale dk, shared data), extraction,
/// measured delta and the log-log fits. Scales run concurrently; rows are in
/// scale order.
SweepReport holder_sweep(const SweepSetup& setup);

}  // namespace mfglab

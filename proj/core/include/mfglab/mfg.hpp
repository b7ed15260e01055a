#pragma once

#include "mfglab/grid.hpp"
#include "mfglab/kernels.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mfglab {

/// A smooth function of (x, t) together with the derivatives the HJB equation needs.
struct ClosedForm {
    SpaceTimeFunction value;
    SpaceTimeFunction u_t;
    SpaceTimeFunction laplacian;
    std::function<void(std::span<const double> x, double t, std::span<double> grad)> gradient;

    Field sample(GridPtr grid) const;
    Field sample_u_t(GridPtr grid) const;
    Field sample_laplacian(GridPtr grid) const;
    /// |grad u|^2 sampled on the grid.
    Field sample_grad_sq(GridPtr grid) const;
};

enum class TimeScheme { Implicit, Explicit };

struct ProblemSpec {
    GridPtr grid;
    Kernel kernel = Kernel::none();
    Field f;
    /// Carriers of the Dirichlet data: only lateral-face samples are read.
    Field u_boundary;
    Field m_boundary;
    SpaceField u_terminal;
    SpaceField m_initial;

    void validate() const;
    /// max over |f|, |f_t|, |f_tt| (sampled).
    double f_bound() const;
};

/// Spec whose Dirichlet, terminal and initial data are read off the given fields.
ProblemSpec spec_from_fields(GridPtr grid, Kernel kernel, Field f, const Field& u, const Field& m);

struct MFGTriple {
    Field u;
    Field m;
    SpaceField k;
};

struct SolverOptions {
    TimeScheme scheme = TimeScheme::Implicit;
    double damping = 0.5;
    std::size_t max_iter = 200;
    double tol = 1e-10;
};

Field solve_fokker_planck(const ProblemSpec& spec, const SpaceField& k, const Field& u,
                          TimeScheme scheme = TimeScheme::Implicit);
Field solve_hjb(const ProblemSpec& spec, const SpaceField& k, const Field& m,
                TimeScheme scheme = TimeScheme::Implicit);
/// Same as above with a kernel operator already bound to the grid.
Field solve_hjb(const ProblemSpec& spec, const KernelOperator& op, const SpaceField& k, const Field& m,
                TimeScheme scheme = TimeScheme::Implicit);

struct PicardReport {
    MFGTriple triple;
    std::vector<double> history;  // L2(Q_T) size of each damped update
    std::size_t iterations = 0;
    bool decoupled = false;
};

/// Damped fixed point between the HJB and FP solvers. Throws NonConvergenceError
/// (carrying the history) when max_iter is exhausted or the iterates blow up.
PicardReport solve_mfg_picard(const ProblemSpec& spec, const SpaceField& k, const SolverOptions& options = {});

struct Manufactured {
    MFGTriple triple;
    Field f;
    ProblemSpec spec;
};

struct ManufactureOptions {
    double m_floor = 1e-6;
    /// Length of the FP run before t = 0 (snapped to an even number of steps).
    /// m0 is the density at -burn_in; the run smooths the corner layer caused by
    /// boundary data that are incompatible with m0.
    double burn_in = 0.25;
    TimeScheme scheme = TimeScheme::Implicit;
};

/// Solves FP for m with the prescribed u, then defines f from the HJB equation.
/// The m boundary data are the boundary values of m0 held constant in time.
Manufactured manufacture_triple(GridPtr grid, const Kernel& kernel, const SpaceField& k, const ClosedForm& u,
                                const SpaceField& m0, const ManufactureOptions& options = {});

/// div(k m grad u) expanded by the product rule, so that no first difference is
/// differenced again (which would lose an order next to the boundary).
Field drift_divergence(const SpaceField& k, const Field& m, const Field& u);

enum class Equation { Hjb, Fp };

struct Residual {
    Field field;
    double l2 = 0.0;
    double max = 0.0;
};

/// Pointwise residual of one equation; norms over space-time interior nodes.
Residual residual(const MFGTriple& triple, const ProblemSpec& spec, Equation which);

struct TripleBounds {
    double n2 = 0.0;  // max sampled |derivative| of u, m through order 4
    double n3 = 0.0;  // max of |k| and |grad k|
    double c = 0.0;   // min over Omega of |grad u(., T/2)|^2 / 2
};

TripleBounds triple_bounds(const MFGTriple& triple);

}  // namespace mfglab

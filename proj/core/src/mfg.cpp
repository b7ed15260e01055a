#include "mfglab/mfg.hpp"

#include "mfglab/error.hpp"
#include "mfglab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mfglab {

namespace {

constexpr double kBlowUp = 1e12;

std::string describe_node(const Grid& g, std::size_t spatial, std::size_t level) {
    std::ostringstream os;
    os << "x = (";
    for (std::size_t k = 0; k < g.dim(); ++k) os << (k ? ", " : "") << g.x(k, g.axis_index(spatial, k));
    os << "), t = " << g.t(level);
    return os.str();
}

void guard_blow_up(std::span<const double> level, const Grid& g, std::size_t n, const char* what) {
    for (std::size_t s = 0; s < level.size(); ++s) {
        if (!std::isfinite(level[s]) || std::abs(level[s]) > kBlowUp) {
            fail(ErrorKind::NumericRange, std::string(what) + " blew up at " + describe_node(g, s, n));
        }
    }
}

// Interior spatial nodes whose line along `axis` starts there (axis index 0,
// every other index interior).
std::vector<std::size_t> line_starts(const Grid& g, std::size_t axis) {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < g.space_size(); ++s) {
        if (g.axis_index(s, axis) != 0) continue;
        bool interior = true;
        for (std::size_t k = 0; k < g.dim(); ++k) {
            if (k == axis) continue;
            const std::size_t i = g.axis_index(s, k);
            if (i == 0 || i + 1 == g.nx(k)) interior = false;
        }
        if (interior) out.push_back(s);
    }
    return out;
}

void copy_boundary(std::span<double> dst, std::span<const double> src, const std::vector<std::size_t>& boundary) {
    for (std::size_t s : boundary) dst[s] = src[s];
}

std::vector<std::size_t> boundary_nodes(const Grid& g) {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < g.space_size(); ++s)
        if (g.on_boundary(s)) out.push_back(s);
    return out;
}

// One implicit sweep along every axis (Lie splitting). `coeff(axis, start, j)`
// yields the face drift c_{j+1/2} for the FP operator; nullptr means pure diffusion.
struct LineOperator {
    const Grid& g;
    double tau;
    bool with_drift;
    std::span<const double> k;       // drift coefficient (FP only)
    std::span<const double> u_level;  // u at the new level (FP only)
};

void implicit_sweep(const LineOperator& op, std::vector<double>& cur, std::span<const double> bnd, bool rhs_scaled) {
    const Grid& g = op.g;
    for (std::size_t axis = 0; axis < g.dim(); ++axis) {
        const std::size_t N = g.nx(axis);
        const std::size_t st = g.stride(axis);
        const double h = g.h(axis);
        const double ih2 = 1.0 / (h * h);
        const std::size_t M = N - 2;
        std::vector<double> lo(M), di(M), up(M), rhs(M);
        for (std::size_t start : line_starts(g, axis)) {
            auto node = [&](std::size_t j) { return start + j * st; };
            for (std::size_t j = 1; j + 1 < N; ++j) {
                double cm = 0.0;
                double cp = 0.0;
                if (op.with_drift) {
                    const double km = 0.5 * (op.k[node(j - 1)] + op.k[node(j)]);
                    const double kp = 0.5 * (op.k[node(j)] + op.k[node(j + 1)]);
                    cm = km * (op.u_level[node(j)] - op.u_level[node(j - 1)]) / h;
                    cp = kp * (op.u_level[node(j + 1)] - op.u_level[node(j)]) / h;
                }
                const std::size_t r = j - 1;
                lo[r] = -(ih2 - cm / (2.0 * h));
                di[r] = 1.0 / op.tau + 2.0 * ih2 - (cp - cm) / (2.0 * h);
                up[r] = -(ih2 + cp / (2.0 * h));
                rhs[r] = (rhs_scaled && axis == 0 ? cur[node(j)] : cur[node(j)] / op.tau);
            }
            rhs[0] -= lo[0] * bnd[node(0)];
            rhs[M - 1] -= up[M - 1] * bnd[node(N - 1)];
            solve_tridiagonal(lo, di, up, rhs);
            for (std::size_t j = 1; j + 1 < N; ++j) cur[node(j)] = rhs[j - 1];
        }
    }
}

// Explicit application of sum_axis L_axis at the interior nodes.
std::vector<double> apply_operator(const LineOperator& op, std::span<const double> cur) {
    const Grid& g = op.g;
    std::vector<double> out(cur.size(), 0.0);
    for (std::size_t axis = 0; axis < g.dim(); ++axis) {
        const std::size_t N = g.nx(axis);
        const std::size_t st = g.stride(axis);
        const double h = g.h(axis);
        for (std::size_t start : line_starts(g, axis)) {
            auto node = [&](std::size_t j) { return start + j * st; };
            for (std::size_t j = 1; j + 1 < N; ++j) {
                double fm = (cur[node(j)] - cur[node(j - 1)]) / h;
                double fp = (cur[node(j + 1)] - cur[node(j)]) / h;
                if (op.with_drift) {
                    const double km = 0.5 * (op.k[node(j - 1)] + op.k[node(j)]);
                    const double kp = 0.5 * (op.k[node(j)] + op.k[node(j + 1)]);
                    fm += km * (op.u_level[node(j)] - op.u_level[node(j - 1)]) / h * 0.5 * (cur[node(j - 1)] + cur[node(j)]);
                    fp += kp * (op.u_level[node(j + 1)] - op.u_level[node(j)]) / h * 0.5 * (cur[node(j)] + cur[node(j + 1)]);
                }
                out[node(j)] += (fp - fm) / h;
            }
        }
    }
    return out;
}

double min_spacing(const Grid& g) { return *std::min_element(g.h().begin(), g.h().end()); }

Field interior_mask(const Field& f) {
    const Grid& g = f.grid();
    std::vector<double> v(f.values().begin(), f.values().end());
    const std::size_t S = g.space_size();
    for (std::size_t n = 0; n < g.nt(); ++n)
        for (std::size_t s = 0; s < S; ++s)
            if (n == 0 || n + 1 == g.nt() || g.on_boundary(s)) v[n * S + s] = 0.0;
    return Field(f.grid_ptr(), std::move(v));
}

}  // namespace

// ---------------------------------------------------------------------------

Field ClosedForm::sample(GridPtr grid) const { return Field::sample(std::move(grid), value); }
Field ClosedForm::sample_u_t(GridPtr grid) const { return Field::sample(std::move(grid), u_t); }
Field ClosedForm::sample_laplacian(GridPtr grid) const { return Field::sample(std::move(grid), laplacian); }

Field ClosedForm::sample_grad_sq(GridPtr grid) const {
    const std::size_t n = grid->dim();
    return Field::sample(std::move(grid), [this, n](std::span<const double> x, double t) {
        std::vector<double> g(n);
        gradient(x, t, g);
        double s = 0.0;
        for (double v : g) s += v * v;
        return s;
    });
}

void ProblemSpec::validate() const {
    require(grid != nullptr, "problem: grid missing");
    const char* where = "problem spec";
    require_same_grid(*grid, f.grid(), where);
    require_same_grid(*grid, u_boundary.grid(), where);
    require_same_grid(*grid, m_boundary.grid(), where);
    require_same_grid(*grid, u_terminal.grid(), where);
    require_same_grid(*grid, m_initial.grid(), where);
    require(m_initial.min() > 0.0, "problem: initial density m(., 0) must be positive");
}

double ProblemSpec::f_bound() const {
    return std::max({f.max_abs(), d_dt(f).max_abs(), d2_dt2(f).max_abs()});
}

ProblemSpec spec_from_fields(GridPtr grid, Kernel kernel, Field f, const Field& u, const Field& m) {
    ProblemSpec spec{grid, std::move(kernel), std::move(f), u, m, u.level_field(grid->nt() - 1), m.level_field(0)};
    spec.validate();
    return spec;
}

Field solve_fokker_planck(const ProblemSpec& spec, const SpaceField& k, const Field& u, TimeScheme scheme) {
    const Grid& g = *spec.grid;
    require_same_grid(g, k.grid(), "fokker-planck");
    require_same_grid(g, u.grid(), "fokker-planck");
    const std::size_t S = g.space_size();
    const double tau = g.tau();
    const auto bnodes = boundary_nodes(g);

    if (scheme == TimeScheme::Explicit) {
        double drift = 0.0;
        for (const auto& gu : gradient(u)) drift = std::max(drift, (k * gu).max_abs());
        const double h = min_spacing(g);
        const double limit = h * h / (2.0 * static_cast<double>(g.dim()) * (1.0 + drift * h));
        if (tau > limit) {
            std::ostringstream os;
            os << "explicit fokker-planck step unstable: tau = " << tau << " exceeds " << limit;
            fail(ErrorKind::InvalidArgument, os.str());
        }
    }

    std::vector<double> out(g.size());
    std::copy(spec.m_initial.values().begin(), spec.m_initial.values().end(), out.begin());
    copy_boundary(std::span<double>(out).first(S), spec.m_boundary.level(0), bnodes);
    std::vector<double> cur(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(S));
    for (std::size_t n = 0; n + 1 < g.nt(); ++n) {
        const auto bnd = spec.m_boundary.level(n + 1);
        if (scheme == TimeScheme::Implicit) {
            LineOperator op{g, tau, true, k.values(), u.level(n + 1)};
            implicit_sweep(op, cur, bnd, false);
        } else {
            LineOperator op{g, tau, true, k.values(), u.level(n)};
            const auto lm = apply_operator(op, cur);
            for (std::size_t s = 0; s < S; ++s) cur[s] += tau * lm[s];
        }
        copy_boundary(cur, bnd, bnodes);
        guard_blow_up(cur, g, n + 1, "fokker-planck solve");
        std::copy(cur.begin(), cur.end(), out.begin() + static_cast<std::ptrdiff_t>((n + 1) * S));
    }
    return Field(spec.grid, std::move(out));
}

Field solve_hjb(const ProblemSpec& spec, const SpaceField& k, const Field& m, TimeScheme scheme) {
    return solve_hjb(spec, KernelOperator(spec.kernel, spec.grid), k, m, scheme);
}

Field solve_hjb(const ProblemSpec& spec, const KernelOperator& kop, const SpaceField& k, const Field& m,
                TimeScheme scheme) {
    const Grid& g = *spec.grid;
    require_same_grid(g, k.grid(), "hjb");
    require_same_grid(g, m.grid(), "hjb");
    const std::size_t S = g.space_size();
    const double tau = g.tau();
    const auto bnodes = boundary_nodes(g);

    if (scheme == TimeScheme::Explicit) {
        const double h = min_spacing(g);
        const double limit = h * h / (2.0 * static_cast<double>(g.dim()));
        if (tau > limit) {
            std::ostringstream os;
            os << "explicit hjb step unstable: tau = " << tau << " exceeds " << limit;
            fail(ErrorKind::InvalidArgument, os.str());
        }
    }

    // Source at a level: -k |grad u|^2 / 2 + K[m] + f m, with u the given slice.
    auto source = [&](std::span<const double> u_slice, std::size_t level) {
        const SpaceField us(spec.grid, std::vector<double>(u_slice.begin(), u_slice.end()));
        const SpaceField gsq = grad_dot(us, us);
        const auto km = kop.apply(m.level(level));
        const auto fl = spec.f.level(level);
        const auto ml = m.level(level);
        std::vector<double> src(S);
        for (std::size_t s = 0; s < S; ++s) src[s] = -0.5 * k[s] * gsq[s] + km[s] + fl[s] * ml[s];
        return src;
    };

    std::vector<double> out(g.size());
    const std::size_t last = g.nt() - 1;
    std::vector<double> cur(spec.u_terminal.values().begin(), spec.u_terminal.values().end());
    copy_boundary(cur, spec.u_boundary.level(last), bnodes);
    std::copy(cur.begin(), cur.end(), out.begin() + static_cast<std::ptrdiff_t>(last * S));
    for (std::size_t n = last; n-- > 0;) {
        const auto bnd = spec.u_boundary.level(n);
        if (scheme == TimeScheme::Implicit) {
            const auto src = source(cur, n);
            for (std::size_t s = 0; s < S; ++s) cur[s] = cur[s] / tau + src[s];
            LineOperator op{g, tau, false, {}, {}};
            implicit_sweep(op, cur, bnd, true);
        } else {
            const auto src = source(cur, n + 1);
            LineOperator op{g, tau, false, {}, {}};
            const auto lap = apply_operator(op, cur);
            for (std::size_t s = 0; s < S; ++s) cur[s] += tau * (lap[s] + src[s]);
        }
        copy_boundary(cur, bnd, bnodes);
        guard_blow_up(cur, g, n, "hjb solve");
        std::copy(cur.begin(), cur.end(), out.begin() + static_cast<std::ptrdiff_t>(n * S));
    }
    return Field(spec.grid, std::move(out));
}

PicardReport solve_mfg_picard(const ProblemSpec& spec, const SpaceField& k, const SolverOptions& options) {
    spec.validate();
    require(options.damping > 0.0 && options.damping <= 1.0, "picard: damping must lie in (0, 1]");
    require(options.max_iter >= 1, "picard: max_iter must be at least 1");
    require(options.tol > 0.0, "picard: tol must be positive");
    const KernelOperator kop(spec.kernel, spec.grid);
    const bool decoupled = spec.f.max_abs() == 0.0 && kop.bound() == 0.0;
    const double theta = options.damping;

    std::vector<double> history;
    Field m = Field::broadcast(spec.m_initial);
    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        try {
            Field u = solve_hjb(spec, kop, k, m, options.scheme);
            Field m_new = solve_fokker_planck(spec, k, u, options.scheme);
            const double change = theta * norm_l2(m_new - m);
            history.push_back(change);
            if (decoupled || change < options.tol)
                return PicardReport{MFGTriple{std::move(u), std::move(m_new), k}, std::move(history), it, decoupled};
            m = theta * m_new + (1.0 - theta) * m;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NumericRange) throw;
            throw NonConvergenceError(std::string("picard iteration diverged: ") + e.what(), history);
        }
    }
    std::ostringstream os;
    os << "picard iteration did not converge in " << options.max_iter << " iterations (last change "
       << history.back() << ", tol " << options.tol << ")";
    throw NonConvergenceError(os.str(), history);
}

Manufactured manufacture_triple(GridPtr grid, const Kernel& kernel, const SpaceField& k, const ClosedForm& cf,
                                const SpaceField& m0, const ManufactureOptions& options) {
    const Grid& g = *grid;
    require_same_grid(g, k.grid(), "manufacture");
    require_same_grid(g, m0.grid(), "manufacture");
    require(options.burn_in >= 0.0, "manufacture: burn-in must be non-negative");
    auto reject_floor = [&](std::span<const double> v, double t_offset, const char* what) {
        const auto it = std::min_element(v.begin(), v.end());
        if (*it > options.m_floor) return;
        const auto flat = static_cast<std::size_t>(it - v.begin());
        const std::size_t s = flat % g.space_size();
        std::ostringstream os;
        os << what << " falls to " << *it << " <= m_floor " << options.m_floor << " at x = (";
        for (std::size_t a = 0; a < g.dim(); ++a) os << (a ? ", " : "") << g.x(a, g.axis_index(s, a));
        os << "), t = " << static_cast<double>(flat / g.space_size()) * g.tau() - t_offset;
        fail(ErrorKind::NumericRange, os.str());
    };
    reject_floor(m0.values(), 0.0, "initial density");

    // Burn-in: march FP on [-t_b, T] with u shifted, keep [0, T].
    const std::size_t nb = 2 * static_cast<std::size_t>(std::llround(options.burn_in / (2.0 * g.tau())));
    const double t_b = static_cast<double>(nb) * g.tau();
    Prism ext = g.prism();
    ext.T = g.T() + t_b;
    const GridPtr eg = nb == 0 ? grid : make_grid(ext, g.nx(), g.nt() + nb);
    const SpaceField ek(eg, std::vector<double>(k.values().begin(), k.values().end()));
    const SpaceField em0(eg, std::vector<double>(m0.values().begin(), m0.values().end()));
    const Field eu = Field::sample(eg, [&](std::span<const double> x, double t) { return cf.value(x, t - t_b); });
    const ProblemSpec espec{eg, kernel, Field::zeros(eg), eu, Field::broadcast(em0), eu.level_field(eg->nt() - 1), em0};
    const Field em = solve_fokker_planck(espec, ek, eu, options.scheme);
    reject_floor(em.values(), t_b, "manufactured density");
    const auto tail = em.values().subspan(nb * g.space_size());
    const Field m(grid, std::vector<double>(tail.begin(), tail.end()));

    const Field u = cf.sample(grid);
    const KernelOperator kop(kernel, grid);
    const Field num = -cf.sample_u_t(grid) - cf.sample_laplacian(grid) + 0.5 * (k * cf.sample_grad_sq(grid)) - kop.apply(m);
    std::vector<double> fv(g.size());
    for (std::size_t i = 0; i < fv.size(); ++i) fv[i] = num.values()[i] / m.values()[i];
    Field f(grid, std::move(fv));
    ProblemSpec spec{grid, kernel, f, u, m, u.level_field(g.nt() - 1), m.level_field(0)};
    return {MFGTriple{u, m, k}, std::move(f), std::move(spec)};
}

Field drift_divergence(const SpaceField& k, const Field& m, const Field& u) {
    const Field km = k * m;
    Field acc = km * laplacian(u);
    const auto gu = gradient(u);
    const auto gm = gradient(m);
    const auto gk = gradient(k);
    for (std::size_t a = 0; a < gu.size(); ++a) acc = acc + (k * gm[a] + gk[a] * m) * gu[a];
    return acc;
}

Residual residual(const MFGTriple& triple, const ProblemSpec& spec, Equation which) {
    const Field& u = triple.u;
    const Field& m = triple.m;
    const SpaceField& k = triple.k;
    require_same_grid(u.grid(), m.grid(), "residual");
    require_same_grid(u.grid(), *spec.grid, "residual");
    Field r = Field::zeros(u.grid_ptr());
    if (which == Equation::Hjb) {
        const KernelOperator kop(spec.kernel, spec.grid);
        r = d_dt(u) + laplacian(u) - 0.5 * (k * grad_dot(u, u)) + kop.apply(m) + spec.f * m;
    } else {
        r = d_dt(m) - laplacian(m) - drift_divergence(k, m, u);
    }
    const Field masked = interior_mask(r);
    return {std::move(r), norm_l2(masked), masked.max_abs()};
}

namespace {

// Max |D^alpha f| over multi-indices (in x and t) of total order in [1, order_left].
void derivative_bound(const Field& f, std::size_t first_axis, int order_left, double& acc) {
    if (order_left == 0) return;
    const std::size_t axes = f.grid().dim() + 1;
    for (std::size_t a = first_axis; a < axes; ++a) {
        const Field d = a == f.grid().dim() ? d_dt(f) : d_dx(f, a);
        acc = std::max(acc, d.max_abs());
        derivative_bound(d, a, order_left - 1, acc);
    }
}

}  // namespace

TripleBounds triple_bounds(const MFGTriple& triple) {
    TripleBounds b;
    b.n2 = std::max(triple.u.max_abs(), triple.m.max_abs());
    derivative_bound(triple.u, 0, 4, b.n2);
    derivative_bound(triple.m, 0, 4, b.n2);
    b.n3 = triple.k.max_abs();
    for (const auto& gk : gradient(triple.k)) b.n3 = std::max(b.n3, gk.max_abs());
    const SpaceField u0 = snapshot(triple.u, 0.5 * triple.u.grid().T());
    b.c = 0.5 * grad_dot(u0, u0).min();
    return b;
}

}  // namespace mfglab

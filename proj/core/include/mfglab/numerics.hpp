#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mfglab {

/// Composite trapezoid weights for n equispaced nodes with spacing h.
std::vector<double> trapezoid_weights(std::size_t n, double h);

/// Solves a tridiagonal system in place (Thomas algorithm). `lower[0]` and
/// `upper[n-1]` are ignored. The right-hand side is overwritten by the solution.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least squares fit of y = slope * x + intercept.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least squares fit of log(y) against log(x). Non-positive pairs are skipped.
LinearFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Iterated 1-D integral of f over [lo, hi] with a fixed-order Gauss-Legendre rule.
double gauss_legendre(const std::function<double(double)>& f, double lo, double hi);

/// Worker count for parallel sections: MFGLAB_THREADS if set, else hardware concurrency.
std::size_t thread_cap();

/// Runs body(i) for i in [0, count) on at most thread_cap() threads. Exceptions from
/// the body are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mfglab

#pragma once

#include "mfglab/grid.hpp"

#include <cmath>
#include <numbers>

namespace mfglab::support {

inline constexpr double kPi = std::numbers::pi;

inline Prism unit_prism() { return Prism{1.0, 2.0, {}, 1.0}; }
inline Prism square_prism() { return Prism{1.0, 2.0, {1.0}, 1.0}; }

inline GridPtr line_grid(std::size_t nx, std::size_t nt) { return make_grid(unit_prism(), {nx}, nt); }

/// Largest |f - g| over nodes whose every index lies at least `margin` from an axis end.
inline double interior_gap(const Field& f, const Field& g, std::size_t margin = 1) {
    const Grid& grid = f.grid();
    double worst = 0.0;
    for (std::size_t n = 0; n < grid.nt(); ++n) {
        for (std::size_t s = 0; s < grid.space_size(); ++s) {
            bool inside = true;
            for (std::size_t ax = 0; ax < grid.dim(); ++ax) {
                const std::size_t i = grid.axis_index(s, ax);
                inside = inside && i >= margin && i + margin < grid.nx(ax);
            }
            if (inside) worst = std::max(worst, std::abs(f(s, n) - g(s, n)));
        }
    }
    return worst;
}

}  // namespace mfglab::support

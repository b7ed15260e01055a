#pragma once

#include "mfglab/grid.hpp"
#include "mfglab/mfg.hpp"

namespace mfglab::scenarios {

/// u = x1^2 + t + 0.1 sum_{i>=2} x_i^2.
ClosedForm quadratic_value();
/// u = x1^2 + 0.1 t sin(pi x1) + 0.1 sum_{i>=2} x_i^2; |u_x1| >= 2a - 0.1 pi T.
ClosedForm default_value();

/// 1 + 0.2 sin(pi (x1 - a) / (b - a)).
SpaceField default_coefficient(GridPtr grid);
/// sin(pi (x1 - a) / (b - a)) prod_{i>=2} cos(pi x_i / (2 B_i)).
SpaceField coefficient_perturbation(GridPtr grid);
/// 1 + 0.2 cos(pi (x1 - a) / (b - a)).
SpaceField default_density(GridPtr grid);

}  // namespace mfglab::scenarios

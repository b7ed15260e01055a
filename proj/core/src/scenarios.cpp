#include "mfglab/scenarios.hpp"

#include <cmath>
#include <numbers>

namespace mfglab::scenarios {

namespace {
constexpr double pi = std::numbers::pi;

double transverse_square(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += x[i] * x[i];
    return s;
}
}  // namespace

ClosedForm quadratic_value() {
    ClosedForm cf;
    cf.value = [](std::span<const double> x, double t) { return x[0] * x[0] + t + 0.1 * transverse_square(x); };
    cf.u_t = [](std::span<const double>, double) { return 1.0; };
    cf.laplacian = [](std::span<const double> x, double) { return 2.0 + 0.2 * static_cast<double>(x.size() - 1); };
    cf.gradient = [](std::span<const double> x, double, std::span<double> g) {
        g[0] = 2.0 * x[0];
        for (std::size_t i = 1; i < x.size(); ++i) g[i] = 0.2 * x[i];
    };
    return cf;
}

ClosedForm default_value() {
    ClosedForm cf;
    cf.value = [](std::span<const double> x, double t) {
        return x[0] * x[0] + 0.1 * t * std::sin(pi * x[0]) + 0.1 * transverse_square(x);
    };
    cf.u_t = [](std::span<const double> x, double) { return 0.1 * std::sin(pi * x[0]); };
    cf.laplacian = [](std::span<const double> x, double t) {
        return 2.0 - 0.1 * t * pi * pi * std::sin(pi * x[0]) + 0.2 * static_cast<double>(x.size() - 1);
    };
    cf.gradient = [](std::span<const double> x, double t, std::span<double> g) {
        g[0] = 2.0 * x[0] + 0.1 * t * pi * std::cos(pi * x[0]);
        for (std::size_t i = 1; i < x.size(); ++i) g[i] = 0.2 * x[i];
    };
    return cf;
}

SpaceField default_coefficient(GridPtr grid) {
    const Prism p = grid->prism();
    return SpaceField::sample(std::move(grid), [p](std::span<const double> x) {
        return 1.0 + 0.2 * std::sin(pi * (x[0] - p.a) / (p.b - p.a));
    });
}

SpaceField coefficient_perturbation(GridPtr grid) {
    const Prism p = grid->prism();
    return SpaceField::sample(std::move(grid), [p](std::span<const double> x) {
        double v = std::sin(pi * (x[0] - p.a) / (p.b - p.a));
        for (std::size_t i = 1; i < x.size(); ++i) v *= std::cos(pi * x[i] / (2.0 * p.half_widths[i - 1]));
        return v;
    });
}

SpaceField default_density(GridPtr grid) {
    const Prism p = grid->prism();
    return SpaceField::sample(std::move(grid), [p](std::span<const double> x) {
        return 1.0 + 0.2 * std::cos(pi * (x[0] - p.a) / (p.b - p.a));
    });
}

}  // namespace mfglab::scenarios

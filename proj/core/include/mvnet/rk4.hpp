#pragma once

#include <functional>
#include <span>
#include <vector>

namespace mvnet {

/// dx = f(t, x). Implementations write every entry of dx.
using VectorField = std::function<void(double t, std::span<const double> x, std::span<double> dx)>;

/// Called after every accepted (clamped) step.
using StepObserver = std::function<void(double t, std::span<const double> x)>;

/// Per-coordinate clamp box. Coordinates whose bounds are both finite are
/// also guarded: a pre-clamp value outside [lo - slack, hi + slack] raises
/// StepTooLarge.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    static Box unit(std::size_t dim) { return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)}; }
};

struct Rk4Options {
    double h = 1e-3;
    double slack = 0.01;
};

/// Samples of the state on a grid; x[k] is the state at t[k].
struct Samples {
    std::vector<double> t;
    std::vector<std::vector<double>> x;
};

/// Fixed-step RK4 from t = 0 over [0, grid.back()]. Steps are taken at
/// multiples of h; grid values are obtained by linear interpolation between
/// the bracketing steps. The grid must be nondecreasing and start at >= 0.
Samples integrate(std::vector<double> x0, const VectorField& f, std::span<const double> grid, const Box& box,
                  const Rk4Options& opts = {}, const StepObserver& observer = {});

/// points + 1 equispaced values over [0, horizon].
std::vector<double> uniform_grid(double horizon, int points);

}  // namespace mvnet

#include "mvnet/rk4.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mvnet/config.hpp"
#include "mvnet/error.hpp"

namespace mvnet {

Samples integrate(std::vector<double> x, const VectorField& f, std::span<const double> grid, const Box& box,
                  const Rk4Options& opts, const StepObserver& observer) {
    const std::size_t dim = x.size();
    if (box.lo.size() != dim || box.hi.size() != dim) throw Error("integrate: box dimension mismatch");
    if (!(opts.h > 0.0)) throw Error("integrate: step must be positive");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (grid[k] < grid[k - 1]) throw Error("integrate: grid must be nondecreasing");
    if (!grid.empty() && grid.front() < 0.0) throw Error("integrate: grid starts before 0");

    Samples out;
    out.t.assign(grid.begin(), grid.end());
    out.x.reserve(grid.size());
    if (grid.empty()) return out;

    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim), prev(dim);
    const double h = opts.h;
    const double horizon = grid.back();
    std::size_t next = 0;
    double t = 0.0;
    long long step = 0;

    auto emit_until = [&](double t_lo, double t_hi, bool last) {
        while (next < grid.size() && (grid[next] <= t_hi || last)) {
            const double g = grid[next];
            if (t_hi <= t_lo || g >= t_hi) {
                out.x.push_back(x);
            } else {
                const double w = (g - t_lo) / (t_hi - t_lo);
                std::vector<double> y(dim);
                for (std::size_t i = 0; i < dim; ++i) y[i] = prev[i] + w * (x[i] - prev[i]);
                out.x.push_back(std::move(y));
            }
            ++next;
        }
    };

    prev = x;
    emit_until(0.0, 0.0, false);
    while (next < grid.size()) {
        prev = x;
        f(t, x, k1);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
        f(t + 0.5 * h, tmp, k2);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
        f(t + 0.5 * h, tmp, k3);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = x[i] + h * k3[i];
        f(t + h, tmp, k4);
        for (std::size_t i = 0; i < dim; ++i) {
            double v = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            const double lo = box.lo[i];
            const double hi = box.hi[i];
            if (std::isfinite(lo) && std::isfinite(hi) &&
                (!(v >= lo - opts.slack) || !(v <= hi + opts.slack))) {
                throw StepTooLarge("coordinate " + std::to_string(i) + " left its box at t=" + format_double(t + h) +
                                   " (value " + format_double(v) + "); reduce the step");
            }
            if (!std::isfinite(v)) throw StepTooLarge("non-finite state at t=" + format_double(t + h));
            x[i] = std::clamp(v, lo, hi);
        }
        ++step;
        const double t_new = static_cast<double>(step) * h;
        if (observer) observer(t_new, x);
        emit_until(t, t_new, t_new >= horizon);
        t = t_new;
    }
    return out;
}

std::vector<double> uniform_grid(double horizon, int points) {
    if (points < 1) throw Error("uniform_grid: need at least one interval");
    std::vector<double> g(static_cast<std::size_t>(points) + 1);
    for (int k = 0; k <= points; ++k) g[static_cast<std::size_t>(k)] = horizon * k / points;
    return g;
}

}  // namespace mvnet

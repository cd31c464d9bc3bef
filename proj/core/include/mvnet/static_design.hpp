#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mvnet/meanfield.hpp"
#include "mvnet/network.hpp"
#include "mvnet/rk4.hpp"
#include "mvnet/virus_model.hpp"

namespace mvnet {

/// Convex, increasing, piecewise-linear cost with c(0) = 0: slope[k] applies
/// on [breaks[k], breaks[k+1]), breaks[0] = 0. A single slope is linear.
struct PiecewiseLinearCost {
    std::vector<double> breaks{0.0};
    std::vector<double> slopes{1.0};

    static PiecewiseLinearCost linear(double c) { return {{0.0}, {c}}; }
    double value(double beta) const;
    /// Right derivative (subgradient) at beta.
    double slope_at(double beta) const;
    void validate() const;  // throws InvalidModel
};

/// One cost per host. File format: "host slope0 [break1 slope1 ...]" per line,
/// '#' comments; unlisted hosts cost 1 per unit rate.
std::vector<PiecewiseLinearCost> parse_costs(const std::string& text, int hosts);
std::vector<PiecewiseLinearCost> uniform_costs(int hosts);

struct Feasibility {
    bool feasible = false;
    double margin = 0.0;  // lambda_min(B - Qbar - eps I)
};

/// Certificate via the Jacobi eigensolver.
Feasibility feasible(const Eigen::MatrixXd& qbar, int sets, std::span<const double> beta, double eps);

/// mu_1(Qbar) + eps.
double uniform_rate(const Network& net, const VirusModel& model, double eps);
double uniform_rate(const Eigen::MatrixXd& qbar, double eps);

struct DesignOptions {
    int max_iters = 600;
    double constraint_tol = 1e-6;
    double rel_tol = 1e-6;
    int window = 50;
    /// Per-host bisection polish is applied when n * |R| is at most this.
    int polish_max_dim = 64;
};

struct DesignResult {
    std::vector<double> beta;
    double cost = 0.0;
    double margin = 0.0;  // Jacobi certificate
    int iterations = 0;
    bool converged = false;
};

/// min sum_i c_i(beta_i) s.t. mu_1(Qbar + eps I - B) <= 0, beta >= 0.
/// Throws NotConverged only when no feasible iterate was found.
DesignResult design_min_cost(const Eigen::MatrixXd& qbar, int sets, double eps,
                             std::span<const PiecewiseLinearCost> costs, const DesignOptions& opts = {});

struct DecayReport {
    bool pass = true;
    double worst_ratio = 0.0;  // max_t ||x(t)|| / (sqrt(n) e^{-eps t})
    double worst_time = 0.0;
    std::vector<double> t;
    std::vector<double> norm;
};

/// Integrates the subset dynamics (no filtering) with static beta and checks
/// ||x(t)||_2 <= sqrt(n) e^{-eps t} (1 + 1e-6) on the grid.
DecayReport verify_exponential_decay(const Network& net, const VirusModel& model, std::span<const double> beta,
                                     double eps, std::span<const double> init, std::span<const double> grid,
                                     const Rk4Options& opts = {});

}  // namespace mvnet

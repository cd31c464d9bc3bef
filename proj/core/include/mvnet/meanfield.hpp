#pragma once

#include <span>
#include <vector>

#include "mvnet/network.hpp"
#include "mvnet/rk4.hpp"
#include "mvnet/virus_model.hpp"

namespace mvnet {

/// Independence-approximation dynamics over per-host subset probabilities.
///
/// State layout: x[i * r + k] = x_i^S for S = model.realizable_sets()[k],
/// r = model.num_sets(). The clean probability is 1 - sum_S x_i^S.
class MeanField {
public:
    MeanField(const Network& net, const VirusModel& model);

    const Network& network() const noexcept { return *net_; }
    const VirusModel& model() const noexcept { return *model_; }
    int hosts() const noexcept { return net_->size(); }
    int sets() const noexcept { return r_; }
    int viruses() const noexcept { return m_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(hosts()) * static_cast<std::size_t>(r_); }

    /// dx for the subset dynamics with patch rates beta and filtering q.
    void subset_derivative(std::span<const double> x, std::span<const double> beta, double q,
                           std::span<double> dx) const;

    /// xbar_i = sum_{S != clean} x_i^S.
    void any_marginal(std::span<const double> x, std::span<double> xbar) const;
    /// xbar_v[i * m + v] = sum_{S containing v} x_i^S.
    void virus_marginals(std::span<const double> x, std::span<double> xbar_v) const;

    /// State with x_i^{v} = p[i * m + v] on singletons, everything else 0.
    std::vector<double> singleton_state(std::span<const double> p) const;

private:
    struct Inflow {
        int from;  // set index, -1 for clean
        VirusId virus;
        double lambda;
    };
    struct SetInfo {
        VirusSet set;
        std::vector<Inflow> inflow;
        std::vector<std::pair<VirusId, double>> outflow;  // v not in S, lambda^{S,v}
        std::vector<VirusId> members;
    };

    const Network* net_;
    const VirusModel* model_;
    int r_;
    int m_;
    std::vector<SetInfo> info_;
};

/// Aggregate dynamics (1 - xbar_i) sum_j sum_v lambda^{clean,v} xbar_j^v - beta_i xbar_i.
void aggregate_derivative(const Network& net, const VirusModel& model, std::span<const double> xbar,
                          std::span<const double> xbar_v, std::span<const double> beta, std::span<double> dx);

/// Closed form using xbar_j^v <= xbar_j: (1 - xbar_i) lambda_hat sum_j xbar_j - beta_i xbar_i.
void aggregate_closed_derivative(const Network& net, const VirusModel& model, std::span<const double> xbar,
                                 std::span<const double> beta, std::span<double> dx);

enum class Dynamics { Subset, Aggregate };

/// Per-host marginals on a grid, common to all engines.
struct HostTrajectory {
    int hosts = 0;
    int viruses = 0;
    std::vector<double> t;
    std::vector<std::vector<double>> any;    // [k][i]
    std::vector<std::vector<double>> virus;  // [k][i * m + v]; empty when unavailable
    std::vector<std::vector<double>> beta;   // [k][i]
    std::vector<double> q;                   // [k]

    double mean_any(std::size_t k) const;
    double max_any(std::size_t k) const;
    double mean_virus(std::size_t k, VirusId v) const;
    double mean_beta(std::size_t k) const;
};

/// Integrates static-parameter dynamics from singleton initial probabilities
/// init[i * m + v]. Aggregate dynamics start from xbar_i = sum_v init and use
/// the closed form.
HostTrajectory simulate_meanfield(const Network& net, const VirusModel& model, std::span<const double> init,
                                  std::span<const double> beta, double q, Dynamics dynamics,
                                  std::span<const double> grid, const Rk4Options& opts = {});

}  // namespace mvnet

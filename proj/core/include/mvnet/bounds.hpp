#pragma once

#include <span>
#include <string>
#include <vector>

#include "mvnet/meanfield.hpp"
#include "mvnet/network.hpp"
#include "mvnet/virus_model.hpp"

namespace mvnet {

/// One bound evaluated against an observation. For "upper" bounds the
/// observation must not exceed the bound; for "lower" bounds it must not fall
/// below it. slack = bound - observed (upper) or observed - bound (lower),
/// at the worst sample, relative tolerance included in `satisfied`.
struct BoundReport {
    std::string name;
    std::string direction;    // "upper" or "lower"
    bool approximate = false;
    double bound = 0.0;
    double observed = 0.0;
    double slack = 0.0;
    double tolerance = 0.0;   // absolute band allowed before failing
    bool satisfied = true;
    std::vector<std::pair<std::string, double>> inputs;
};

/// Lower curve for beta_i(t) under the monotone law: asymptote |N_i| lambda_min,
/// approached at rate alpha |V| / (|N_i| lambda_min).
double patch_rate_lower_curve(double t, double alpha, double beta0, int degree, double lambda_min, int viruses);

struct PatchSumBound {
    double sum = 0.0;      // lambda_max |E| + 2 |N| sqrt(alpha)
    double average = 0.0;  // lambda_max d_avg + 2 sqrt(alpha)
};

PatchSumBound final_patch_sum_bound(double lambda_max, std::size_t edges, int hosts, double alpha);

struct FilterRateInputs {
    double gamma = 0.0;
    int viruses = 1;
    double beta_max = 0.0;
    double beta_min = 0.0;
    double p_min = 0.0;
    int d_min = 0;
    int hosts = 0;
    double lambda_max = 0.0;
    double mu_min = 0.0;
};

/// (gamma |V| beta_max / (p_min - q)) (d_min + ((|N| - d_min) lambda_max - beta_min) / (mu_min (p_min - q))).
/// Throws DomainError if q >= p_min.
double filter_rate_upper(double q, const FilterRateInputs& in);

FilterRateInputs filter_rate_inputs(double gamma, std::span<const double> beta, const Network& net,
                                    const VirusModel& model);

/// min(p_bar + |V| gamma sum_i |N_i| / beta_i, 1).
double q_final_bound(double gamma, std::span<const double> beta, std::span<const int> degrees, int viruses,
                     double p_bar);

/// Relative band allowed for the approximation-based bounds.
constexpr double kApproximationBand = 0.05;

/// Checks a monotone-law trajectory against the lower curve (worst host and
/// sample, band kApproximationBand * asymptote) and, when every beta_i(0)
/// exceeds lambda_max |N_i|, the final patch-sum bound.
std::vector<BoundReport> monotone_bound_reports(const HostTrajectory& tr, const Network& net,
                                                const VirusModel& model, double alpha);

/// Checks a filter-law trajectory with static beta against the final-value
/// bound on q and the rate bound on dq/dt (forward differences on the grid,
/// samples with q < p_min only, band kApproximationBand * bound).
std::vector<BoundReport> filter_bound_reports(const HostTrajectory& tr, const Network& net,
                                              const VirusModel& model, double gamma,
                                              std::span<const double> beta);

}  // namespace mvnet

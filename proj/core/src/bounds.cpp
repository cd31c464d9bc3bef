#include "mvnet/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvnet/error.hpp"

namespace mvnet {

double patch_rate_lower_curve(double t, double alpha, double beta0, int degree, double lambda_min, int viruses) {
    const double asym = degree * lambda_min;
    if (asym <= 0.0) return beta0;
    const double rate = alpha * viruses / asym;
    return asym + (beta0 - asym) * std::exp(-rate * t);
}

PatchSumBound final_patch_sum_bound(double lambda_max, std::size_t edges, int hosts, double alpha) {
    PatchSumBound b;
    const double root = std::sqrt(alpha);
    b.sum = lambda_max * static_cast<double>(edges) + 2.0 * hosts * root;
    const double d_avg = hosts > 0 ? 2.0 * static_cast<double>(edges) / hosts : 0.0;
    b.average = lambda_max * d_avg + 2.0 * root;
    return b;
}

double filter_rate_upper(double q, const FilterRateInputs& in) {
    const double gap = in.p_min - q;
    if (!(gap > 0.0)) throw DomainError("filter_rate_upper requires q < p_min");
    return in.gamma * in.viruses * in.beta_max / gap *
           (in.d_min + ((in.hosts - in.d_min) * in.lambda_max - in.beta_min) / (in.mu_min * gap));
}

FilterRateInputs filter_rate_inputs(double gamma, std::span<const double> beta, const Network& net,
                                    const VirusModel& model) {
    FilterRateInputs in;
    in.gamma = gamma;
    in.viruses = model.size();
    if (!beta.empty()) {
        in.beta_max = *std::max_element(beta.begin(), beta.end());
        in.beta_min = *std::min_element(beta.begin(), beta.end());
    }
    in.p_min = model.p_min();
    in.d_min = net.size() > 0 ? net.min_degree() : 0;
    in.hosts = net.size();
    in.lambda_max = model.lambda_max();
    in.mu_min = model.mu_min();
    return in;
}

double q_final_bound(double gamma, std::span<const double> beta, std::span<const int> degrees, int viruses,
                     double p_bar) {
    if (beta.size() != degrees.size()) throw InvalidModel("q_final_bound: beta and degrees differ in length");
    double s = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) {
        if (!(beta[i] > 0.0)) throw DomainError("q_final_bound requires beta_i > 0");
        s += degrees[i] / beta[i];
    }
    return std::min(p_bar + viruses * gamma * s, 1.0);
}

std::vector<BoundReport> monotone_bound_reports(const HostTrajectory& tr, const Network& net,
                                                const VirusModel& model, double alpha) {
    std::vector<BoundReport> out;
    if (tr.t.empty()) return out;
    const int n = net.size();
    const auto& beta0 = tr.beta.front();

    BoundReport curve;
    curve.name = "patch_rate_lower_curve";
    curve.direction = "lower";
    curve.approximate = true;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        for (int i = 0; i < n; ++i) {
            const double asym = net.degree(i) * model.lambda_min();
            if (asym <= 0.0) continue;
            const double b = patch_rate_lower_curve(tr.t[k], alpha, beta0[i], net.degree(i), model.lambda_min(),
                                                    model.size());
            const double rel = (tr.beta[k][i] - b) / asym;
            if (rel < worst) {
                worst = rel;
                curve.bound = b;
                curve.observed = tr.beta[k][i];
                curve.slack = tr.beta[k][i] - b;
                curve.tolerance = kApproximationBand * asym;
                curve.inputs = {{"t", tr.t[k]}, {"host", i}, {"degree", net.degree(i)}, {"asymptote", asym}};
            }
        }
    }
    curve.satisfied = !(curve.slack < -curve.tolerance);
    curve.inputs.emplace_back("alpha", alpha);
    curve.inputs.emplace_back("lambda_min", model.lambda_min());
    curve.inputs.emplace_back("relative_slack", std::isfinite(worst) ? worst : 0.0);
    out.push_back(std::move(curve));

    bool precondition = true;
    for (int i = 0; i < n; ++i)
        if (!(beta0[i] > model.lambda_max() * net.degree(i))) precondition = false;
    const PatchSumBound pb = final_patch_sum_bound(model.lambda_max(), net.num_edges(), n, alpha);
    BoundReport sum;
    sum.name = "final_patch_sum_bound";
    sum.direction = "upper";
    sum.bound = pb.sum;
    for (double b : tr.beta.back()) sum.observed += b;
    sum.slack = sum.bound - sum.observed;
    sum.tolerance = 1e-9 * std::abs(sum.bound);
    // Outside its precondition the bound is reported but not enforced.
    sum.satisfied = !precondition || sum.slack >= -sum.tolerance;
    double initial = 0.0;
    for (double b : beta0) initial += b;
    sum.inputs = {{"lambda_max", model.lambda_max()},
                  {"edges", static_cast<double>(net.num_edges())},
                  {"hosts", n},
                  {"alpha", alpha},
                  {"average_bound", pb.average},
                  {"initial_sum", initial},
                  {"precondition", precondition ? 1.0 : 0.0}};
    out.push_back(std::move(sum));
    return out;
}

std::vector<BoundReport> filter_bound_reports(const HostTrajectory& tr, const Network& net,
                                              const VirusModel& model, double gamma,
                                              std::span<const double> beta) {
    std::vector<BoundReport> out;
    if (tr.t.empty()) return out;
    const std::vector<int> degrees = net.degrees();

    BoundReport fin;
    fin.name = "q_final_bound";
    fin.direction = "upper";
    fin.bound = q_final_bound(gamma, beta, degrees, model.size(), model.p_max());
    fin.observed = tr.q.back();
    fin.slack = fin.bound - fin.observed;
    fin.tolerance = 1e-9;
    fin.satisfied = fin.slack >= -fin.tolerance;
    fin.inputs = {{"gamma", gamma}, {"p_bar", model.p_max()}, {"viruses", model.size()}};
    out.push_back(std::move(fin));

    const FilterRateInputs in = filter_rate_inputs(gamma, beta, net, model);
    BoundReport rate;
    rate.name = "filter_rate_upper";
    rate.direction = "upper";
    rate.approximate = true;
    double worst = std::numeric_limits<double>::infinity();
    int samples = 0;
    for (std::size_t k = 0; k + 1 < tr.t.size(); ++k) {
        const double q = tr.q[k];
        if (!(q < in.p_min)) continue;
        const double dq = (tr.q[k + 1] - q) / (tr.t[k + 1] - tr.t[k]);
        const double b = filter_rate_upper(q, in);
        ++samples;
        if ((b - dq) / b < worst) {
            worst = (b - dq) / b;
            rate.bound = b;
            rate.observed = dq;
            rate.slack = b - dq;
            rate.tolerance = kApproximationBand * b;
            rate.inputs = {{"t", tr.t[k]}, {"q", q}};
        }
    }
    rate.satisfied = !(rate.slack < -rate.tolerance);
    rate.inputs.emplace_back("p_min", in.p_min);
    rate.inputs.emplace_back("samples", samples);
    out.push_back(std::move(rate));
    return out;
}

}  // namespace mvnet

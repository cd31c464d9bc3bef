#include "mvnet/static_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "mvnet/config.hpp"
#include "mvnet/error.hpp"
#include "mvnet/linalg.hpp"
#include "mvnet/passivity.hpp"

namespace mvnet {

double PiecewiseLinearCost::value(double beta) const {
    double c = 0.0;
    for (std::size_t k = 0; k < slopes.size(); ++k) {
        const double lo = breaks[k];
        const double hi = k + 1 < breaks.size() ? breaks[k + 1] : std::numeric_limits<double>::infinity();
        if (beta <= lo) break;
        c += slopes[k] * (std::min(beta, hi) - lo);
    }
    return c;
}

double PiecewiseLinearCost::slope_at(double beta) const {
    std::size_t k = 0;
    while (k + 1 < breaks.size() && beta >= breaks[k + 1]) ++k;
    return slopes[k];
}

void PiecewiseLinearCost::validate() const {
    if (slopes.empty() || breaks.size() != slopes.size() || breaks.front() != 0.0)
        throw InvalidModel("cost: need one slope per segment starting at 0");
    for (std::size_t k = 0; k < slopes.size(); ++k) {
        if (!(slopes[k] >= 0.0)) throw InvalidModel("cost: slopes must be nonnegative");
        if (k > 0 && !(breaks[k] > breaks[k - 1])) throw InvalidModel("cost: breakpoints must increase");
        if (k > 0 && slopes[k] < slopes[k - 1]) throw InvalidModel("cost: slopes must be nondecreasing (convexity)");
    }
}

std::vector<PiecewiseLinearCost> uniform_costs(int hosts) {
    return std::vector<PiecewiseLinearCost>(static_cast<std::size_t>(hosts), PiecewiseLinearCost::linear(1.0));
}

std::vector<PiecewiseLinearCost> parse_costs(const std::string& text, int hosts) {
    std::vector<PiecewiseLinearCost> out = uniform_costs(hosts);
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line(text.data() + pos, end - pos);
        ++line_no;
        pos = end + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tok = split_ws(line);
        if (tok.empty()) continue;
        const ConfigEntry e{line_no, "cost", std::string(line)};
        if (tok.size() % 2 != 0) throw ConfigError(line_no, "cost", "expected: host slope0 [break1 slope1 ...]");
        const long long host = parse_int(e, tok[0]);
        if (host < 0 || host >= hosts) throw ConfigError(line_no, "cost", "host index out of range");
        PiecewiseLinearCost c{{0.0}, {parse_double(e, tok[1])}};
        for (std::size_t k = 2; k + 1 < tok.size(); k += 2) {
            c.breaks.push_back(parse_double(e, tok[k]));
            c.slopes.push_back(parse_double(e, tok[k + 1]));
        }
        try {
            c.validate();
        } catch (const InvalidModel& err) {
            throw ConfigError(line_no, "cost", err.what());
        }
        out[static_cast<std::size_t>(host)] = std::move(c);
        if (end == text.size()) break;
    }
    return out;
}

Feasibility feasible(const Eigen::MatrixXd& qbar, int sets, std::span<const double> beta, double eps) {
    Eigen::MatrixXd m = -qbar;
    const Eigen::Index dim = m.rows();
    for (Eigen::Index k = 0; k < dim; ++k) m(k, k) += beta[static_cast<std::size_t>(k / sets)] - eps;
    Feasibility f;
    f.margin = dim == 0 ? 0.0 : min_eigenvalue(m);
    f.feasible = f.margin >= -1e-9;
    return f;
}

double uniform_rate(const Eigen::MatrixXd& qbar, double eps) { return (qbar.size() == 0 ? 0.0 : max_eigenvalue(qbar)) + eps; }

double uniform_rate(const Network& net, const VirusModel& model, double eps) {
    return uniform_rate(build_Qbar(net, model), eps);
}

namespace {

// Top eigenpair of Qbar + eps I - B; the inner loop uses Eigen's
// tridiagonal solver for speed, the final certificate uses Jacobi.
struct Top {
    double g = 0.0;
    Eigen::VectorXd w;  // per-host squared norm of the top eigenvector block
};

Top top_pair(const Eigen::MatrixXd& qbar, int sets, const std::vector<double>& beta, double eps) {
    Eigen::MatrixXd m = qbar;
    const Eigen::Index dim = m.rows();
    for (Eigen::Index k = 0; k < dim; ++k) m(k, k) += eps - beta[static_cast<std::size_t>(k / sets)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Top t;
    t.g = es.eigenvalues()(dim - 1);
    const Eigen::VectorXd v = es.eigenvectors().col(dim - 1);
    const Eigen::Index n = dim / sets;
    t.w = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < dim; ++k) t.w(k / sets) += v(k) * v(k);
    return t;
}

double total_cost(std::span<const PiecewiseLinearCost> costs, const std::vector<double>& beta) {
    double c = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) c += costs[i].value(beta[i]);
    return c;
}

}  // namespace

DesignResult design_min_cost(const Eigen::MatrixXd& qbar, int sets, double eps,
                             std::span<const PiecewiseLinearCost> costs, const DesignOptions& opts) {
    if (!(eps > 0.0)) throw InvalidModel("design: eps must be positive");
    if (sets < 1 || qbar.rows() % sets != 0) throw InvalidModel("design: Qbar dimension is not a multiple of the set count");
    const auto n = static_cast<std::size_t>(qbar.rows() / sets);
    if (costs.size() != n) throw InvalidModel("design: expected one cost per host");
    for (const auto& c : costs) c.validate();
    DesignResult res;
    if (n == 0) {
        res.converged = true;
        return res;
    }

    const double u = uniform_rate(qbar, eps);
    std::vector<double> beta(n, std::max(u, 0.0));
    std::vector<double> best;
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<double> cand(n), avg(n, 0.0);
    double avg_weight = 0.0;
    std::vector<double> history;
    const double scale = std::max(u, eps);

    auto consider = [&](const std::vector<double>& b, double g) {
        // Uniform shift by max(g, 0) makes any iterate feasible.
        const double shift = std::max(g, 0.0);
        for (std::size_t i = 0; i < n; ++i) cand[i] = b[i] + shift;
        const double c = total_cost(costs, cand);
        if (c < best_cost) {
            best_cost = c;
            best = cand;
        }
    };

    int k = 0;
    int descent_steps = 0;
    for (; k < opts.max_iters; ++k) {
        const Top top = top_pair(qbar, sets, beta, eps);
        consider(beta, top.g);
        history.push_back(best_cost);
        if (top.g <= opts.constraint_tol && static_cast<int>(history.size()) > opts.window) {
            const double old = history[history.size() - 1 - static_cast<std::size_t>(opts.window)];
            if (std::abs(old - best_cost) <= opts.rel_tol * std::max(std::abs(best_cost), 1e-300)) {
                res.converged = true;
                break;
            }
        }
        if (top.g > opts.constraint_tol) {
            // Polyak step on the constraint (target value 0).
            const double wn = top.w.squaredNorm();
            for (std::size_t i = 0; i < n; ++i) beta[i] += top.g / wn * top.w(static_cast<Eigen::Index>(i));
        } else {
            ++descent_steps;
            std::vector<double> d(n);
            double dn = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                d[i] = costs[i].slope_at(beta[i]);
                dn = std::max(dn, std::abs(d[i]));
            }
            if (dn == 0.0) {
                res.converged = true;
                break;
            }
            const double t = 0.05 * scale / (dn * std::sqrt(static_cast<double>(descent_steps)));
            for (std::size_t i = 0; i < n; ++i) {
                avg[i] += t * beta[i];
                beta[i] = std::max(0.0, beta[i] - t * d[i]);
            }
            avg_weight += t;
        }
    }
    res.iterations = k;

    if (avg_weight > 0.0) {
        std::vector<double> a(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = avg[i] / avg_weight;
        consider(a, top_pair(qbar, sets, a, eps).g);
    }
    if (best.empty()) throw NotConverged("design: no feasible iterate found");

    // Per-host reduction by bisection on small problems.
    if (static_cast<int>(qbar.rows()) <= opts.polish_max_dim) {
        for (int pass = 0; pass < 3; ++pass) {
            for (std::size_t i = 0; i < n; ++i) {
                double lo = 0.0;
                double hi = best[i];
                std::vector<double> trial = best;
                trial[i] = lo;
                if (top_pair(qbar, sets, trial, eps).g <= 0.0) {
                    best[i] = 0.0;
                    continue;
                }
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    trial[i] = mid;
                    if (top_pair(qbar, sets, trial, eps).g <= 0.0) hi = mid; else lo = mid;
                }
                best[i] = hi;
            }
        }
    }

    // Certify with the Jacobi solver; repair by a uniform shift if needed.
    Feasibility f = feasible(qbar, sets, best, eps);
    if (f.margin < 0.0) {
        const double shift = -f.margin * (1.0 + 1e-12) + 1e-13 * scale;
        for (auto& b : best) b += shift;
        f = feasible(qbar, sets, best, eps);
    }
    res.beta = std::move(best);
    res.cost = total_cost(costs, res.beta);
    res.margin = f.margin;
    return res;
}

DecayReport verify_exponential_decay(const Network& net, const VirusModel& model, std::span<const double> beta,
                                     double eps, std::span<const double> init, std::span<const double> grid,
                                     const Rk4Options& opts) {
    MeanField mf(net, model);
    const std::vector<double> b(beta.begin(), beta.end());
    auto f = [&](double, std::span<const double> x, std::span<double> dx) { mf.subset_derivative(x, b, 0.0, dx); };
    const Samples s = integrate(mf.singleton_state(init), f, grid, Box::unit(mf.dim()), opts);
    DecayReport rep;
    const double root_n = std::sqrt(static_cast<double>(net.size()));
    for (std::size_t k = 0; k < s.t.size(); ++k) {
        double sq = 0.0;
        for (double v : s.x[k]) sq += v * v;
        const double norm = std::sqrt(sq);
        const double env = root_n * std::exp(-eps * s.t[k]);
        rep.t.push_back(s.t[k]);
        rep.norm.push_back(norm);
        const double ratio = env > 0.0 ? norm / env : (norm > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_time = s.t[k];
        }
        if (norm > env * (1.0 + 1e-6)) rep.pass = false;
    }
    return rep;
}

}  // namespace mvnet

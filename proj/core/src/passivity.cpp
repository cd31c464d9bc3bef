#include "mvnet/passivity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mvnet/linalg.hpp"

namespace mvnet {

Eigen::VectorXd build_Qi(int degree, const VirusModel& model) {
    const auto sets = model.realizable_sets();
    const int m = model.size();
    Eigen::VectorXd d(static_cast<Eigen::Index>(sets.size()));
    for (std::size_t k = 0; k < sets.size(); ++k) {
        const VirusSet s = sets[k];
        double acc = 0.0;
        for (VirusId v = 0; v < m; ++v) {
            if (!contains(s, v)) continue;
            const VirusSet cv = model.competitors(v);
            const double weight = std::ldexp(1.0, (m - popcount(cv)) - 1);
            const VirusSet base = s & ~single(v);
            // All R subset of C_v, ascending.
            VirusSet r = 0;
            do {
                acc += weight * model.lambda(base | r, v);
                r = (r - cv) & cv;
            } while (r != 0);
        }
        d(static_cast<Eigen::Index>(k)) = degree / 6.0 * acc;
    }
    return d;
}

Eigen::MatrixXd build_H(const VirusModel& model) {
    const auto sets = model.realizable_sets();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sets.size()), model.size());
    for (std::size_t k = 0; k < sets.size(); ++k)
        for (VirusId v = 0; v < model.size(); ++v)
            if (contains(sets[k], v)) h(static_cast<Eigen::Index>(k), v) = 1.0;
    return h;
}

Eigen::VectorXd build_Lambda(const VirusModel& model) {
    Eigen::VectorXd l = Eigen::VectorXd::Zero(model.size());
    for (VirusId v = 0; v < model.size(); ++v) {
        double acc = model.lambda(kClean, v);
        for (VirusSet s : model.realizable_sets())
            if (!contains(s, v)) acc += model.lambda(s, v);
        l(v) = acc / 12.0;
    }
    return l;
}

Eigen::MatrixXd build_Q(const VirusModel& model) {
    const Eigen::MatrixXd h = build_H(model);
    return h * build_Lambda(model).asDiagonal() * h.transpose();
}

Eigen::MatrixXd build_Qbar(const Network& net, const VirusModel& model) {
    const int n = net.size();
    const int r = model.num_sets();
    const Eigen::MatrixXd q = build_Q(model);
    Eigen::MatrixXd qbar = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n) * r, static_cast<Eigen::Index>(n) * r);
    for (const auto& [i, j] : net.edges()) {
        qbar.block(i * r, j * r, r, r) = q;
        qbar.block(j * r, i * r, r, r) = q;
    }
    std::map<int, Eigen::VectorXd> cache;
    for (HostId i = 0; i < n; ++i) {
        const int d = net.degree(i);
        auto it = cache.find(d);
        if (it == cache.end()) it = cache.emplace(d, build_Qi(d, model)).first;
        qbar.block(i * r, i * r, r, r).diagonal() += it->second;
    }
    return qbar;
}

PassivityReport passivity_report(const Network& net, const VirusModel& model) {
    PassivityReport rep;
    const Eigen::MatrixXd q = build_Q(model);
    std::map<int, double> by_degree;
    for (HostId i = 0; i < net.size(); ++i) {
        const int d = net.degree(i);
        auto it = by_degree.find(d);
        if (it == by_degree.end()) {
            Eigen::MatrixXd m = d * q;
            m.diagonal() += build_Qi(d, model);
            it = by_degree.emplace(d, max_eigenvalue(m)).first;
        }
        rep.per_host.push_back(it->second);
    }
    rep.rho_bound = rep.per_host.empty() ? 0.0 : *std::max_element(rep.per_host.begin(), rep.per_host.end());
    rep.mu1_qbar = max_eigenvalue(build_Qbar(net, model));
    return rep;
}

double passivity_index_bound(const Network& net, const VirusModel& model) {
    const Eigen::MatrixXd q = build_Q(model);
    std::map<int, double> by_degree;
    double rho = 0.0;
    for (HostId i = 0; i < net.size(); ++i) {
        const int d = net.degree(i);
        if (by_degree.count(d) != 0) continue;
        Eigen::MatrixXd m = d * q;
        m.diagonal() += build_Qi(d, model);
        const double mu = max_eigenvalue(m);
        by_degree.emplace(d, mu);
        rho = by_degree.size() == 1 ? mu : std::max(rho, mu);
    }
    return rho;
}

StorageCheck::StorageCheck(const Network& net, const VirusModel& model) : mf_(net, model), q_(build_Q(model)) {
    for (HostId i = 0; i < net.size(); ++i) qi_.push_back(build_Qi(net.degree(i), model));
}

double StorageCheck::storage_derivative(std::span<const double> x, std::span<const double> beta) const {
    std::vector<double> dx(mf_.dim());
    mf_.subset_derivative(x, beta, 0.0, dx);
    double w = 0.0;
    for (std::size_t k = 0; k < dx.size(); ++k) w += x[k] * dx[k];
    return w;
}

double StorageCheck::violation(std::span<const double> x, std::span<const double> beta) const {
    const int r = mf_.sets();
    const Network& net = mf_.network();
    double bound = 0.0;
    for (HostId i = 0; i < net.size(); ++i) {
        const Eigen::Map<const Eigen::VectorXd> xi(x.data() + static_cast<std::ptrdiff_t>(i * r), r);
        bound += xi.dot(qi_[static_cast<std::size_t>(i)].cwiseProduct(xi));
        bound -= beta[static_cast<std::size_t>(i)] * xi.squaredNorm();
    }
    for (const auto& [i, j] : net.edges()) {
        const Eigen::Map<const Eigen::VectorXd> xi(x.data() + static_cast<std::ptrdiff_t>(i * r), r);
        const Eigen::Map<const Eigen::VectorXd> xj(x.data() + static_cast<std::ptrdiff_t>(j * r), r);
        bound += 2.0 * xi.dot(q_ * xj);
    }
    return storage_derivative(x, beta) - bound;
}

double StorageCheck::violation_blockdiag(std::span<const double> x, std::span<const double> beta) const {
    const int r = mf_.sets();
    const Network& net = mf_.network();
    double bound = 0.0;
    for (HostId i = 0; i < net.size(); ++i) {
        const Eigen::Map<const Eigen::VectorXd> xi(x.data() + static_cast<std::ptrdiff_t>(i * r), r);
        bound += xi.dot(qi_[static_cast<std::size_t>(i)].cwiseProduct(xi));
        bound += net.degree(i) * xi.dot(q_ * xi);
        bound -= beta[static_cast<std::size_t>(i)] * xi.squaredNorm();
    }
    return storage_derivative(x, beta) - bound;
}

double verify_storage_decrement(std::span<const std::vector<double>> states, std::span<const double> beta,
                                const Network& net, const VirusModel& model) {
    StorageCheck check(net, model);
    double worst = 0.0;
    bool first = true;
    for (const auto& x : states) {
        const double v = check.violation(x, beta);
        worst = first ? v : std::max(worst, v);
        first = false;
    }
    return worst;
}

}  // namespace mvnet

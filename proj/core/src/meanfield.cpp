#include "mvnet/meanfield.hpp"

#include <algorithm>

#include "mvnet/error.hpp"

namespace mvnet {

MeanField::MeanField(const Network& net, const VirusModel& model)
    : net_(&net), model_(&model), r_(model.num_sets()), m_(model.size()) {
    info_.reserve(static_cast<std::size_t>(r_));
    for (VirusSet s : model.realizable_sets()) {
        SetInfo si;
        si.set = s;
        for (const Predecessor& p : model.predecessors(s)) {
            si.inflow.push_back({model.set_index(p.from), p.virus, model.lambda(p.from, p.virus)});
        }
        for (VirusId v = 0; v < m_; ++v) {
            if (contains(s, v)) {
                si.members.push_back(v);
            } else {
                si.outflow.emplace_back(v, model.lambda(s, v));
            }
        }
        info_.push_back(std::move(si));
    }
}

void MeanField::any_marginal(std::span<const double> x, std::span<double> xbar) const {
    const int n = hosts();
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k < r_; ++k) s += x[static_cast<std::size_t>(i * r_ + k)];
        xbar[static_cast<std::size_t>(i)] = s;
    }
}

void MeanField::virus_marginals(std::span<const double> x, std::span<double> xbar_v) const {
    const int n = hosts();
    std::fill(xbar_v.begin(), xbar_v.begin() + static_cast<std::ptrdiff_t>(n * m_), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < r_; ++k) {
            const double xs = x[static_cast<std::size_t>(i * r_ + k)];
            for (VirusId v : info_[static_cast<std::size_t>(k)].members) xbar_v[static_cast<std::size_t>(i * m_ + v)] += xs;
        }
    }
}

void MeanField::subset_derivative(std::span<const double> x, std::span<const double> beta, double q,
                                  std::span<double> dx) const {
    const int n = hosts();
    std::vector<double> xv(static_cast<std::size_t>(n * m_));
    virus_marginals(x, xv);

    // sigma[i * m + v] = sum over neighbors j of xbar_j^v.
    std::vector<double> sigma(static_cast<std::size_t>(n * m_), 0.0);
    for (const auto& [a, b] : net_->edges()) {
        for (int v = 0; v < m_; ++v) {
            sigma[static_cast<std::size_t>(a * m_ + v)] += xv[static_cast<std::size_t>(b * m_ + v)];
            sigma[static_cast<std::size_t>(b * m_ + v)] += xv[static_cast<std::size_t>(a * m_ + v)];
        }
    }

    for (int i = 0; i < n; ++i) {
        const double* xi = x.data() + static_cast<std::ptrdiff_t>(i * r_);
        const double* si = sigma.data() + static_cast<std::ptrdiff_t>(i * m_);
        double clean = 1.0;
        for (int k = 0; k < r_; ++k) clean -= xi[k];
        const double d = net_->degree(i);
        const double b = beta[static_cast<std::size_t>(i)];
        for (int k = 0; k < r_; ++k) {
            const SetInfo& info = info_[static_cast<std::size_t>(k)];
            double acc = 0.0;
            for (const Inflow& in : info.inflow) {
                const double xt = in.from < 0 ? clean : xi[in.from];
                acc += in.lambda * xt * si[in.virus];
            }
            double out = 0.0;
            for (const auto& [v, lam] : info.outflow) out += lam * si[v];
            double filt = 0.0;
            if (q != 0.0) {
                for (VirusId v : info.members) filt += model_->mu(v) * (d - si[v]);
                filt *= q;
            }
            dx[static_cast<std::size_t>(i * r_ + k)] = acc - (out + filt + b) * xi[k];
        }
    }
}

std::vector<double> MeanField::singleton_state(std::span<const double> p) const {
    std::vector<double> x(dim(), 0.0);
    for (int i = 0; i < hosts(); ++i) {
        for (VirusId v = 0; v < m_; ++v) {
            x[static_cast<std::size_t>(i * r_ + model_->set_index(single(v)))] = p[static_cast<std::size_t>(i * m_ + v)];
        }
    }
    return x;
}

void aggregate_derivative(const Network& net, const VirusModel& model, std::span<const double> xbar,
                          std::span<const double> xbar_v, std::span<const double> beta, std::span<double> dx) {
    const int n = net.size();
    const int m = model.size();
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);  // sum_v lambda^{clean,v} xbar_j^v
    for (int j = 0; j < n; ++j) {
        for (VirusId v = 0; v < m; ++v) w[static_cast<std::size_t>(j)] += model.lambda(kClean, v) * xbar_v[static_cast<std::size_t>(j * m + v)];
    }
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (HostId j : net.neighbors(i)) s += w[static_cast<std::size_t>(j)];
        const auto ii = static_cast<std::size_t>(i);
        dx[ii] = (1.0 - xbar[ii]) * s - beta[ii] * xbar[ii];
    }
}

void aggregate_closed_derivative(const Network& net, const VirusModel& model, std::span<const double> xbar,
                                 std::span<const double> beta, std::span<double> dx) {
    const double lh = model.lambda_hat();
    for (int i = 0; i < net.size(); ++i) {
        double s = 0.0;
        for (HostId j : net.neighbors(i)) s += xbar[static_cast<std::size_t>(j)];
        const auto ii = static_cast<std::size_t>(i);
        dx[ii] = (1.0 - xbar[ii]) * lh * s - beta[ii] * xbar[ii];
    }
}

double HostTrajectory::mean_any(std::size_t k) const {
    const auto& a = any.at(k);
    double s = 0.0;
    for (double v : a) s += v;
    return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

double HostTrajectory::max_any(std::size_t k) const {
    const auto& a = any.at(k);
    return a.empty() ? 0.0 : *std::max_element(a.begin(), a.end());
}

double HostTrajectory::mean_virus(std::size_t k, VirusId v) const {
    const auto& a = virus.at(k);
    double s = 0.0;
    for (int i = 0; i < hosts; ++i) s += a[static_cast<std::size_t>(i * viruses + v)];
    return hosts == 0 ? 0.0 : s / hosts;
}

double HostTrajectory::mean_beta(std::size_t k) const {
    const auto& a = beta.at(k);
    double s = 0.0;
    for (double v : a) s += v;
    return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

HostTrajectory simulate_meanfield(const Network& net, const VirusModel& model, std::span<const double> init,
                                  std::span<const double> beta, double q, Dynamics dynamics,
                                  std::span<const double> grid, const Rk4Options& opts) {
    const int n = net.size();
    const int m = model.size();
    if (init.size() != static_cast<std::size_t>(n * m)) throw InvalidModel("initial probabilities: expected hosts x viruses entries");
    if (beta.size() != static_cast<std::size_t>(n)) throw InvalidModel("beta: expected one rate per host");

    HostTrajectory out;
    out.hosts = n;
    out.viruses = m;
    out.t.assign(grid.begin(), grid.end());
    const std::vector<double> bvec(beta.begin(), beta.end());

    if (dynamics == Dynamics::Subset) {
        MeanField mf(net, model);
        auto f = [&](double, std::span<const double> x, std::span<double> dx) { mf.subset_derivative(x, bvec, q, dx); };
        Samples s = integrate(mf.singleton_state(init), f, grid, Box::unit(mf.dim()), opts);
        for (const auto& x : s.x) {
            std::vector<double> a(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(n * m));
            mf.any_marginal(x, a);
            mf.virus_marginals(x, v);
            out.any.push_back(std::move(a));
            out.virus.push_back(std::move(v));
        }
    } else {
        std::vector<double> x0(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i)
            for (int v = 0; v < m; ++v) x0[static_cast<std::size_t>(i)] += init[static_cast<std::size_t>(i * m + v)];
        auto f = [&](double, std::span<const double> x, std::span<double> dx) { aggregate_closed_derivative(net, model, x, bvec, dx); };
        Samples s = integrate(std::move(x0), f, grid, Box::unit(static_cast<std::size_t>(n)), opts);
        out.any = std::move(s.x);
    }
    out.beta.assign(out.t.size(), bvec);
    out.q.assign(out.t.size(), q);
    return out;
}

}  // namespace mvnet

#include "mvnet/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvnet/error.hpp"

namespace mvnet {

void ControllerConfig::validate() const {
    if (kind == ControllerKind::None) return;
    if (patches() && !(alpha > 0.0)) throw InvalidModel("controller: alpha must be positive");
    if (!(gamma >= 0.0)) throw InvalidModel("controller: gamma must be nonnegative");
    if (!(beta_floor > 0.0)) throw InvalidModel("controller: beta_floor must be positive");
    if (!(q_cap > 0.0 && q_cap <= 1.0)) throw InvalidModel("controller: q_cap must lie in (0, 1]");
}

ControllerKind parse_controller_kind(const std::string& s) {
    if (s == "none") return ControllerKind::None;
    if (s == "monotone") return ControllerKind::Monotone;
    if (s == "nonmonotone") return ControllerKind::NonMonotone;
    if (s == "filter") return ControllerKind::Filter;
    if (s == "joint") return ControllerKind::Joint;
    throw InvalidModel("unknown controller '" + s + "' (none|monotone|nonmonotone|filter|joint)");
}

std::string to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::None: return "none";
        case ControllerKind::Monotone: return "monotone";
        case ControllerKind::NonMonotone: return "nonmonotone";
        case ControllerKind::Filter: return "filter";
        case ControllerKind::Joint: return "joint";
    }
    return "none";
}

NonMonotoneMode parse_nonmonotone_mode(const std::string& s) {
    if (s == "projection") return NonMonotoneMode::Projection;
    if (s == "positive-part") return NonMonotoneMode::PositivePart;
    throw InvalidModel("unknown non-monotone mode '" + s + "' (projection|positive-part)");
}

std::string to_string(NonMonotoneMode m) {
    return m == NonMonotoneMode::Projection ? "projection" : "positive-part";
}

double monotone_patch_deriv(double alpha, double xbar) { return alpha * xbar; }

double nonmonotone_patch_deriv(double alpha, double gamma, double x, double beta, double beta_floor,
                               NonMonotoneMode mode) {
    const double raw = alpha * x - gamma * (1.0 - x);
    if (mode == NonMonotoneMode::PositivePart) return std::max(raw, 0.0);
    if (raw < 0.0 && beta <= beta_floor) return 0.0;
    return raw;
}

double fixed_point_x(double alpha, double gamma) { return gamma / (alpha + gamma); }

double fixed_point_beta(double alpha, double gamma, double lambda, int degree) {
    return alpha / (alpha + gamma) * degree * lambda;
}

NonMonotoneFixedPoint fixed_point(double alpha, double gamma, const VirusModel& model, const Network& net) {
    if (model.size() != 1) throw MultiVirusUnsupported("the non-monotone law is defined for a single virus");
    NonMonotoneFixedPoint fp;
    fp.x = fixed_point_x(alpha, gamma);
    const double lambda = model.lambda(kClean, 0);
    for (HostId i = 0; i < net.size(); ++i) fp.beta.push_back(fixed_point_beta(alpha, gamma, lambda, net.degree(i)));
    return fp;
}

double filter_deriv(double gamma, double q, std::span<const double> xbar_v, const Network& net,
                    const VirusModel& model, double q_cap) {
    if (q >= q_cap) return 0.0;
    const int m = model.size();
    double acc = 0.0;
    for (const auto& [i, j] : net.edges()) {
        for (VirusId v = 0; v < m; ++v) {
            const double xi = xbar_v[static_cast<std::size_t>(i * m + v)];
            const double xj = xbar_v[static_cast<std::size_t>(j * m + v)];
            acc += model.mu(v) * (xi * (1.0 - xj) + xj * (1.0 - xi));
        }
    }
    return gamma * acc;
}

EventController::EventController(ControllerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void EventController::on_event(const Event& e, SystemState& state) {
    if (e.kind == EventKind::Patch && cfg_.patches()) {
        double& b = state.beta[static_cast<std::size_t>(e.host)];
        const bool infected = state.infection[static_cast<std::size_t>(e.host)] != kClean;
        if (infected) {
            b += cfg_.alpha / b;
        } else if (cfg_.kind == ControllerKind::NonMonotone) {
            b = std::max(b - cfg_.gamma / b, cfg_.beta_floor);
        }
    } else if (e.kind == EventKind::FilterDetect && cfg_.filters()) {
        state.q = std::min(state.q + cfg_.gamma / state.q, cfg_.q_cap);
    }
}

std::unique_ptr<EventHook> make_event_controller(const ControllerConfig& cfg) {
    if (cfg.kind == ControllerKind::None) return nullptr;
    return std::make_unique<EventController>(cfg);
}

Eigen::MatrixXd linearized_jacobian(const Network& net, double alpha, double gamma, double lambda) {
    const int n = net.size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    const double s = alpha + gamma;
    for (HostId i = 0; i < n; ++i) {
        a(i, i) = -net.degree(i) * lambda;
        for (HostId j : net.neighbors(i)) a(i, j) = lambda * alpha / s;
        a(i, n + i) = -gamma / s;
        a(n + i, i) = s;
    }
    return a;
}

double lasalle_gamma(double beta, double threshold, double alpha) {
    if (beta > threshold) return 0.0;
    const double d = threshold - beta;
    return d * d / (2.0 * alpha);
}

CoSimResult co_simulate(const Network& net, const VirusModel& model, const CoSimConfig& cfg) {
    const ControllerConfig& ctl = cfg.controller;
    ctl.validate();
    const int n = net.size();
    const int m = model.size();
    const auto nn = static_cast<std::size_t>(n);
    if (cfg.init.size() != static_cast<std::size_t>(n * m)) throw InvalidModel("initial probabilities: expected hosts x viruses entries");
    if (cfg.beta0.size() != nn) throw InvalidModel("beta0: expected one rate per host");
    if (ctl.filters() && cfg.dynamics != Dynamics::Subset) throw InvalidModel("filtering laws need subset dynamics");
    if (ctl.kind == ControllerKind::NonMonotone && m != 1) throw MultiVirusUnsupported("the non-monotone law is defined for a single virus");
    if (ctl.filters() && !(cfg.q0 > 0.0)) throw InvalidModel("filtering laws need q0 > 0");
    if (cfg.q0 > 0.0 && cfg.dynamics != Dynamics::Subset) throw InvalidModel("filtering needs subset dynamics");

    const bool subset = cfg.dynamics == Dynamics::Subset;
    MeanField mf(net, model);
    const std::size_t xdim = subset ? mf.dim() : nn;
    const std::size_t dim = xdim + nn + 1;
    const double lh = model.lambda_hat();

    std::vector<double> z(dim, 0.0);
    if (subset) {
        const std::vector<double> x0 = mf.singleton_state(cfg.init);
        std::copy(x0.begin(), x0.end(), z.begin());
    } else {
        for (int i = 0; i < n; ++i)
            for (int v = 0; v < m; ++v) z[static_cast<std::size_t>(i)] += cfg.init[static_cast<std::size_t>(i * m + v)];
    }
    const double beta_lo = ctl.kind == ControllerKind::NonMonotone ? ctl.beta_floor : 0.0;
    for (std::size_t i = 0; i < nn; ++i) z[xdim + i] = std::max(cfg.beta0[i], beta_lo);
    z[xdim + nn] = cfg.q0;

    Box box;
    box.lo.assign(dim, 0.0);
    box.hi.assign(dim, 1.0);
    for (std::size_t i = 0; i < nn; ++i) {
        box.lo[xdim + i] = beta_lo;
        box.hi[xdim + i] = std::numeric_limits<double>::infinity();
    }
    box.hi[xdim + nn] = ctl.q_cap;

    // Scratch buffers; the field is evaluated sequentially.
    std::vector<double> xbar(nn), xv(static_cast<std::size_t>(n * m)), dxs(xdim), dxbar(nn);

    auto field = [&](double, std::span<const double> s, std::span<double> ds) {
        const auto x = s.subspan(0, xdim);
        const auto beta = s.subspan(xdim, nn);
        const double q = s[xdim + nn];
        const double q_eff = subset ? q : 0.0;
        if (subset) {
            mf.subset_derivative(x, beta, q_eff, ds.subspan(0, xdim));
            mf.any_marginal(x, xbar);
        } else {
            aggregate_closed_derivative(net, model, x, beta, ds.subspan(0, xdim));
            std::copy(x.begin(), x.end(), xbar.begin());
        }
        for (std::size_t i = 0; i < nn; ++i) {
            double db = 0.0;
            switch (ctl.kind) {
                case ControllerKind::Monotone:
                case ControllerKind::Joint: db = monotone_patch_deriv(ctl.alpha, xbar[i]); break;
                case ControllerKind::NonMonotone:
                    db = nonmonotone_patch_deriv(ctl.alpha, ctl.gamma, xbar[i], beta[i], ctl.beta_floor, ctl.mode);
                    break;
                default: break;
            }
            ds[xdim + i] = db;
        }
        double dq = 0.0;
        if (ctl.filters()) {
            mf.virus_marginals(x, xv);
            dq = filter_deriv(ctl.gamma, q, xv, net, model, ctl.q_cap);
        }
        ds[xdim + nn] = dq;
    };

    CoSimResult res;
    Certificates& cert = res.certificates;
    const bool lasalle_law = ctl.kind == ControllerKind::Monotone || ctl.kind == ControllerKind::Joint;
    std::vector<double> ds(dim), prev = z;
    auto storage = [&](std::span<const double> s) {
        double w = 0.0;
        if (subset) {
            mf.any_marginal(s.subspan(0, xdim), xbar);
        } else {
            std::copy(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(nn), xbar.begin());
        }
        for (std::size_t i = 0; i < nn; ++i) {
            w += 0.5 * xbar[i] * xbar[i];
            w += lasalle_gamma(s[xdim + i], net.degree(static_cast<HostId>(i)) * lh, ctl.alpha);
        }
        return w;
    };
    double w_prev = lasalle_law ? storage(z) : 0.0;
    bool first = true;
    auto observer = [&](double t, std::span<const double> s) {
        if (!cfg.certificates) return;
        field(t, s, ds);
        // xbar now holds the marginals of s.
        if (subset) {
            for (std::size_t i = 0; i < nn; ++i) {
                double acc = 0.0;
                for (int k = 0; k < mf.sets(); ++k) acc += ds[i * static_cast<std::size_t>(mf.sets()) + static_cast<std::size_t>(k)];
                dxbar[i] = acc;
            }
        } else {
            std::copy(ds.begin(), ds.begin() + static_cast<std::ptrdiff_t>(nn), dxbar.begin());
        }
        double wdot = 0.0, bound = 0.0, gdot = 0.0;
        for (std::size_t i = 0; i < nn; ++i) {
            const double b = s[xdim + i];
            const double th = net.degree(static_cast<HostId>(i)) * lh;
            wdot += xbar[i] * dxbar[i];
            bound += (th - b) * xbar[i] * xbar[i];
            if (b < th) gdot += -(th - b) / ctl.alpha * ds[xdim + i];
            cert.beta_decrease = std::max(cert.beta_decrease, prev[xdim + i] - b);
        }
        cert.q_decrease = std::max(cert.q_decrease, prev[xdim + nn] - s[xdim + nn]);
        const double p2 = wdot - bound;
        cert.aggregate_storage = first ? p2 : std::max(cert.aggregate_storage, p2);
        if (lasalle_law) {
            const double l = wdot + gdot;
            const double w = storage(s);
            cert.lasalle = first ? l : std::max(cert.lasalle, l);
            cert.lasalle_step = first ? w - w_prev : std::max(cert.lasalle_step, w - w_prev);
            w_prev = w;
        }
        first = false;
        prev.assign(s.begin(), s.end());
    };

    const Samples samples = integrate(z, field, cfg.grid, box, cfg.rk4, observer);

    HostTrajectory& tr = res.trajectory;
    tr.hosts = n;
    tr.viruses = m;
    tr.t = samples.t;
    for (const auto& s : samples.x) {
        const std::span<const double> sv(s);
        std::vector<double> a(nn);
        if (subset) {
            mf.any_marginal(sv.subspan(0, xdim), a);
            std::vector<double> v(static_cast<std::size_t>(n * m));
            mf.virus_marginals(sv.subspan(0, xdim), v);
            tr.virus.push_back(std::move(v));
        } else {
            std::copy(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(nn), a.begin());
        }
        tr.any.push_back(std::move(a));
        tr.beta.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(xdim), s.begin() + static_cast<std::ptrdiff_t>(xdim + nn));
        tr.q.push_back(s[xdim + nn]);
    }
    return res;
}

}  // namespace mvnet

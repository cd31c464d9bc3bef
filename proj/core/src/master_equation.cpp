#include "mvnet/master_equation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "mvnet/error.hpp"
#include "mvnet/markov.hpp"

namespace mvnet {

std::size_t joint_state_count(int hosts, int sets) {
    std::size_t total = 1;
    for (int i = 0; i < hosts; ++i) {
        total *= static_cast<std::size_t>(sets) + 1;
        if (total > kMaxJointStates) return kMaxJointStates + 1;
    }
    return total;
}

MasterEquationResult master_equation(const Network& net, const VirusModel& model, std::span<const double> init,
                                     std::span<const double> beta, double q, std::span<const double> grid,
                                     const Rk4Options& opts) {
    const int n = net.size();
    const int m = model.size();
    const int r = model.num_sets();
    const std::size_t states = joint_state_count(n, r);
    if (states > kMaxJointStates) {
        throw StateSpaceTooLarge("joint state space exceeds " + std::to_string(kMaxJointStates) + " states");
    }
    if (init.size() != static_cast<std::size_t>(n * m)) throw InvalidModel("initial law: expected hosts x viruses entries");
    if (beta.size() != static_cast<std::size_t>(n)) throw InvalidModel("beta: expected one rate per host");
    const std::size_t base = static_cast<std::size_t>(r) + 1;
    const auto sets = model.realizable_sets();

    auto decode = [&](std::size_t s, std::vector<VirusSet>& out) {
        for (int i = 0; i < n; ++i) {
            const std::size_t d = s % base;
            s /= base;
            out[static_cast<std::size_t>(i)] = d == 0 ? kClean : sets[d - 1];
        }
    };
    std::vector<std::size_t> place(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) place[static_cast<std::size_t>(i)] = i == 0 ? 1 : place[static_cast<std::size_t>(i - 1)] * base;

    // Sparse generator rows: transitions out of each joint state.
    std::vector<std::size_t> row_start(states + 1, 0);
    std::vector<std::size_t> target;
    std::vector<double> rate;
    std::vector<double> out_rate(states, 0.0);
    SystemState st;
    st.infection.assign(static_cast<std::size_t>(n), kClean);
    st.beta.assign(beta.begin(), beta.end());
    st.q = q;
    for (std::size_t s = 0; s < states; ++s) {
        row_start[s] = target.size();
        decode(s, st.infection);
        for (const Event& e : event_rates(st, net, model)) {
            const auto h = static_cast<std::size_t>(e.host);
            const VirusSet before = st.infection[h];
            const VirusSet after = e.kind == EventKind::Infection ? model.infect_target(before, e.virus) : kClean;
            const std::size_t d_before = before == kClean ? 0 : static_cast<std::size_t>(model.set_index(before)) + 1;
            const std::size_t d_after = after == kClean ? 0 : static_cast<std::size_t>(model.set_index(after)) + 1;
            const std::size_t t = s - d_before * place[h] + d_after * place[h];
            target.push_back(t);
            rate.push_back(e.rate);
            out_rate[s] += e.rate;
        }
    }
    row_start[states] = target.size();

    // Product initial distribution.
    std::vector<double> p0(states, 1.0);
    std::vector<VirusSet> cfg(static_cast<std::size_t>(n));
    for (std::size_t s = 0; s < states; ++s) {
        decode(s, cfg);
        double pr = 1.0;
        for (int i = 0; i < n; ++i) {
            const VirusSet si = cfg[static_cast<std::size_t>(i)];
            double clean = 1.0;
            for (int v = 0; v < m; ++v) clean -= init[static_cast<std::size_t>(i * m + v)];
            if (si == kClean) {
                pr *= clean;
            } else if (popcount(si) == 1) {
                pr *= init[static_cast<std::size_t>(i * m + std::countr_zero(si))];
            } else {
                pr = 0.0;
            }
        }
        p0[s] = pr;
    }

    auto f = [&](double, std::span<const double> p, std::span<double> dp) {
        for (std::size_t s = 0; s < states; ++s) dp[s] = -out_rate[s] * p[s];
        for (std::size_t s = 0; s < states; ++s) {
            const double ps = p[s];
            if (ps == 0.0) continue;
            for (std::size_t e = row_start[s]; e < row_start[s + 1]; ++e) dp[target[e]] += ps * rate[e];
        }
    };
    const Samples samples = integrate(std::move(p0), f, grid, Box::unit(states), opts);

    MasterEquationResult out;
    out.marginals.hosts = n;
    out.marginals.viruses = m;
    out.marginals.t.assign(grid.begin(), grid.end());
    for (const auto& p : samples.x) {
        std::vector<double> sub(static_cast<std::size_t>(n * r), 0.0);
        double mass = 0.0;
        for (std::size_t s = 0; s < states; ++s) {
            mass += p[s];
            std::size_t code = s;
            for (int i = 0; i < n; ++i) {
                const std::size_t d = code % base;
                code /= base;
                if (d != 0) sub[static_cast<std::size_t>(i * r) + d - 1] += p[s];
            }
        }
        out.max_mass_error = std::max(out.max_mass_error, std::abs(mass - 1.0));
        std::vector<double> any(static_cast<std::size_t>(n), 0.0), vir(static_cast<std::size_t>(n * m), 0.0);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < r; ++k) {
                const double x = sub[static_cast<std::size_t>(i * r + k)];
                any[static_cast<std::size_t>(i)] += x;
                for (int v = 0; v < m; ++v)
                    if (contains(sets[static_cast<std::size_t>(k)], v)) vir[static_cast<std::size_t>(i * m + v)] += x;
            }
        }
        out.marginals.any.push_back(std::move(any));
        out.marginals.virus.push_back(std::move(vir));
        out.subsets.push_back(std::move(sub));
    }
    out.marginals.beta.assign(out.marginals.t.size(), std::vector<double>(beta.begin(), beta.end()));
    out.marginals.q.assign(out.marginals.t.size(), q);
    return out;
}

}  // namespace mvnet

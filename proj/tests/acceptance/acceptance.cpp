// Acceptance suite: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvnet/adaptive.hpp"
#include "mvnet/bounds.hpp"
#include "mvnet/linalg.hpp"
#include "mvnet/markov.hpp"
#include "mvnet/master_equation.hpp"
#include "mvnet/passivity.hpp"
#include "mvnet/rng.hpp"
#include "mvnet/scenario.hpp"
#include "mvnet/static_design.hpp"
#include "support/charpoly.hpp"

using namespace mvnet;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [fail]");
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const double kRates[2] = {1.0, 2.0};

Network fig3_network() { return Network::erdos_renyi(100, 0.2, 1); }

Scenario meanfield_only(const std::string& name) {
    Scenario s = load_scenario(name);
    s.engine = Engine::MeanField;
    return s;
}

double z_score(double diff, double se) {
    if (se > 0.0) return std::abs(diff) / se;
    return std::abs(diff) > 1e-12 ? INFINITY : 0.0;
}

// Oracle equivalence on small instances.
void criterion_1(Outcome& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const double one[1] = {1.2};
    struct Case {
        std::string name;
        VirusModel model;
        std::vector<double> init_per_host;
    };
    const std::vector<Case> models{{"1 virus", VirusModel::coexisting(one), {0.5}},
                                   {"coexisting", VirusModel::coexisting(kRates), {0.3, 0.2}},
                                   {"competing", VirusModel::competing(kRates), {0.3, 0.2}}};
    const std::vector<std::pair<std::string, Network>> nets{
        {"path2", Network::path(2)}, {"path3", Network::path(3)}, {"triangle", Network::complete(3)}};
    std::vector<double> grid;
    for (int k = 1; k <= 10; ++k) grid.push_back(0.2 * k);

    double worst_z = 0.0;
    std::string worst_case;
    for (const auto& [nname, net] : nets) {
        for (const auto& c : models) {
            const int n = net.size();
            std::vector<double> init, beta;
            for (int i = 0; i < n; ++i) {
                init.insert(init.end(), c.init_per_host.begin(), c.init_per_host.end());
                beta.push_back(1.2 + 0.3 * i);
            }
            const MasterEquationResult me = master_equation(net, c.model, init, beta, 0.0, grid);
            MonteCarloConfig mc;
            mc.init = init;
            mc.beta0 = beta;
            mc.grid = grid;
            mc.trials = 10000;
            mc.seed = 1;
            const MonteCarloResult r = monte_carlo(net, c.model, mc);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                double z = z_score(r.mean_any[k] - me.marginals.mean_any(k), r.se_any[k]);
                for (VirusId v = 0; v < c.model.size(); ++v) {
                    const auto vi = static_cast<std::size_t>(v);
                    z = std::max(z, z_score(r.mean_virus[k][vi] - me.marginals.mean_virus(k, v), r.se_virus[k][vi]));
                }
                if (z > worst_z) {
                    worst_z = z;
                    worst_case = nname + "/" + c.name + " t=" + fmt(grid[k]);
                }
            }
        }
    }
    out.require(worst_z <= 3.0, "worst |z| " + fmt(worst_z) + " at " + worst_case + " (9 cases, 1e4 trials)");

    const double one_host[1] = {1.0};
    const MasterEquationResult single =
        master_equation(Network::path(1), VirusModel::coexisting(one_host), std::vector<double>{1.0},
                        std::vector<double>{1.3}, 0.0, grid);
    double err = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
        err = std::max(err, std::abs(single.marginals.mean_any(k) - std::exp(-1.3 * grid[k])));
    out.require(err <= 1e-6, "1-host exp error " + fmt(err));
    const double secs = seconds_since(t0);
    out.require(secs < 120.0, "runtime " + fmt(secs) + " s");
}

// Mean-field domination on the coexisting and competing scenarios.
void criterion_2(Outcome& out) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const std::string name : {"fig3-coexist", "fig3-compete"}) {
        const Scenario s = load_scenario(name);
        const ScenarioResult res = run_scenario(s);
        const ScenarioRun& run = res.runs.front();
        out.require(run.domination_gap && *run.domination_gap <= 0.0,
                    name + " MC-3SE minus mean-field max " + fmt(run.domination_gap.value_or(INFINITY)));

        const Network net = s.network.build();
        const VirusModel model = s.model.build();
        const auto init = initial_probabilities(s, net.size(), model.size());
        const auto beta = initial_rates(s, net.size());
        Rk4Options opts;
        opts.h = s.h;
        const auto grid = s.grid();
        const HostTrajectory agg =
            simulate_meanfield(net, model, init, beta, 0.0, Dynamics::Aggregate, grid, opts);
        const HostTrajectory sub = simulate_meanfield(net, model, init, beta, 0.0, Dynamics::Subset, grid, opts);
        double worst = -INFINITY;
        for (std::size_t k = 0; k < grid.size(); ++k)
            for (std::size_t i = 0; i < agg.any[k].size(); ++i) worst = std::max(worst, sub.any[k][i] - agg.any[k][i]);
        out.require(worst <= 1e-6, name + " subset minus aggregate max " + fmt(worst));
    }
    const double secs = seconds_since(t0);
    out.require(secs < 300.0, "runtime " + fmt(secs) + " s");
}

// Storage-function certificates.
void criterion_3(Outcome& out) {
    const Network net = fig3_network();
    for (int kind = 0; kind < 2; ++kind) {
        const VirusModel model = kind == 0 ? VirusModel::coexisting(kRates) : VirusModel::competing(kRates);
        const std::string tag = kind == 0 ? "coexisting" : "competing";
        const StorageCheck chk(net, model);
        const int r = model.num_sets();
        const std::vector<double> beta(100, 10.0);

        // Uniform points of each host's probability simplex.
        Rng rng(derive_seed(7, static_cast<std::uint64_t>(kind)));
        std::vector<std::vector<double>> states;
        for (int s = 0; s < 10000; ++s) {
            std::vector<double> x(static_cast<std::size_t>(100 * r));
            for (int i = 0; i < 100; ++i) {
                std::vector<double> e(static_cast<std::size_t>(r + 1));
                double tot = 0.0;
                for (auto& v : e) tot += (v = rng.exponential(1.0));
                for (int k = 0; k < r; ++k) x[static_cast<std::size_t>(i * r + k)] = e[static_cast<std::size_t>(k + 1)] / tot;
            }
            states.push_back(std::move(x));
        }
        const double random_worst = verify_storage_decrement(states, beta, net, model);
        out.require(random_worst <= 1e-8, tag + " random states " + fmt(random_worst));

        const MeanField mf(net, model);
        const std::vector<double> init(200, 0.2);
        std::vector<std::vector<double>> traj;
        integrate(mf.singleton_state(init),
                  [&](double, std::span<const double> x, std::span<double> dx) { mf.subset_derivative(x, beta, 0.0, dx); },
                  uniform_grid(5.0, 50), Box::unit(mf.dim()), {},
                  [&](double, std::span<const double> x) { traj.emplace_back(x.begin(), x.end()); });
        const double traj_worst = verify_storage_decrement(traj, beta, net, model);
        out.require(traj_worst <= 1e-8, tag + " trajectory " + fmt(traj_worst));
    }

    const ScenarioResult res = run_scenario(meanfield_only("fig4a-adaptive-patch"));
    for (const ScenarioRun& run : res.runs) {
        const Certificates& c = run.meanfield->certificates;
        const double worst = std::max({c.aggregate_storage, c.lasalle, c.lasalle_step});
        out.require(worst <= 1e-8 && c.beta_decrease <= 0.0, "adaptive " + run.label + " certificates " + fmt(worst));
    }
}

// Static design feasibility and decay envelope.
void criterion_4(Outcome& out) {
    const Network net = fig3_network();
    const std::vector<double> init(200, 0.2);
    const auto grid = uniform_grid(10.0, 100);
    for (int kind = 0; kind < 2; ++kind) {
        const VirusModel model = kind == 0 ? VirusModel::coexisting(kRates) : VirusModel::competing(kRates);
        const std::string tag = kind == 0 ? "coexisting" : "competing";
        const Eigen::MatrixXd qbar = build_Qbar(net, model);
        const auto costs = uniform_costs(net.size());
        for (double eps : {0.1, 0.5, 1.0}) {
            const DesignResult d = design_min_cost(qbar, model.num_sets(), eps, costs);
            const Feasibility f = feasible(qbar, model.num_sets(), d.beta, eps);
            out.require(f.feasible && f.margin >= -1e-9, tag + " eps " + fmt(eps) + " margin " + fmt(f.margin));
            const DecayReport dec = verify_exponential_decay(net, model, d.beta, eps, init, grid);
            out.require(dec.pass, tag + " eps " + fmt(eps) + " envelope ratio " + fmt(dec.worst_ratio) + " at t=" +
                                      fmt(dec.worst_time));
        }
    }
    const Network clique = Network::complete(10);
    const VirusModel model = VirusModel::coexisting(kRates);
    const double eps = 0.5;
    const std::vector<double> half(10, 0.5 * uniform_rate(clique, model, eps));
    const DecayReport neg = verify_exponential_decay(clique, model, half, eps, std::vector<double>(20, 0.2), grid);
    out.require(!neg.pass, "negative control ratio " + fmt(neg.worst_ratio));
}

// Monotone adaptive patching clears the network; alpha ordering.
void criterion_5(Outcome& out) {
    const ScenarioResult res = run_scenario(meanfield_only("fig4a-adaptive-patch"));
    std::vector<double> clear, final_beta;
    for (const ScenarioRun& run : res.runs) {
        const HostTrajectory& tr = run.meanfield->trajectory;
        clear.push_back(run.time_to_clear);
        final_beta.push_back(tr.mean_beta(tr.t.size() - 1));
        out.require(run.time_to_clear >= 0.0,
                    run.label + " clears at " + fmt(run.time_to_clear) + ", final mean beta " + fmt(final_beta.back()));
    }
    out.require(clear.size() == 2 && clear[1] >= 0.0 && clear[1] <= clear[0] && final_beta[1] > final_beta[0],
                "larger alpha clears no later with larger final beta");
}

// Non-monotone fixed point and linearized stability.
void criterion_6(Outcome& out) {
    const Scenario s = meanfield_only("fig5b-nonmono");
    const ScenarioResult res = run_scenario(s);
    const ControllerConfig& c = s.controller;
    const double xs = fixed_point_x(c.alpha, c.gamma);
    const HostTrajectory& tr = res.runs.front().meanfield->trajectory;
    double dev = 0.0;
    for (double x : tr.any.back()) dev = std::max(dev, std::abs(x - xs));
    out.require(dev <= 0.02, "max |x_i - " + fmt(xs) + "| at t=" + fmt(tr.t.back()) + " is " + fmt(dev));
    const Network net = s.network.build();
    const VirusModel model = s.model.build();
    const bool stable = hurwitz(linearized_jacobian(net, c.alpha, c.gamma, model.lambda(kClean, 0)));
    out.require(stable, stable ? "Jacobian Hurwitz" : "Jacobian not Hurwitz");
}

// Adaptive filtering: clearance, final-value bound, gamma ordering.
void criterion_7(Outcome& out) {
    const ScenarioResult res = run_scenario(meanfield_only("fig5a-adaptive-filter"));
    std::vector<double> qstar;
    for (const ScenarioRun& run : res.runs) {
        const HostTrajectory& tr = run.meanfield->trajectory;
        const double worst = *std::max_element(tr.virus.back().begin(), tr.virus.back().end());
        out.require(worst < 1e-3, run.label + " max xbar_i^v " + fmt(worst));
        qstar.push_back(tr.q.back());
        for (const BoundReport& b : run.bounds)
            if (b.name == "q_final_bound")
                out.require(b.satisfied, run.label + " q* " + fmt(b.observed) + " <= " + fmt(b.bound));
    }
    out.require(qstar.size() == 2 && qstar[0] < qstar[1], "smaller gamma gives smaller q*");
}

// Eigensolver against characteristic-polynomial roots; Q PSD; rho ordering.
void criterion_8(Outcome& out) {
    std::mt19937_64 gen(2024);
    double worst = 0.0;
    int count = 0;
    for (int n = 1; n <= 4; ++n) {
        for (int t = 0; t < 25; ++t) {
            const Eigen::MatrixXd m = oracle::random_symmetric(n, gen);
            const auto roots = oracle::poly_roots(oracle::charpoly(m));
            Eigen::VectorXd vals = eig_sym(m).values;
            std::sort(vals.data(), vals.data() + vals.size());
            for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(vals(k) - roots[static_cast<std::size_t>(k)]));
            ++count;
        }
    }
    out.require(worst <= 1e-8, fmt(count) + " matrices, max eigenvalue error " + fmt(worst));

    std::uniform_real_distribution<double> rate(0.05, 3.0), prob(0.05, 1.0);
    std::bernoulli_distribution coin(0.5);
    double min_eig = INFINITY;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> mu(3), p(3);
        for (int v = 0; v < 3; ++v) {
            mu[static_cast<std::size_t>(v)] = rate(gen);
            p[static_cast<std::size_t>(v)] = prob(gen);
        }
        std::vector<std::pair<VirusId, VirusId>> pairs;
        for (VirusId a = 0; a < 3; ++a)
            for (VirusId b = a + 1; b < 3; ++b)
                if (coin(gen)) pairs.emplace_back(a, b);
        const VirusModel model({}, mu, p, pairs);
        std::vector<VirusModel::Override> ov;
        for (VirusSet s : model.realizable_sets())
            for (VirusId v = 0; v < 3; ++v)
                if (!contains(s, v) && coin(gen)) ov.push_back({s, v, prob(gen)});
        min_eig = std::min(min_eig, min_eigenvalue(build_Q(VirusModel({}, mu, p, pairs, ov))));
    }
    out.require(min_eig >= -1e-10, "100 rate tables, min eig(Q) " + fmt(min_eig));

    const Network net = fig3_network();
    const double co = passivity_index_bound(net, VirusModel::coexisting(kRates));
    const double cp = passivity_index_bound(net, VirusModel::competing(kRates));
    out.require(cp <= co, "rho competing " + fmt(cp) + " <= coexisting " + fmt(co));
}

void add_reports(Outcome& out, const std::string& tag, const std::vector<BoundReport>& reports) {
    for (const BoundReport& b : reports) {
        bool enforced = true;
        for (const auto& [k, v] : b.inputs)
            if (k == "precondition" && v == 0.0) enforced = false;
        if (!enforced) continue;
        out.require(b.satisfied, tag + " " + b.name + " slack " + fmt(b.slack) + " (band " + fmt(b.tolerance) + ")");
    }
}

// Bound reports against simulation.
void criterion_9(Outcome& out) {
    const ScenarioResult patch = run_scenario(meanfield_only("fig4a-adaptive-patch"));
    for (const ScenarioRun& run : patch.runs) add_reports(out, run.label, run.bounds);

    // Same network with every beta_i(0) above lambda_max |N_i|.
    Scenario pre = meanfield_only("fig4a-adaptive-patch");
    pre.name = "fig4a-precondition";
    pre.beta = pre.model.build().lambda_max() * pre.network.build().max_degree() + 1.0;
    pre.sweep_values = {1.0, 10.0};
    const ScenarioResult pres = run_scenario(pre);
    for (const ScenarioRun& run : pres.runs) add_reports(out, "beta0 " + fmt(pre.beta) + " " + run.label, run.bounds);

    const ScenarioResult filt = run_scenario(meanfield_only("fig5a-adaptive-filter"));
    for (const ScenarioRun& run : filt.runs) add_reports(out, run.label, run.bounds);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mvnet acceptance suite"};
    int only = 0;
    app.add_option("--criterion", only, "Run a single criterion (1-9)")->check(CLI::Range(1, 9));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::function<void(Outcome&)>> all{criterion_1, criterion_2, criterion_3,
                                                         criterion_4, criterion_5, criterion_6,
                                                         criterion_7, criterion_8, criterion_9};
    bool ok = true;
    for (int k = 1; k <= 9; ++k) {
        if (only != 0 && k != only) continue;
        Outcome out;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            all[static_cast<std::size_t>(k - 1)](out);
        } catch (const std::exception& e) {
            out.require(false, std::string("error: ") + e.what());
        }
        std::printf("criterion %d: %s  (%.1f s) %s\n", k, out.pass ? "PASS" : "FAIL", seconds_since(t0),
                    out.detail.str().c_str());
        std::fflush(stdout);
        ok = ok && out.pass;
    }
    return ok ? 0 : 1;
}

// expctl: command-line front end for the mvnet simulation suite.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvnet/adaptive.hpp"
#include "mvnet/bounds.hpp"
#include "mvnet/config.hpp"
#include "mvnet/csv.hpp"
#include "mvnet/error.hpp"
#include "mvnet/master_equation.hpp"
#include "mvnet/passivity.hpp"
#include "mvnet/scenario.hpp"
#include "mvnet/static_design.hpp"

namespace {

using Json = nlohmann::ordered_json;
using namespace mvnet;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kEngineError = 2;
constexpr int kCheckFailed = 3;

// Scenario selection plus per-field overrides shared by most subcommands.
struct ScenarioArgs {
    std::string scenario;
    std::string net;
    std::string model;
    std::optional<std::string> controller, dynamics, mode;
    std::optional<double> alpha, gamma, beta0, q0, beta_floor, horizon, h;
    std::optional<int> points;
    std::optional<long long> trials;
    std::optional<std::uint64_t> seed;

    void attach(CLI::App* app, bool require_scenario = true) {
        auto* opt = app->add_option("--scenario", scenario, "Built-in scenario name or scenario file");
        if (require_scenario) opt->required();
        app->add_option("--net", net, "Edge-list file (overrides the scenario network)");
        app->add_option("--model", model, "Virus model file (overrides the scenario model)");
        app->add_option("--controller", controller, "none|monotone|nonmonotone|filter|joint");
        app->add_option("--alpha", alpha, "Patch gain");
        app->add_option("--gamma", gamma, "Decrement or filter gain");
        app->add_option("--beta0", beta0, "Initial (or static) patch rate for every host");
        app->add_option("--q0", q0, "Initial (or static) filtering probability");
        app->add_option("--beta-floor", beta_floor, "Minimal patch rate of the non-monotone law");
        app->add_option("--nonmonotone-mode", mode, "projection|positive-part");
        app->add_option("--dynamics", dynamics, "aggregate|subset");
        app->add_option("--horizon", horizon, "Time horizon");
        app->add_option("--points", points, "Number of grid intervals");
        app->add_option("--step", h, "Integrator step h");
        app->add_option("--trials", trials, "Monte-Carlo trials");
        app->add_option("--seed", seed, "Master seed");
    }

    Scenario resolve() const {
        Scenario s = scenario.empty() ? Scenario{} : load_scenario(scenario);
        if (!net.empty()) s.network = NetworkSpec{"file", 0, 0.0, 0, net};
        if (!model.empty()) s.model = ModelSpec{"file", {}, 1.0, model};
        if (controller) s.controller.kind = parse_controller_kind(*controller);
        if (alpha) s.controller.alpha = *alpha;
        if (gamma) s.controller.gamma = *gamma;
        if (beta_floor) s.controller.beta_floor = *beta_floor;
        if (mode) s.controller.mode = parse_nonmonotone_mode(*mode);
        if (beta0) {
            s.beta = *beta0;
            s.beta_random.reset();
        }
        if (q0) s.q = *q0;
        if (dynamics) {
            if (*dynamics == "aggregate") s.dynamics = Dynamics::Aggregate;
            else if (*dynamics == "subset") s.dynamics = Dynamics::Subset;
            else throw ConfigError(0, "dynamics", "expected aggregate or subset");
        }
        if (horizon) s.horizon = *horizon;
        if (points) s.points = *points;
        if (h) s.h = *h;
        if (trials) s.trials = *trials;
        if (seed) s.seed = *seed;
        // An explicit gain replaces the sweep over that gain.
        if ((s.sweep_param == "alpha" && alpha) || (s.sweep_param == "gamma" && gamma)) {
            s.sweep_param.clear();
            s.sweep_values.clear();
        }
        return s;
    }
};

// "--out json" (the format name) and "-" both mean stdout.
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-" || path == "json") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

Json bounds_json(const std::vector<BoundReport>& reports) {
    Json arr = Json::array();
    for (const auto& r : reports) {
        Json in = Json::object();
        for (const auto& [k, v] : r.inputs) in[k] = v;
        arr.push_back({{"name", r.name},
                       {"direction", r.direction},
                       {"approximate", r.approximate},
                       {"bound", r.bound},
                       {"observed", r.observed},
                       {"slack", r.slack},
                       {"tolerance", r.tolerance},
                       {"satisfied", r.satisfied},
                       {"inputs", in}});
    }
    return arr;
}

Scenario single_run(Scenario s, Engine engine) {
    s.engine = engine;
    if (!s.sweep_param.empty()) {
        (s.sweep_param == "alpha" ? s.controller.alpha : s.controller.gamma) = s.sweep_values.front();
        s.sweep_param.clear();
        s.sweep_values.clear();
    }
    return s;
}

bool certificates_hold(const ScenarioRun& run, Dynamics dynamics, double tol) {
    if (!run.meanfield) return true;
    const Certificates& c = run.meanfield->certificates;
    bool ok = true;
    if (dynamics == Dynamics::Aggregate) ok = ok && c.aggregate_storage <= tol;
    const ControllerKind k = run.controller.kind;
    if (k == ControllerKind::Monotone || k == ControllerKind::Joint)
        ok = ok && c.lasalle <= tol && c.lasalle_step <= tol && c.beta_decrease <= 0.0;
    if (k == ControllerKind::Filter || k == ControllerKind::Joint) ok = ok && c.q_decrease <= 0.0;
    return ok;
}

int cmd_gen_net(const std::string& kind, int n, double p, std::uint64_t seed, const std::string& out) {
    NetworkSpec spec;
    spec.kind = kind;
    spec.n = n;
    spec.p = p;
    spec.seed = seed;
    if (kind == "file") throw ConfigError(0, "kind", "expected er, complete, cycle or path");
    const Network net = spec.build();
    std::ostringstream os;
    net.write(os);
    emit(out, os.str());
    return kOk;
}

int cmd_sim(const ScenarioArgs& args, Engine engine, const std::string& out) {
    const ScenarioResult r = run_scenario(single_run(args.resolve(), engine));
    emit(out, r.files.front().second);
    return kOk;
}

int cmd_mc_compare(const ScenarioArgs& args, const std::string& out, bool check) {
    const ScenarioResult r = run_scenario(single_run(args.resolve(), Engine::Both));
    emit(out, r.report_json);
    const auto& run = r.runs.front();
    if (check && !(run.domination_gap && *run.domination_gap <= 0.0)) return kCheckFailed;
    return kOk;
}

int cmd_adaptive(const ScenarioArgs& args, const std::string& out, const std::string& report, bool check) {
    const Scenario s = single_run(args.resolve(), Engine::MeanField);
    const ScenarioResult r = run_scenario(s);
    emit(out, r.files.front().second);
    if (!report.empty()) emit(report, r.report_json);
    bool ok = true;
    for (const auto& run : r.runs) ok = ok && certificates_hold(run, s.dynamics, 1e-8);
    return check && !ok ? kCheckFailed : kOk;
}

int cmd_bounds(const ScenarioArgs& args, const std::string& out, bool check) {
    Scenario s = args.resolve();
    s.engine = Engine::MeanField;
    const ScenarioResult r = run_scenario(s);
    Json j;
    j["scenario"] = s.name;
    Json runs = Json::array();
    bool ok = true;
    for (const auto& run : r.runs) {
        runs.push_back({{"label", run.label}, {"bounds", bounds_json(run.bounds)}});
        for (const auto& b : run.bounds) ok = ok && b.satisfied;
    }
    j["runs"] = runs;
    emit(out, j.dump(2) + "\n");
    return check && !ok ? kCheckFailed : kOk;
}

int cmd_passivity(const ScenarioArgs& args, const std::string& out) {
    const Scenario s = args.resolve();
    const Network net = s.network.build();
    const VirusModel model = s.model.build();
    const PassivityReport rep = passivity_report(net, model);
    Json j;
    j["rho_bound"] = rep.rho_bound;
    j["mu1_qbar"] = rep.mu1_qbar;
    j["per_host"] = rep.per_host;
    emit(out, j.dump(2) + "\n");
    return kOk;
}

int cmd_design(const ScenarioArgs& args, const std::vector<double>& eps_list, const std::string& costs_path,
               const std::string& out, bool check) {
    const Scenario s = args.resolve();
    const Network net = s.network.build();
    const VirusModel model = s.model.build();
    std::vector<PiecewiseLinearCost> costs = uniform_costs(net.size());
    if (!costs_path.empty()) {
        std::ifstream in(costs_path);
        if (!in) throw ConfigError(0, "costs", "cannot open '" + costs_path + "'");
        const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        costs = parse_costs(text, net.size());
    }
    const Eigen::MatrixXd qbar = build_Qbar(net, model);
    const std::vector<double> init = initial_probabilities(s, net.size(), model.size());
    Json runs = Json::array();
    bool ok = true;
    for (double eps : eps_list) {
        const DesignResult d = design_min_cost(qbar, model.num_sets(), eps, costs);
        const Feasibility f = feasible(qbar, model.num_sets(), d.beta, eps);
        Rk4Options opts;
        opts.h = s.h;
        const DecayReport decay = verify_exponential_decay(net, model, d.beta, eps, init, s.grid(), opts);
        const double ur = uniform_rate(qbar, eps);
        double ucost = 0.0;
        for (const auto& c : costs) ucost += c.value(ur);
        runs.push_back({{"eps", eps},
                        {"cost", d.cost},
                        {"uniform_rate", ur},
                        {"uniform_cost", ucost},
                        {"margin", f.margin},
                        {"feasible", f.feasible},
                        {"iterations", d.iterations},
                        {"converged", d.converged},
                        {"decay_pass", decay.pass},
                        {"decay_worst_ratio", decay.worst_ratio},
                        {"decay_worst_time", decay.worst_time},
                        {"beta", d.beta}});
        ok = ok && f.feasible && decay.pass;
    }
    Json j;
    j["scenario"] = s.name;
    j["designs"] = runs;
    emit(out, j.dump(2) + "\n");
    return check && !ok ? kCheckFailed : kOk;
}

int cmd_oracle(const ScenarioArgs& args, const std::string& out, bool check) {
    const Scenario s = args.resolve();
    const Network net = s.network.build();
    const VirusModel model = s.model.build();
    const int n = net.size();
    const int m = model.size();
    const std::vector<double> init = initial_probabilities(s, n, m);
    const std::vector<double> beta = initial_rates(s, n);
    const std::vector<double> grid = s.grid();
    Rk4Options opts;
    opts.h = s.h;
    const MasterEquationResult me = master_equation(net, model, init, beta, s.q, grid, opts);
    MonteCarloConfig mc;
    mc.init = init;
    mc.beta0 = beta;
    mc.q0 = s.q;
    mc.grid = grid;
    mc.trials = s.trials;
    mc.seed = s.seed;
    const MonteCarloResult mr = monte_carlo(net, model, mc);

    double worst_z = 0.0;
    Json rows = Json::array();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double exact = me.marginals.mean_any(k);
        const double se = mr.se_any[k];
        const double diff = mr.mean_any[k] - exact;
        // A zero standard error only arises from a degenerate sample.
        const double z = se > 0.0 ? std::abs(diff) / se : (std::abs(diff) > 1e-12 ? INFINITY : 0.0);
        worst_z = std::max(worst_z, z);
        for (VirusId v = 0; v < m; ++v) {
            const double sev = mr.se_virus[k][static_cast<std::size_t>(v)];
            const double dv = mr.mean_virus[k][static_cast<std::size_t>(v)] - me.marginals.mean_virus(k, v);
            const double zv = sev > 0.0 ? std::abs(dv) / sev : (std::abs(dv) > 1e-12 ? INFINITY : 0.0);
            worst_z = std::max(worst_z, zv);
        }
        rows.push_back({{"t", grid[k]}, {"master", exact}, {"monte_carlo", mr.mean_any[k]}, {"se", se}});
    }
    Json j;
    j["scenario"] = s.name;
    j["trials"] = mr.trials;
    j["max_mass_error"] = me.max_mass_error;
    j["worst_z"] = std::isfinite(worst_z) ? Json(worst_z) : Json("inf");
    j["within_3se"] = worst_z <= 3.0;
    j["grid"] = rows;
    emit(out, j.dump(2) + "\n");
    return check && !(worst_z <= 3.0) ? kCheckFailed : kOk;
}

int cmd_run_scenario(const ScenarioArgs& args, const std::string& out_dir, bool check) {
    const Scenario s = args.resolve();
    const ScenarioResult r = run_scenario(s, out_dir);
    for (const auto& [name, text] : r.files) std::cout << name << "\n";
    bool ok = true;
    for (const auto& run : r.runs) {
        if (run.domination_gap && run.controller.kind == ControllerKind::None) ok = ok && *run.domination_gap <= 0.0;
        for (const auto& b : run.bounds) ok = ok && b.satisfied;
        ok = ok && certificates_hold(run, s.dynamics, 1e-8);
    }
    return check && !ok ? kCheckFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-virus network simulation and mitigation experiments"};
    app.require_subcommand(1);

    std::string out;
    bool check = false;

    std::string kind = "er";
    int n = 100;
    double p = 0.2;
    std::uint64_t seed = 1;
    auto* gen = app.add_subcommand("gen-net", "Generate a network edge list");
    gen->add_option("--kind", kind, "er|complete|cycle|path");
    gen->add_option("--n", n, "Number of hosts");
    gen->add_option("--p", p, "Edge probability (er)");
    gen->add_option("--seed", seed, "Generator seed (er)");
    gen->add_option("--out", out, "Output file (default stdout)");

    ScenarioArgs a_markov, a_mf, a_cmp, a_design, a_pass, a_adapt, a_bounds, a_oracle, a_run;

    auto* markov = app.add_subcommand("sim-markov", "Monte-Carlo simulation of the Markov model (CSV)");
    a_markov.attach(markov);
    markov->add_option("--out", out, "Output CSV (default stdout)");

    auto* mf = app.add_subcommand("sim-mf", "Mean-field trajectory (CSV)");
    a_mf.attach(mf);
    mf->add_option("--out", out, "Output CSV (default stdout)");

    auto* cmp = app.add_subcommand("mc-compare", "Mean-field versus Monte-Carlo comparison (JSON)");
    a_cmp.attach(cmp);
    cmp->add_option("--out", out, "Output JSON (default stdout)");
    cmp->add_flag("--check", check, "Exit 3 unless the mean-field curve dominates");

    std::vector<double> eps_list{0.1, 0.5, 1.0};
    std::string costs;
    auto* design = app.add_subcommand("design-static", "Minimum-cost static patch rates (JSON)");
    a_design.attach(design, false);
    design->add_option("--eps", eps_list, "Decay rates");
    design->add_option("--costs", costs, "Cost file: 'host slope0 [break1 slope1 ...]' per line");
    design->add_option("--out", out, "Output JSON (default stdout)");
    design->add_flag("--check", check, "Exit 3 unless every design is certified and decays");

    auto* pass = app.add_subcommand("passivity", "Passivity index bound (JSON)");
    a_pass.attach(pass, false);
    pass->add_option("--out", out, "Output JSON (default stdout)");

    std::string report;
    auto* adapt = app.add_subcommand("adaptive-run", "Co-simulate an adaptive controller (CSV)");
    a_adapt.attach(adapt);
    adapt->add_option("--out", out, "Output CSV (default stdout)");
    adapt->add_option("--report", report, "Also write the JSON report here");
    adapt->add_flag("--check", check, "Exit 3 unless the storage certificates hold");

    auto* bounds = app.add_subcommand("bounds-report", "Evaluate the closed-form bounds (JSON)");
    a_bounds.attach(bounds);
    bounds->add_option("--out", out, "Output JSON (default stdout)");
    bounds->add_flag("--check", check, "Exit 3 unless every bound holds");

    auto* oracle = app.add_subcommand("oracle-compare", "Monte-Carlo versus master equation (JSON)");
    a_oracle.attach(oracle, false);
    oracle->add_option("--out", out, "Output JSON (default stdout)");
    oracle->add_flag("--check", check, "Exit 3 unless every grid point is within 3 standard errors");

    std::string out_dir = ".";
    auto* run = app.add_subcommand("run-scenario", "Run a scenario and write CSV and JSON outputs");
    a_run.attach(run);
    run->add_option("--out-dir", out_dir, "Output directory");
    run->add_flag("--check", check, "Exit 3 unless domination, bounds and certificates hold");
    auto* list = app.add_subcommand("list-scenarios", "Print the built-in scenario names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*gen) return cmd_gen_net(kind, n, p, seed, out);
        if (*markov) return cmd_sim(a_markov, Engine::Markov, out);
        if (*mf) return cmd_sim(a_mf, Engine::MeanField, out);
        if (*cmp) return cmd_mc_compare(a_cmp, out, check);
        if (*design) return cmd_design(a_design, eps_list, costs, out, check);
        if (*pass) return cmd_passivity(a_pass, out);
        if (*adapt) return cmd_adaptive(a_adapt, out, report, check);
        if (*bounds) return cmd_bounds(a_bounds, out, check);
        if (*oracle) return cmd_oracle(a_oracle, out, check);
        if (*run) return cmd_run_scenario(a_run, out_dir, check);
        if (*list) {
            for (const auto& name : builtin_scenarios()) std::cout << name << "\n";
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "expctl: " << e.what() << "\n";
        return kConfigError;
    } catch (const Error& e) {
        std::cerr << "expctl: " << e.what() << "\n";
        return kEngineError;
    } catch (const std::exception& e) {
        std::cerr << "expctl: " << e.what() << "\n";
        return kEngineError;
    }
    return kOk;
}

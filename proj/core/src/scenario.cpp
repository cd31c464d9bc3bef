#include "mvnet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "mvnet/config.hpp"
#include "mvnet/csv.hpp"
#include "mvnet/error.hpp"
#include "mvnet/rng.hpp"

namespace mvnet {

namespace {

using Json = nlohmann::ordered_json;

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += format_double(v[i]);
    }
    return s;
}

std::string dynamics_name(Dynamics d) { return d == Dynamics::Subset ? "subset" : "aggregate"; }

std::string engine_name(Engine e) {
    switch (e) {
        case Engine::Markov: return "markov";
        case Engine::MeanField: return "meanfield";
        default: return "both";
    }
}

std::pair<double, double> parse_range(const ConfigEntry& e) {
    const auto v = parse_doubles(e);
    if (v.size() != 2) throw ConfigError(e.line, e.key, "expected 'lo hi'");
    if (v[0] > v[1]) throw ConfigError(e.line, e.key, "lo exceeds hi");
    return {v[0], v[1]};
}

NetworkSpec parse_network(const ConfigEntry& e) {
    const auto tok = split_ws(e.value);
    if (tok.empty()) throw ConfigError(e.line, e.key, "empty network");
    NetworkSpec ns;
    ns.kind = tok[0];
    auto count = [&](std::size_t want) {
        if (tok.size() != want) throw ConfigError(e.line, e.key, "wrong number of arguments for '" + ns.kind + "'");
    };
    if (ns.kind == "er") {
        count(4);
        ns.n = static_cast<int>(parse_int(e, tok[1]));
        ns.p = parse_double(e, tok[2]);
        ns.seed = static_cast<std::uint64_t>(parse_int(e, tok[3]));
    } else if (ns.kind == "complete" || ns.kind == "cycle" || ns.kind == "path") {
        count(2);
        ns.n = static_cast<int>(parse_int(e, tok[1]));
        ns.p = 0.0;
        ns.seed = 0;
    } else if (ns.kind == "file") {
        count(2);
        ns.path = tok[1];
        ns.n = 0;
        ns.p = 0.0;
        ns.seed = 0;
    } else {
        throw ConfigError(e.line, e.key, "unknown network kind '" + ns.kind + "'");
    }
    if (ns.kind != "file" && ns.n < 1) throw ConfigError(e.line, e.key, "need at least one host");
    if (ns.kind == "er" && !(ns.p >= 0.0 && ns.p <= 1.0)) throw ConfigError(e.line, e.key, "edge probability outside [0, 1]");
    return ns;
}

ModelSpec parse_model(const ConfigEntry& e) {
    const auto tok = split_ws(e.value);
    if (tok.empty()) throw ConfigError(e.line, e.key, "empty model");
    ModelSpec ms;
    ms.kind = tok[0];
    ms.mu.clear();
    if (ms.kind == "coexisting" || ms.kind == "competing") {
        for (std::size_t i = 1; i < tok.size(); ++i) ms.mu.push_back(parse_double(e, tok[i]));
        if (ms.mu.empty()) throw ConfigError(e.line, e.key, "need at least one packet rate");
        for (double m : ms.mu)
            if (!(m > 0.0)) throw ConfigError(e.line, e.key, "packet rates must be positive");
    } else if (ms.kind == "file") {
        if (tok.size() != 2) throw ConfigError(e.line, e.key, "expected 'file path'");
        ms.path = tok[1];
    } else {
        throw ConfigError(e.line, e.key, "unknown model kind '" + ms.kind + "'");
    }
    return ms;
}

const std::map<std::string, std::string>& builtins() {
    static const std::map<std::string, std::string> table = {
        {"fig3-coexist",
         "name = fig3-coexist\n"
         "network = er 100 0.2 1\n"
         "model = coexisting 1 2\n"
         "init = 0.2 0.2\n"
         "beta = 10\n"
         "engine = both\n"
         "dynamics = aggregate\n"
         "horizon = 5\n"
         "points = 50\n"},
        {"fig3-compete",
         "name = fig3-compete\n"
         "network = er 100 0.2 1\n"
         "model = competing 1 2\n"
         "init = 0.2 0.2\n"
         "beta = 10\n"
         "engine = both\n"
         "dynamics = aggregate\n"
         "horizon = 5\n"
         "points = 50\n"},
        {"fig4a-adaptive-patch",
         "name = fig4a-adaptive-patch\n"
         "network = er 100 0.2 1\n"
         "model = coexisting 1 2\n"
         "init = 0.2 0.2\n"
         "beta = 10\n"
         "controller = monotone\n"
         "engine = both\n"
         "dynamics = aggregate\n"
         "horizon = 100\n"
         "points = 1000\n"
         "sweep = alpha 10 50\n"},
        {"fig5a-adaptive-filter",
         "name = fig5a-adaptive-filter\n"
         "network = er 100 0.2 1\n"
         "model = coexisting 2 4\n"
         "model_p = 0.5\n"
         "init = 0.15 0.15\n"
         "beta = 10\n"
         "q = 0.01\n"
         "controller = filter\n"
         "engine = both\n"
         "dynamics = subset\n"
         "horizon = 20\n"
         "points = 400\n"
         "sweep = gamma 0.001 0.01\n"},
        {"fig5b-nonmono",
         "name = fig5b-nonmono\n"
         "network = er 100 0.05 3\n"
         "model = coexisting 1\n"
         "init_random = 0 1\n"
         "beta_random = 0.001 0.2\n"
         "controller = nonmonotone\n"
         "alpha = 1\n"
         "gamma = 0.1\n"
         "engine = both\n"
         "dynamics = subset\n"
         "horizon = 300\n"
         "points = 300\n"
         "h = 0.01\n"},
    };
    return table;
}

Json reports_json(const std::vector<BoundReport>& reports) {
    Json arr = Json::array();
    for (const auto& r : reports) {
        Json j;
        j["name"] = r.name;
        j["direction"] = r.direction;
        j["approximate"] = r.approximate;
        j["bound"] = r.bound;
        j["observed"] = r.observed;
        j["slack"] = r.slack;
        j["tolerance"] = r.tolerance;
        j["satisfied"] = r.satisfied;
        Json in = Json::object();
        for (const auto& [k, v] : r.inputs) in[k] = v;
        j["inputs"] = in;
        arr.push_back(j);
    }
    return arr;
}

std::string run_suffix(const std::string& label) {
    std::string s = label;
    std::replace(s.begin(), s.end(), '=', '_');
    return s.empty() ? s : "_" + s;
}

}  // namespace

Network NetworkSpec::build() const {
    if (kind == "er") return Network::erdos_renyi(n, p, seed);
    if (kind == "complete") return Network::complete(n);
    if (kind == "cycle") return Network::cycle(n);
    if (kind == "path") return Network::path(n);
    if (kind == "file") return Network::load(path);
    throw ConfigError(0, "network", "unknown network kind '" + kind + "'");
}

std::string NetworkSpec::to_string() const {
    if (kind == "er") return "er " + std::to_string(n) + " " + format_double(p) + " " + std::to_string(seed);
    if (kind == "file") return "file " + path;
    return kind + " " + std::to_string(n);
}

VirusModel ModelSpec::build() const {
    if (kind == "file") return VirusModel::load(path);
    std::vector<std::pair<VirusId, VirusId>> pairs;
    const int m = static_cast<int>(mu.size());
    if (kind == "competing")
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b) pairs.emplace_back(a, b);
    return VirusModel({}, mu, std::vector<double>(mu.size(), p), pairs);
}

std::string ModelSpec::to_string() const {
    if (kind == "file") return "file " + path;
    return kind + " " + join(mu);
}

namespace {

void check(const Scenario& sc, const std::map<std::string, int>& lines) {
    auto bad = [&](const std::string& field, const std::string& what) {
        const auto it = lines.find(field);
        throw ConfigError(it == lines.end() ? 0 : it->second, field, what);
    };
    const auto& [name, network, model, init, init_random, beta, beta_random, q, controller, engine, dynamics,
                 horizon, points, h, seed, trials, sweep_param, sweep_values] = sc;
    if (name.empty()) bad("name", "empty name");
    for (double p : init)
        if (!(p >= 0.0 && p <= 1.0)) bad("init", "probabilities must lie in [0, 1]");
    double total = 0.0;
    for (double p : init) total += p;
    if (total > 1.0 + 1e-12) bad("init", "per-virus probabilities sum above 1");
    if (init_random && !(init_random->first >= 0.0 && init_random->second <= 1.0))
        bad("init_random", "range must lie in [0, 1]");
    if (!init.empty() && init_random) bad("init_random", "conflicts with init");
    if (!(beta >= 0.0)) bad("beta", "must be nonnegative");
    if (beta_random && !(beta_random->first >= 0.0)) bad("beta_random", "must be nonnegative");
    if (!(q >= 0.0 && q <= 1.0)) bad("q", "must lie in [0, 1]");
    if (!(horizon > 0.0)) bad("horizon", "must be positive");
    if (points < 1) bad("points", "need at least one interval");
    if (!(h > 0.0)) bad("h", "must be positive");
    if (trials < 1) bad("trials", "need at least one trial");
    if (!sweep_param.empty() && sweep_param != "alpha" && sweep_param != "gamma")
        bad("sweep", "only alpha or gamma can be swept");
    if (!sweep_param.empty() && sweep_values.empty()) bad("sweep", "no values");
    try {
        controller.validate();
    } catch (const InvalidModel& e) {
        bad("controller", e.what());
    }
    if (controller.filters() && dynamics != Dynamics::Subset) bad("dynamics", "filtering laws need subset dynamics");
    if (controller.filters() && !(q > 0.0)) bad("q", "filtering laws need q > 0");
}

}  // namespace

void Scenario::validate() const { check(*this, {}); }

std::vector<double> Scenario::grid() const { return uniform_grid(horizon, points); }

Scenario parse_scenario(const std::string& text) {
    Scenario s;
    std::map<std::string, int> seen;
    std::optional<int> model_p_line;
    for (const auto& e : parse_config(text)) {
        if (!seen.emplace(e.key, e.line).second) throw ConfigError(e.line, e.key, "repeated key");
        const std::string& k = e.key;
        auto one = [&]() {
            const auto v = parse_doubles(e);
            if (v.size() != 1) throw ConfigError(e.line, k, "expected one number");
            return v[0];
        };
        auto integer = [&]() {
            const auto tok = split_ws(e.value);
            if (tok.size() != 1) throw ConfigError(e.line, k, "expected one integer");
            return parse_int(e, tok[0]);
        };
        try {
            if (k == "name") {
                if (e.value.empty() || split_ws(e.value).size() != 1) throw ConfigError(e.line, k, "expected one word");
                s.name = e.value;
            } else if (k == "network") {
                s.network = parse_network(e);
            } else if (k == "model") {
                const double p = s.model.p;
                s.model = parse_model(e);
                s.model.p = p;
            } else if (k == "model_p") {
                s.model.p = one();
                model_p_line = e.line;
                if (!(s.model.p > 0.0 && s.model.p <= 1.0)) throw ConfigError(e.line, k, "must lie in (0, 1]");
            } else if (k == "init") {
                s.init = parse_doubles(e);
            } else if (k == "init_random") {
                s.init_random = parse_range(e);
            } else if (k == "beta") {
                s.beta = one();
            } else if (k == "beta_random") {
                s.beta_random = parse_range(e);
            } else if (k == "q") {
                s.q = one();
            } else if (k == "controller") {
                s.controller.kind = parse_controller_kind(e.value);
            } else if (k == "alpha") {
                s.controller.alpha = one();
            } else if (k == "gamma") {
                s.controller.gamma = one();
            } else if (k == "beta_floor") {
                s.controller.beta_floor = one();
            } else if (k == "nonmonotone_mode") {
                s.controller.mode = parse_nonmonotone_mode(e.value);
            } else if (k == "engine") {
                if (e.value == "both") s.engine = Engine::Both;
                else if (e.value == "markov") s.engine = Engine::Markov;
                else if (e.value == "meanfield") s.engine = Engine::MeanField;
                else throw ConfigError(e.line, k, "expected both, markov or meanfield");
            } else if (k == "dynamics") {
                if (e.value == "aggregate") s.dynamics = Dynamics::Aggregate;
                else if (e.value == "subset") s.dynamics = Dynamics::Subset;
                else throw ConfigError(e.line, k, "expected aggregate or subset");
            } else if (k == "horizon") {
                s.horizon = one();
            } else if (k == "points") {
                s.points = static_cast<int>(integer());
            } else if (k == "h") {
                s.h = one();
            } else if (k == "seed") {
                s.seed = static_cast<std::uint64_t>(integer());
            } else if (k == "trials") {
                s.trials = integer();
            } else if (k == "sweep") {
                const auto tok = split_ws(e.value);
                if (tok.size() < 2) throw ConfigError(e.line, k, "expected 'param value...'");
                s.sweep_param = tok[0];
                s.sweep_values.clear();
                for (std::size_t i = 1; i < tok.size(); ++i) s.sweep_values.push_back(parse_double(e, tok[i]));
            } else {
                throw ConfigError(e.line, k, "unknown key '" + k + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& err) {
            throw ConfigError(e.line, k, err.what());
        }
    }
    if (model_p_line && s.model.kind == "file")
        throw ConfigError(*model_p_line, "model_p", "not applicable to model files");
    check(s, seen);
    return s;
}

std::string serialize_scenario(const Scenario& s) {
    std::string out;
    auto put = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    put("name", s.name);
    put("network", s.network.to_string());
    put("model", s.model.to_string());
    if (s.model.kind != "file") put("model_p", format_double(s.model.p));
    if (!s.init.empty()) put("init", join(s.init));
    if (s.init_random) put("init_random", join({s.init_random->first, s.init_random->second}));
    put("beta", format_double(s.beta));
    if (s.beta_random) put("beta_random", join({s.beta_random->first, s.beta_random->second}));
    put("q", format_double(s.q));
    put("controller", to_string(s.controller.kind));
    put("alpha", format_double(s.controller.alpha));
    put("gamma", format_double(s.controller.gamma));
    put("beta_floor", format_double(s.controller.beta_floor));
    put("nonmonotone_mode", to_string(s.controller.mode));
    put("engine", engine_name(s.engine));
    put("dynamics", dynamics_name(s.dynamics));
    put("horizon", format_double(s.horizon));
    put("points", std::to_string(s.points));
    put("h", format_double(s.h));
    put("seed", std::to_string(s.seed));
    put("trials", std::to_string(s.trials));
    if (!s.sweep_param.empty()) put("sweep", s.sweep_param + " " + join(s.sweep_values));
    return out;
}

std::vector<std::string> builtin_scenarios() {
    std::vector<std::string> names;
    for (const auto& [k, v] : builtins()) names.push_back(k);
    return names;
}

std::string builtin_scenario_text(const std::string& name) {
    const auto& t = builtins();
    const auto it = t.find(name);
    if (it == t.end()) throw ConfigError(0, "scenario", "no built-in scenario named '" + name + "'");
    return it->second;
}

Scenario load_scenario(const std::string& name_or_path) {
    if (builtins().count(name_or_path)) return parse_scenario(builtin_scenario_text(name_or_path));
    std::ifstream in(name_or_path);
    if (!in) throw ConfigError(0, "scenario", "cannot open '" + name_or_path + "'");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_scenario(text);
}

std::vector<double> initial_probabilities(const Scenario& s, int hosts, int viruses) {
    std::vector<double> out(static_cast<std::size_t>(hosts * viruses), 0.0);
    if (s.init_random) {
        Rng rng(derive_seed(s.seed, (std::uint64_t{1} << 63) + 0));
        for (int i = 0; i < hosts; ++i) {
            const double total = rng.uniform(s.init_random->first, s.init_random->second);
            for (int v = 0; v < viruses; ++v) out[static_cast<std::size_t>(i * viruses + v)] = total / viruses;
        }
        return out;
    }
    if (s.init.empty()) return out;
    if (static_cast<int>(s.init.size()) != viruses)
        throw ConfigError(0, "init", "expected " + std::to_string(viruses) + " probabilities");
    for (int i = 0; i < hosts; ++i)
        for (int v = 0; v < viruses; ++v) out[static_cast<std::size_t>(i * viruses + v)] = s.init[static_cast<std::size_t>(v)];
    return out;
}

std::vector<double> initial_rates(const Scenario& s, int hosts) {
    std::vector<double> out(static_cast<std::size_t>(hosts), s.beta);
    if (s.beta_random) {
        Rng rng(derive_seed(s.seed, (std::uint64_t{1} << 63) + 1));
        for (auto& b : out) b = rng.uniform(s.beta_random->first, s.beta_random->second);
    }
    return out;
}

ScenarioResult run_scenario(const Scenario& s, const std::string& out_dir) {
    s.validate();
    const Network net = s.network.build();
    const VirusModel model = s.model.build();
    const int n = net.size();
    const int m = model.size();
    const std::vector<double> init = initial_probabilities(s, n, m);
    const std::vector<double> beta0 = initial_rates(s, n);
    const std::vector<double> grid = s.grid();

    ScenarioResult res;
    res.scenario = s;

    std::vector<std::pair<std::string, ControllerConfig>> points;
    if (s.sweep_param.empty()) {
        points.emplace_back("", s.controller);
    } else {
        for (double v : s.sweep_values) {
            ControllerConfig c = s.controller;
            (s.sweep_param == "alpha" ? c.alpha : c.gamma) = v;
            points.emplace_back(s.sweep_param + "=" + format_double(v), c);
        }
    }

    Json report;
    report["scenario"] = s.name;
    report["config"] = serialize_scenario(s);
    report["hosts"] = n;
    report["edges"] = net.num_edges();
    report["viruses"] = m;
    Json runs = Json::array();

    for (const auto& [label, ctl] : points) {
        ScenarioRun run;
        run.label = label;
        run.controller = ctl;
        Json jr;
        jr["label"] = label;
        jr["controller"] = to_string(ctl.kind);
        jr["alpha"] = ctl.alpha;
        jr["gamma"] = ctl.gamma;

        if (s.engine != Engine::Markov) {
            CoSimConfig cfg;
            cfg.controller = ctl;
            cfg.dynamics = s.dynamics;
            cfg.init = init;
            cfg.beta0 = beta0;
            cfg.q0 = s.q;
            cfg.grid = grid;
            cfg.rk4.h = s.h;
            run.meanfield = co_simulate(net, model, cfg);
            const HostTrajectory& tr = run.meanfield->trajectory;
            for (std::size_t k = 0; k < tr.t.size(); ++k) {
                if (tr.max_any(k) < 1e-3) {
                    run.time_to_clear = tr.t[k];
                    break;
                }
            }
            const std::size_t last = tr.t.size() - 1;
            Json mf;
            mf["final_mean_any"] = tr.mean_any(last);
            mf["final_max_any"] = tr.max_any(last);
            mf["final_mean_beta"] = tr.mean_beta(last);
            mf["final_q"] = tr.q[last];
            mf["time_to_clear"] = run.time_to_clear;
            const Certificates& c = run.meanfield->certificates;
            mf["certificates"] = {{"aggregate_storage", c.aggregate_storage},
                                  {"lasalle", c.lasalle},
                                  {"lasalle_step", c.lasalle_step},
                                  {"beta_decrease", c.beta_decrease},
                                  {"q_decrease", c.q_decrease}};
            if (ctl.kind == ControllerKind::NonMonotone) {
                const double xs = fixed_point_x(ctl.alpha, ctl.gamma);
                double dev = 0.0;
                for (double x : tr.any[last]) dev = std::max(dev, std::abs(x - xs));
                mf["fixed_point_x"] = xs;
                mf["max_fixed_point_deviation"] = dev;
            }
            jr["meanfield"] = mf;

            if (ctl.kind == ControllerKind::Monotone) run.bounds = monotone_bound_reports(tr, net, model, ctl.alpha);
            if (ctl.kind == ControllerKind::Filter && !tr.virus.empty())
                run.bounds = filter_bound_reports(tr, net, model, ctl.gamma, beta0);
            jr["bounds"] = reports_json(run.bounds);
            res.files.emplace_back(s.name + run_suffix(label) + "_meanfield.csv", trajectory_csv(tr, model));
        }

        if (s.engine != Engine::MeanField) {
            MonteCarloConfig mc;
            mc.init = init;
            mc.beta0 = beta0;
            mc.q0 = s.q;
            mc.grid = grid;
            mc.trials = s.trials;
            mc.seed = s.seed;
            if (ctl.kind != ControllerKind::None) mc.hook_factory = [c = ctl] { return make_event_controller(c); };
            run.markov = monte_carlo(net, model, mc);
            const std::size_t last = run.markov->t.size() - 1;
            Json mk;
            mk["trials"] = run.markov->trials;
            mk["final_mean_any"] = run.markov->mean_any[last];
            mk["final_se_any"] = run.markov->se_any[last];
            mk["final_mean_beta"] = run.markov->mean_beta[last];
            mk["final_mean_q"] = run.markov->mean_q[last];
            jr["markov"] = mk;
            res.files.emplace_back(s.name + run_suffix(label) + "_markov.csv", monte_carlo_csv(*run.markov, model));
        }

        if (run.meanfield && run.markov) {
            double gap = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const double g = run.markov->mean_any[k] - 3.0 * run.markov->se_any[k] -
                                 run.meanfield->trajectory.mean_any(k);
                gap = std::max(gap, g);
            }
            run.domination_gap = gap;
            jr["domination_gap"] = gap;
            jr["meanfield_dominates"] = gap <= 0.0;
        }
        runs.push_back(jr);
        res.runs.push_back(std::move(run));
    }
    report["runs"] = runs;
    res.report_json = report.dump(2) + "\n";
    res.files.emplace_back(s.name + "_report.json", res.report_json);

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        for (const auto& [file, contents] : res.files) {
            std::ofstream out(std::filesystem::path(out_dir) / file, std::ios::binary);
            if (!out) throw Error("cannot write '" + file + "'");
            out << contents;
        }
    }
    return res;
}

}  // namespace mvnet

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvnet/adaptive.hpp"
#include "mvnet/bounds.hpp"
#include "mvnet/markov.hpp"
#include "mvnet/network.hpp"
#include "mvnet/virus_model.hpp"

namespace mvnet {

/// "er n p seed" | "complete n" | "cycle n" | "path n" | "file path"
struct NetworkSpec {
    std::string kind = "er";
    int n = 100;
    double p = 0.2;
    std::uint64_t seed = 1;
    std::string path;

    Network build() const;
    std::string to_string() const;
    bool operator==(const NetworkSpec&) const = default;
};

/// "coexisting mu..." | "competing mu..." | "file path"; model_p scales
/// every infection probability of the generated kinds.
struct ModelSpec {
    std::string kind = "coexisting";
    std::vector<double> mu{1.0, 2.0};
    double p = 1.0;
    std::string path;

    VirusModel build() const;
    std::string to_string() const;
    bool operator==(const ModelSpec&) const = default;
};

enum class Engine { Both, Markov, MeanField };

struct Scenario {
    std::string name = "scenario";
    NetworkSpec network;
    ModelSpec model;
    /// Per-virus probability that a host starts infected with exactly that
    /// virus (categorical; the sum must not exceed 1).
    std::vector<double> init;
    /// When set, host i draws a total initial probability uniformly from
    /// [lo, hi], split evenly across viruses.
    std::optional<std::pair<double, double>> init_random;
    double beta = 10.0;
    std::optional<std::pair<double, double>> beta_random;
    double q = 0.0;
    ControllerConfig controller;
    Engine engine = Engine::Both;
    Dynamics dynamics = Dynamics::Aggregate;
    double horizon = 10.0;
    int points = 100;  // grid intervals; the grid has points + 1 samples
    double h = 1e-3;
    std::uint64_t seed = 1;
    long long trials = 100;
    /// Parameter swept across runs: "alpha" or "gamma"; empty for one run.
    std::string sweep_param;
    std::vector<double> sweep_values;

    bool operator==(const Scenario&) const = default;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    std::vector<double> grid() const;
};

/// Strict "key = value" parsing; unknown or repeated keys are rejected.
Scenario parse_scenario(const std::string& text);
std::string serialize_scenario(const Scenario& s);

/// Built-in scenarios: fig3-coexist, fig3-compete, fig4a-adaptive-patch,
/// fig5a-adaptive-filter, fig5b-nonmono.
std::vector<std::string> builtin_scenarios();
std::string builtin_scenario_text(const std::string& name);  // throws ConfigError

/// A built-in name, or a path to a scenario file.
Scenario load_scenario(const std::string& name_or_path);

/// Per-host initial probabilities (hosts x viruses) and rates. Random laws
/// draw from stream derive_seed(seed, 2^63 + k) so that trial streams stay
/// untouched.
std::vector<double> initial_probabilities(const Scenario& s, int hosts, int viruses);
std::vector<double> initial_rates(const Scenario& s, int hosts);

struct ScenarioRun {
    std::string label;  // "alpha=10" etc., empty without a sweep
    ControllerConfig controller;
    std::optional<CoSimResult> meanfield;
    std::optional<MonteCarloResult> markov;
    std::vector<BoundReport> bounds;
    /// First grid time with max_i xbar_i < 1e-3 on the mean-field
    /// trajectory, negative if never reached.
    double time_to_clear = -1.0;
    /// Max over grid points of MC mean - 3 SE - mean-field any-virus mean;
    /// <= 0 means the mean-field curve dominates.
    std::optional<double> domination_gap;
};

struct ScenarioResult {
    Scenario scenario;
    std::vector<ScenarioRun> runs;
    std::string report_json;
    /// (file name, contents) pairs, in write order.
    std::vector<std::pair<std::string, std::string>> files;
};

/// Runs every sweep point on the configured engines, evaluates the bound
/// reports that apply to the controller, and writes the files into out_dir
/// (skipped when empty). Output is a pure function of the scenario.
ScenarioResult run_scenario(const Scenario& s, const std::string& out_dir = {});

}  // namespace mvnet

#include <gtest/gtest.h>

#include "mvnet/error.hpp"
#include "mvnet/scenario.hpp"

using namespace mvnet;

TEST(Scenario, BuiltinsRoundTrip) {
    for (const std::string& name : builtin_scenarios()) {
        const Scenario s = parse_scenario(builtin_scenario_text(name));
        EXPECT_EQ(s.name, name);
        const Scenario back = parse_scenario(serialize_scenario(s));
        EXPECT_EQ(back, s) << name;
        EXPECT_EQ(serialize_scenario(back), serialize_scenario(s));
    }
}

TEST(Scenario, Fig3Contents) {
    const Scenario s = load_scenario("fig3-coexist");
    EXPECT_EQ(s.network.kind, "er");
    EXPECT_EQ(s.network.n, 100);
    EXPECT_DOUBLE_EQ(s.network.p, 0.2);
    EXPECT_EQ(s.model.kind, "coexisting");
    EXPECT_EQ(s.model.mu, (std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(s.init, (std::vector<double>{0.2, 0.2}));
    EXPECT_DOUBLE_EQ(s.beta, 10.0);
}

TEST(Scenario, Defaults) {
    const Scenario s = parse_scenario("name = tiny\nnetwork = path 3\n");
    EXPECT_DOUBLE_EQ(s.h, 1e-3);
    EXPECT_EQ(s.trials, 100);
    EXPECT_EQ(s.network.kind, "path");
    EXPECT_EQ(s.network.n, 3);
    EXPECT_TRUE(s.init.empty());
    EXPECT_EQ(s.controller.kind, ControllerKind::None);
}

TEST(Scenario, StrictParsing) {
    try {
        parse_scenario("name = x\nbetas = 3\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "betas");
        EXPECT_EQ(e.line(), 2);
    }
    EXPECT_THROW(parse_scenario("beta = 1\nbeta = 2\n"), ConfigError);
    EXPECT_THROW(parse_scenario("horizon = -1\n"), ConfigError);
    EXPECT_THROW(parse_scenario("init = 0.7 0.7\n"), ConfigError);
    EXPECT_THROW(parse_scenario("network = er 10\n"), ConfigError);
    EXPECT_THROW(parse_scenario("controller = magic\n"), ConfigError);
    EXPECT_THROW(load_scenario("no-such-scenario"), ConfigError);
    try {
        parse_scenario("name = x\n\n# note\ntrials = many\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "trials");
        EXPECT_EQ(e.line(), 4);
    }
}

TEST(Scenario, RunIsDeterministic) {
    const std::string text =
        "name = small\nnetwork = er 12 0.3 4\nmodel = competing 1 2\ninit = 0.2 0.2\nbeta = 3\n"
        "engine = both\nhorizon = 2\npoints = 8\ntrials = 40\nseed = 7\n";
    const Scenario s = parse_scenario(text);
    const ScenarioResult a = run_scenario(s);
    const ScenarioResult b = run_scenario(s);
    ASSERT_EQ(a.files.size(), 3u);
    EXPECT_EQ(a.files, b.files);
    EXPECT_EQ(a.report_json, b.report_json);
    EXPECT_EQ(a.files[0].first, "small_meanfield.csv");
    EXPECT_EQ(a.files[1].first, "small_markov.csv");
    EXPECT_EQ(a.files[2].first, "small_report.json");
}

TEST(Scenario, SweepLabelsRuns) {
    const Scenario s = parse_scenario(
        "name = sw\nnetwork = cycle 6\nmodel = coexisting 1\ninit = 0.3\nbeta = 1\ncontroller = monotone\n"
        "engine = meanfield\nhorizon = 1\npoints = 4\nsweep = alpha 1 5\n");
    const ScenarioResult r = run_scenario(s);
    ASSERT_EQ(r.runs.size(), 2u);
    EXPECT_EQ(r.runs[0].label, "alpha=1");
    EXPECT_DOUBLE_EQ(r.runs[1].controller.alpha, 5.0);
    EXPECT_FALSE(r.runs[0].markov.has_value());
}

TEST(Scenario, EmptyInitialInfectionGivesZeroTrajectories) {
    const Scenario s = parse_scenario(
        "name = idle\nnetwork = er 10 0.4 2\nmodel = coexisting 1 2\nbeta = 2\ncontroller = monotone\nalpha = 3\n"
        "engine = both\nhorizon = 1\npoints = 4\ntrials = 10\n");
    const ScenarioResult r = run_scenario(s);
    const ScenarioRun& run = r.runs.front();
    for (std::size_t k = 0; k < run.meanfield->trajectory.t.size(); ++k) {
        EXPECT_EQ(run.meanfield->trajectory.max_any(k), 0.0);
        EXPECT_DOUBLE_EQ(run.meanfield->trajectory.mean_beta(k), 2.0);
        EXPECT_EQ(run.markov->mean_any[k], 0.0);
        EXPECT_DOUBLE_EQ(run.markov->mean_beta[k], 2.0);
    }
}

TEST(Scenario, RandomInitialLawsAreInRange) {
    const Scenario s = load_scenario("fig5b-nonmono");
    const auto p = initial_probabilities(s, 100, 1);
    const auto b = initial_rates(s, 100);
    for (double x : p) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
    }
    for (double x : b) {
        EXPECT_GE(x, 1e-3);
        EXPECT_LE(x, 0.2);
    }
    EXPECT_EQ(p, initial_probabilities(s, 100, 1));
}

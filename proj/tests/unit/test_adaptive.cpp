#include <cmath>

#include <gtest/gtest.h>

#include "mvnet/adaptive.hpp"
#include "mvnet/error.hpp"
#include "mvnet/linalg.hpp"
#include "mvnet/scenario.hpp"

using namespace mvnet;

namespace {

const double kOne[1] = {1.0};

ControllerConfig cfg(ControllerKind k, double alpha, double gamma) {
    ControllerConfig c;
    c.kind = k;
    c.alpha = alpha;
    c.gamma = gamma;
    return c;
}

SystemState state_of(std::vector<VirusSet> inf, std::vector<double> beta, double q = 0.0) {
    SystemState s;
    s.infection = std::move(inf);
    s.beta = std::move(beta);
    s.q = q;
    return s;
}

}  // namespace

TEST(Adaptive, OdeLaws) {
    EXPECT_DOUBLE_EQ(monotone_patch_deriv(50.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(monotone_patch_deriv(50.0, 0.4), 20.0);
    EXPECT_DOUBLE_EQ(nonmonotone_patch_deriv(1.0, 0.1, 0.5, 3.0, 1e-3), 0.45);
    EXPECT_DOUBLE_EQ(nonmonotone_patch_deriv(1.0, 0.1, 0.0, 3.0, 1e-3), -0.1);
    EXPECT_DOUBLE_EQ(nonmonotone_patch_deriv(1.0, 0.1, 0.0, 1e-3, 1e-3), 0.0);
    EXPECT_DOUBLE_EQ(nonmonotone_patch_deriv(1.0, 0.1, 0.0, 3.0, 1e-3, NonMonotoneMode::PositivePart), 0.0);
    EXPECT_DOUBLE_EQ(nonmonotone_patch_deriv(1.0, 0.1, 0.5, 3.0, 1e-3, NonMonotoneMode::PositivePart), 0.45);
}

TEST(Adaptive, FixedPoint) {
    EXPECT_NEAR(fixed_point_x(1.0, 0.1), 1.0 / 11.0, 1e-15);
    EXPECT_NEAR(fixed_point_beta(1.0, 0.1, 1.0, 5), 50.0 / 11.0, 1e-12);
    const Network net = Network::path(3);
    const NonMonotoneFixedPoint fp = fixed_point(1.0, 0.1, VirusModel::coexisting(kOne), net);
    EXPECT_NEAR(fp.beta[1], 20.0 / 11.0, 1e-12);
    const double two[2] = {1.0, 2.0};
    EXPECT_THROW(fixed_point(1.0, 0.1, VirusModel::coexisting(two), net), MultiVirusUnsupported);
}

TEST(Adaptive, FilterDeriv) {
    const Network edge = Network::path(2);
    const VirusModel m = VirusModel::coexisting(kOne);
    const std::vector<double> half_live{1.0, 0.0};
    EXPECT_NEAR(filter_deriv(0.01, 0.5, half_live, edge, m), 0.01, 1e-15);
    EXPECT_DOUBLE_EQ(filter_deriv(0.01, 0.5, std::vector<double>{0.0, 0.0}, edge, m), 0.0);
    EXPECT_DOUBLE_EQ(filter_deriv(0.01, 0.5, std::vector<double>{1.0, 1.0}, edge, m), 0.0);
    EXPECT_DOUBLE_EQ(filter_deriv(0.01, 1.0, half_live, edge, m), 0.0);
}

TEST(Adaptive, EventUpdates) {
    EventController mono(cfg(ControllerKind::Monotone, 50.0, 0.0));
    SystemState s = state_of({single(0), kClean}, {10.0, 10.0});
    mono.on_event({EventKind::Patch, 0, -1, -1, 0.0}, s);
    EXPECT_DOUBLE_EQ(s.beta[0], 15.0);
    mono.on_event({EventKind::Patch, 1, -1, -1, 0.0}, s);
    EXPECT_DOUBLE_EQ(s.beta[1], 10.0);
    EXPECT_FALSE(mono.needs_clean_inspections());

    EventController nm(cfg(ControllerKind::NonMonotone, 1.0, 0.1));
    EXPECT_TRUE(nm.needs_clean_inspections());
    SystemState c = state_of({kClean, kClean}, {2.0, 1e-3});
    nm.on_event({EventKind::Patch, 0, -1, -1, 0.0}, c);
    nm.on_event({EventKind::Patch, 1, -1, -1, 0.0}, c);
    EXPECT_DOUBLE_EQ(c.beta[0], 1.95);
    EXPECT_DOUBLE_EQ(c.beta[1], 1e-3);

    EventController filt(cfg(ControllerKind::Filter, 1.0, 0.05));
    SystemState f = state_of({single(0), kClean}, {1.0, 1.0}, 0.5);
    filt.on_event({EventKind::FilterDetect, 0, 0, 1, 0.0}, f);
    EXPECT_DOUBLE_EQ(f.q, 0.6);
    f.q = 1.0;
    filt.on_event({EventKind::FilterDetect, 0, 0, 1, 0.0}, f);
    EXPECT_DOUBLE_EQ(f.q, 1.0);
}

TEST(Adaptive, ConfigValidation) {
    EXPECT_THROW(cfg(ControllerKind::Monotone, 0.0, 0.1).validate(), InvalidModel);
    EXPECT_THROW(cfg(ControllerKind::Filter, 1.0, -0.1).validate(), InvalidModel);
    EXPECT_EQ(parse_controller_kind("joint"), ControllerKind::Joint);
    EXPECT_EQ(to_string(ControllerKind::NonMonotone), "nonmonotone");
    EXPECT_EQ(parse_nonmonotone_mode("positive-part"), NonMonotoneMode::PositivePart);
}

TEST(Adaptive, LinearizedJacobianAtFig5bIsHurwitz) {
    const Network net = Network::erdos_renyi(100, 0.05, 3);
    const Eigen::MatrixXd a = linearized_jacobian(net, 1.0, 0.1, 1.0);
    ASSERT_EQ(a.rows(), 200);
    EXPECT_NEAR(a(0, 0), -net.degree(0), 1e-15);
    EXPECT_NEAR(a(0, 100), -0.1 / 1.1, 1e-15);
    EXPECT_NEAR(a(100, 0), 1.1, 1e-15);
    EXPECT_TRUE(hurwitz(a));
}

TEST(Adaptive, SingleHostMonotoneMeanMatchesExactLaw) {
    // One infected host, no neighbors: it is inspected at rate beta0 once.
    const Network net = Network::path(1);
    const VirusModel m = VirusModel::coexisting(kOne);
    MonteCarloConfig mc;
    mc.init = {1.0};
    mc.beta0 = {2.0};
    mc.grid = uniform_grid(2.0, 4);
    mc.trials = 20000;
    mc.seed = 5;
    mc.hook_factory = [] { return make_event_controller(cfg(ControllerKind::Monotone, 1.0, 0.0)); };
    const MonteCarloResult r = monte_carlo(net, m, mc);
    for (std::size_t k = 0; k < r.t.size(); ++k) {
        const double want = 2.0 + 0.5 * (1.0 - std::exp(-2.0 * r.t[k]));
        EXPECT_NEAR(r.mean_beta[k], want, 3.0 * r.se_beta[k] + 1e-12) << r.t[k];
    }
}

TEST(Adaptive, CleanHostNonMonotoneDrift) {
    // A clean host loses gamma / beta per inspection at rate beta: drift -gamma.
    const Network net = Network::path(1);
    const VirusModel m = VirusModel::coexisting(kOne);
    MonteCarloConfig mc;
    mc.init = {0.0};
    mc.beta0 = {2.0};
    mc.grid = uniform_grid(3.0, 3);
    mc.trials = 4000;
    mc.seed = 9;
    mc.hook_factory = [] { return make_event_controller(cfg(ControllerKind::NonMonotone, 1.0, 0.1)); };
    const MonteCarloResult r = monte_carlo(net, m, mc);
    for (std::size_t k = 0; k < r.t.size(); ++k)
        EXPECT_NEAR(r.mean_beta[k], 2.0 - 0.1 * r.t[k], 3.0 * r.se_beta[k] + 2e-3) << r.t[k];
}

namespace {

void check_drift(ControllerKind kind) {
    const Network net = Network::path(3);
    const VirusModel m = VirusModel::coexisting(kOne);
    const ControllerConfig c = cfg(kind, 1.0, 0.1);
    CoSimConfig cs;
    cs.controller = c;
    cs.dynamics = Dynamics::Subset;
    cs.init = {0.5, 0.5, 0.5};
    cs.beta0 = {2.0, 2.0, 2.0};
    cs.grid = uniform_grid(2.0, 10);
    cs.certificates = false;
    const CoSimResult ode = co_simulate(net, m, cs);

    MonteCarloConfig mc;
    mc.init = cs.init;
    mc.beta0 = cs.beta0;
    mc.grid = cs.grid;
    mc.trials = 500;
    mc.seed = 3;
    mc.hook_factory = [c] { return make_event_controller(c); };
    const MonteCarloResult r = monte_carlo(net, m, mc);
    for (std::size_t k = 1; k < r.t.size(); ++k)
        EXPECT_NEAR(r.mean_beta[k], ode.trajectory.mean_beta(k), 3.0 * r.se_beta[k]) << r.t[k];
}

}  // namespace

TEST(Adaptive, MonotoneEventDriftMatchesOde) { check_drift(ControllerKind::Monotone); }
TEST(Adaptive, NonMonotoneEventDriftMatchesOde) { check_drift(ControllerKind::NonMonotone); }

TEST(Adaptive, MonotoneCoSimulationClears) {
    const double two[2] = {1.0, 2.0};
    const Network net = Network::erdos_renyi(30, 0.2, 2);
    CoSimConfig cs;
    cs.controller = cfg(ControllerKind::Monotone, 50.0, 0.0);
    cs.init.assign(60, 0.2);
    cs.beta0.assign(30, 2.0);
    cs.grid = uniform_grid(30.0, 300);
    const CoSimResult r = co_simulate(net, VirusModel::coexisting(two), cs);
    EXPECT_LT(r.trajectory.max_any(r.trajectory.t.size() - 1), 1e-3);
    for (std::size_t k = 1; k < r.trajectory.t.size(); ++k)
        for (int i = 0; i < 30; ++i)
            EXPECT_GE(r.trajectory.beta[k][static_cast<std::size_t>(i)],
                      r.trajectory.beta[k - 1][static_cast<std::size_t>(i)]);
    EXPECT_LE(r.certificates.aggregate_storage, 1e-8);
    EXPECT_LE(r.certificates.lasalle, 1e-8);
    EXPECT_LE(r.certificates.lasalle_step, 1e-8);
    EXPECT_LE(r.certificates.beta_decrease, 0.0);
}

TEST(Adaptive, NonMonotoneOdeReachesFixedPoint) {
    Scenario s = load_scenario("fig5b-nonmono");
    const Network net = s.network.build();
    const VirusModel m = s.model.build();
    CoSimConfig cs;
    cs.controller = s.controller;
    cs.dynamics = s.dynamics;
    cs.init = initial_probabilities(s, net.size(), 1);
    cs.beta0 = initial_rates(s, net.size());
    cs.grid = uniform_grid(1000.0, 10);
    cs.rk4.h = 0.01;
    cs.certificates = false;
    const CoSimResult r = co_simulate(net, m, cs);
    const auto& last = r.trajectory.any.back();
    for (double x : last) EXPECT_NEAR(x, 1.0 / 11.0, 0.02);
}

TEST(Adaptive, ModelAndDynamicsPreconditions) {
    const double two[2] = {1.0, 2.0};
    const Network net = Network::path(2);
    CoSimConfig cs;
    cs.controller = cfg(ControllerKind::NonMonotone, 1.0, 0.1);
    cs.init = {0.1, 0.1, 0.1, 0.1};
    cs.beta0 = {1.0, 1.0};
    cs.grid = uniform_grid(1.0, 2);
    EXPECT_THROW(co_simulate(net, VirusModel::coexisting(two), cs), MultiVirusUnsupported);
    CoSimConfig f = cs;
    f.controller = cfg(ControllerKind::None, 1.0, 0.1);
    f.q0 = 0.1;
    f.dynamics = Dynamics::Aggregate;
    EXPECT_THROW(co_simulate(net, VirusModel::coexisting(two), f), InvalidModel);
}

TEST(Adaptive, EmptyInitialInfectionIdles) {
    const double two[2] = {1.0, 2.0};
    const Network net = Network::cycle(5);
    CoSimConfig cs;
    cs.controller = cfg(ControllerKind::Joint, 5.0, 0.01);
    cs.dynamics = Dynamics::Subset;
    cs.init.assign(10, 0.0);
    cs.beta0.assign(5, 1.0);
    cs.q0 = 0.1;
    cs.grid = uniform_grid(5.0, 5);
    const CoSimResult r = co_simulate(net, VirusModel::coexisting(two), cs);
    for (std::size_t k = 0; k < r.trajectory.t.size(); ++k) {
        EXPECT_EQ(r.trajectory.max_any(k), 0.0);
        EXPECT_DOUBLE_EQ(r.trajectory.mean_beta(k), 1.0);
        EXPECT_DOUBLE_EQ(r.trajectory.q[k], 0.1);
    }
}

// Event-form non-monotone patching on the sparse single-virus scenario: the
// rate jumps at the floor make beta heavy-tailed and the long-run infection
// fraction does not settle at gamma / (alpha + gamma).
TEST(Adaptive, NonMonotoneMonteCarloSettlesAtFixedPoint) {
    Scenario s = load_scenario("fig5b-nonmono");
    s.engine = Engine::Markov;
    s.trials = 100;
    const ScenarioResult res = run_scenario(s);
    const MonteCarloResult& mc = *res.runs.front().markov;
    const std::size_t last = mc.t.size() - 1;
    EXPECT_NEAR(mc.mean_any[last], 1.0 / 11.0, 0.02);
}

#include <gtest/gtest.h>

#include "mvnet/error.hpp"
#include "mvnet/linalg.hpp"
#include "mvnet/passivity.hpp"
#include "mvnet/static_design.hpp"

using namespace mvnet;

namespace {

const double kRates[2] = {1.0, 2.0};

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace

TEST(StaticDesign, FeasibilityExamples) {
    const VirusModel m = VirusModel::coexisting(kRates);
    const Network net = Network::cycle(6);
    const Eigen::MatrixXd qb = build_Qbar(net, m);
    const double top = max_eigenvalue(qb);
    const std::vector<double> uni(6, top + 0.3);
    const Feasibility f = feasible(qb, 3, uni, 0.3);
    EXPECT_TRUE(f.feasible);
    EXPECT_GE(f.margin, -1e-9);
    EXPECT_FALSE(feasible(qb, 3, std::vector<double>(6, 0.0), 0.1).feasible);
    EXPECT_FALSE(feasible(qb, 3, std::vector<double>(6, top + 0.29), 0.3).feasible);
    EXPECT_NEAR(uniform_rate(net, m, 0.0), top, 1e-9);
    EXPECT_NEAR(uniform_rate(qb, 0.3), top + 0.3, 1e-9);

    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(6, 6);
    EXPECT_TRUE(feasible(zero, 3, std::vector<double>{0.5, 0.5}, 0.5).feasible);
    EXPECT_FALSE(feasible(zero, 3, std::vector<double>{0.5, 0.49}, 0.5).feasible);
}

TEST(StaticDesign, UniformRateIsLinearInRates) {
    const double doubled[2] = {2.0, 4.0};
    const Network net = Network::erdos_renyi(15, 0.3, 8);
    const double a = uniform_rate(net, VirusModel::coexisting(kRates), 0.0);
    const double b = uniform_rate(net, VirusModel::coexisting(doubled), 0.0);
    EXPECT_NEAR(b, 2.0 * a, 1e-9);
}

TEST(StaticDesign, ZeroQbarGivesEpsilon) {
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(12, 12);
    const auto costs = uniform_costs(4);
    const DesignResult r = design_min_cost(zero, 3, 0.5, costs);
    ASSERT_EQ(r.beta.size(), 4u);
    for (double b : r.beta) EXPECT_NEAR(b, 0.5, 1e-5);
    EXPECT_GE(r.margin, -1e-9);
}

TEST(StaticDesign, DecoupledHostsSeparate) {
    const VirusModel m = VirusModel::coexisting(kRates);
    Eigen::MatrixXd qb = Eigen::MatrixXd::Zero(6, 6);
    qb.block(0, 0, 3, 3) = Eigen::MatrixXd(build_Qi(3, m).asDiagonal());
    qb.block(3, 3, 3, 3) = Eigen::MatrixXd(build_Qi(5, m).asDiagonal());
    const double eps = 0.2;
    const DesignResult r = design_min_cost(qb, 3, eps, uniform_costs(2));
    EXPECT_NEAR(r.beta[0], build_Qi(3, m).maxCoeff() + eps, 1e-5);
    EXPECT_NEAR(r.beta[1], build_Qi(5, m).maxCoeff() + eps, 1e-5);
    EXPECT_TRUE(feasible(qb, 3, r.beta, eps).feasible);
}

TEST(StaticDesign, RegularGraphUniformSolution) {
    const VirusModel m = VirusModel::coexisting(kRates);
    const Network net = Network::cycle(8);
    const Eigen::MatrixXd qb = build_Qbar(net, m);
    const double eps = 0.5;
    const DesignResult r = design_min_cost(qb, 3, eps, uniform_costs(8));
    const double u = uniform_rate(qb, eps);
    EXPECT_TRUE(feasible(qb, 3, r.beta, eps).feasible);
    for (double b : r.beta) EXPECT_LE(b, u + 1e-4);
    EXPECT_GE(sum(r.beta), 8.0 * u - 1e-3);
}

TEST(StaticDesign, WeightedCostsShiftEffort) {
    const VirusModel m = VirusModel::coexisting(kRates);
    const Network net = Network::path(4);
    const Eigen::MatrixXd qb = build_Qbar(net, m);
    const auto costs = parse_costs("0 5\n# expensive end host\n3 5\n", 4);
    const DesignResult r = design_min_cost(qb, 3, 0.1, costs);
    EXPECT_TRUE(feasible(qb, 3, r.beta, 0.1).feasible);
    const DesignResult ru = design_min_cost(qb, 3, 0.1, uniform_costs(4));
    EXPECT_LT(r.beta[0] + r.beta[3], ru.beta[0] + ru.beta[3] + 1e-6);
}

TEST(StaticDesign, CostMonotoneInEpsilon) {
    const VirusModel m = VirusModel::competing(kRates);
    const Network net = Network::erdos_renyi(8, 0.4, 3);
    const Eigen::MatrixXd qb = build_Qbar(net, m);
    const auto costs = uniform_costs(8);
    double prev = 0.0;
    for (double eps : {0.1, 0.5, 1.0}) {
        const DesignResult r = design_min_cost(qb, m.num_sets(), eps, costs);
        EXPECT_GE(r.cost, prev - 1e-6);
        prev = r.cost;
    }
}

TEST(StaticDesign, PiecewiseCosts) {
    const PiecewiseLinearCost c{{0.0, 2.0}, {1.0, 3.0}};
    EXPECT_DOUBLE_EQ(c.value(1.0), 1.0);
    EXPECT_DOUBLE_EQ(c.value(3.0), 5.0);
    EXPECT_DOUBLE_EQ(c.slope_at(2.0), 3.0);
    EXPECT_THROW((PiecewiseLinearCost{{0.0, 2.0}, {3.0, 1.0}}.validate()), InvalidModel);
    const auto parsed = parse_costs("1 2 4 6\n", 3);
    EXPECT_DOUBLE_EQ(parsed[0].value(2.0), 2.0);
    EXPECT_DOUBLE_EQ(parsed[1].value(5.0), 14.0);
    try {
        parse_costs("0 1\n7 1\n", 3);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 2);
    }
    EXPECT_THROW(parse_costs("0 1 2\n", 3), ConfigError);
}

TEST(StaticDesign, DecayCheck) {
    const VirusModel m = VirusModel::coexisting(kRates);
    const Network net = Network::complete(10);
    const Eigen::MatrixXd qb = build_Qbar(net, m);
    const double eps = 0.5;
    const std::vector<double> grid = uniform_grid(5.0, 50);
    const std::vector<double> zero(20, 0.0);
    // Well above the linearized threshold 2 * 9 of the faster virus.
    const std::vector<double> beta(10, 40.0);
    EXPECT_TRUE(verify_exponential_decay(net, m, beta, eps, zero, grid).pass);

    const std::vector<double> init(20, 0.4);
    const DecayReport ok = verify_exponential_decay(net, m, beta, eps, init, grid);
    EXPECT_TRUE(ok.pass);
    EXPECT_EQ(ok.norm.size(), grid.size());
    const std::vector<double> half(10, 0.5 * uniform_rate(qb, eps));
    EXPECT_GT(ok.worst_ratio, 0.0);
    EXPECT_LE(ok.worst_ratio, 1.0);
    EXPECT_FALSE(verify_exponential_decay(net, m, half, eps, init, grid).pass);
}

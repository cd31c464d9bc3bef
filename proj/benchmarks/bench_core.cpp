#include <benchmark/benchmark.h>

#include "mvnet/linalg.hpp"
#include "mvnet/markov.hpp"
#include "mvnet/meanfield.hpp"
#include "mvnet/passivity.hpp"
#include "mvnet/rng.hpp"
#include "mvnet/static_design.hpp"

using namespace mvnet;

namespace {

const double kRates[2] = {1.0, 2.0};

void BM_EigSym(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    Rng rng(1);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.uniform(-1.0, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(eig_sym(m).values);
}
BENCHMARK(BM_EigSym)->Arg(16)->Arg(64)->Arg(300);

void BM_Qbar(benchmark::State& state) {
    const Network net = Network::erdos_renyi(100, 0.2, 1);
    const VirusModel m = VirusModel::coexisting(kRates);
    for (auto _ : state) benchmark::DoNotOptimize(build_Qbar(net, m));
}
BENCHMARK(BM_Qbar);

void BM_SubsetDerivative(benchmark::State& state) {
    const Network net = Network::erdos_renyi(100, 0.2, 1);
    const VirusModel m = VirusModel::coexisting(kRates);
    const MeanField mf(net, m);
    const std::vector<double> x = mf.singleton_state(std::vector<double>(200, 0.2));
    const std::vector<double> beta(100, 10.0);
    std::vector<double> dx(mf.dim());
    for (auto _ : state) {
        mf.subset_derivative(x, beta, 0.0, dx);
        benchmark::DoNotOptimize(dx.data());
    }
}
BENCHMARK(BM_SubsetDerivative);

void BM_GillespieStep(benchmark::State& state) {
    const Network net = Network::erdos_renyi(100, 0.2, 1);
    const VirusModel m = VirusModel::competing(kRates);
    Rng rng(3);
    SystemState s0;
    s0.beta.assign(100, 10.0);
    s0.infection = draw_initial(std::vector<double>(200, 0.2), 100, 2, rng);
    Simulator sim(net, m, s0);
    for (auto _ : state) {
        if (!sim.step(rng)) {
            state.PauseTiming();
            sim = Simulator(net, m, s0);
            state.ResumeTiming();
        }
    }
}
BENCHMARK(BM_GillespieStep);

void BM_DesignSmall(benchmark::State& state) {
    const Network net = Network::erdos_renyi(20, 0.3, 2);
    const VirusModel m = VirusModel::coexisting(kRates);
    const Eigen::MatrixXd qbar = build_Qbar(net, m);
    const auto costs = uniform_costs(20);
    for (auto _ : state) benchmark::DoNotOptimize(design_min_cost(qbar, m.num_sets(), 0.5, costs).cost);
}
BENCHMARK(BM_DesignSmall)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "fedawe/algorithms.hpp"
#include "fedawe/mixing.hpp"

using namespace fedawe;

namespace {

std::vector<ObjectivePtr> quadratics(int m, int d) {
    std::vector<ObjectivePtr> objs;
    for (int i = 0; i < m; ++i)
        objs.push_back(std::make_shared<QuadraticObjective>(ModelVector::Constant(d, 1.0 * i)));
    return objs;
}

}  // namespace

static void BM_FedaweRound(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const int d = 50;
    auto objs = quadratics(m, d);
    DynamicsSpec dyn;
    dyn.base_p.assign(m, 0.5);
    HyperParams hp;
    hp.eta0 = 0.01;
    hp.rounds = 1;
    ServerState st(ModelVector::Zero(d), m);
    std::vector<Rng> rngs;
    for (int i = 0; i < m; ++i) rngs.push_back(make_stream(1, StreamPurpose::Gradient, i));
    Rng avail = make_stream(1, StreamPurpose::Availability);

    for (auto _ : state) {
        auto active = sample_active(dyn, st.round(), avail);
        fedawe_round(st, active, objs, hp, rngs);
    }
}
BENCHMARK(BM_FedaweRound)->Arg(16)->Arg(64)->Arg(256);

static void BM_BuildW(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    std::vector<int> active;
    for (int i = 0; i < m; i += 2) active.push_back(i);
    for (auto _ : state) benchmark::DoNotOptimize(build_W(active, m));
}
BENCHMARK(BM_BuildW)->Arg(16)->Arg(64)->Arg(256);

static void BM_EmpiricalRho(benchmark::State& state) {
    Rng rng(7);
    for (auto _ : state)
        benchmark::DoNotOptimize(empirical_rho(0.5, static_cast<int>(state.range(0)), 2000, rng));
}
BENCHMARK(BM_EmpiricalRho)->Arg(5)->Arg(10);

BENCHMARK_MAIN();

#include "driftlab/brownian.hpp"
#include "driftlab/harness.hpp"
#include "driftlab/integrators.hpp"
#include "driftlab/models.hpp"

#include <benchmark/benchmark.h>

using namespace driftlab;

namespace {

void BM_EpMidstepOscillator(benchmark::State& state) {
    const SystemModel m = make_oscillator(1.0);
    StepperWorkspace ws;
    StateVec x = m.initial_value, y;
    const double h = state.range(0) / 1024.0;
    for (auto _ : state) {
        ep_midstep(m, x, h, {}, y, ws);
        benchmark::DoNotOptimize(y.data());
    }
}
BENCHMARK(BM_EpMidstepOscillator)->Arg(8)->Arg(64)->Arg(512);

void BM_EpMidstepPendulum(benchmark::State& state) {
    const SystemModel m = make_pendulum(1.0);
    StepperWorkspace ws;
    StateVec x = m.initial_value, y;
    const double h = state.range(0) / 1024.0;
    for (auto _ : state) {
        ep_midstep(m, x, h, {}, y, ws);
        benchmark::DoNotOptimize(y.data());
    }
}
BENCHMARK(BM_EpMidstepPendulum)->Arg(8)->Arg(64)->Arg(512);

void BM_DpStepRigidBody(benchmark::State& state) {
    const SystemModel m =
        make_rigid_body((Eigen::MatrixXd(3, 1) << 0.25, 0.0, 0.0).finished());
    StepperWorkspace ws;
    StateVec x = m.initial_value, y;
    const StateVec w1 = (StateVec(1) << 0.01).finished();
    const StateVec w2 = (StateVec(1) << -0.02).finished();
    for (auto _ : state) {
        dp_step(m, x, 0.0625, w1, w2, {}, y, ws);
        benchmark::DoNotOptimize(y.data());
    }
}
BENCHMARK(BM_DpStepRigidBody);

void BM_EmStepOscillator(benchmark::State& state) {
    const SystemModel m = make_oscillator(1.0);
    StepperWorkspace ws;
    StateVec x = m.initial_value, y;
    const StateVec w = (StateVec(1) << 0.01).finished();
    for (auto _ : state) {
        em_step(m, x, 0.0625, w, y, ws);
        benchmark::DoNotOptimize(y.data());
    }
}
BENCHMARK(BM_EmStepOscillator);

void BM_SamplePath(benchmark::State& state) {
    const long n = state.range(0);
    long sample = 0;
    for (auto _ : state) {
        const BrownianPath p = sample_path(0x5EED, sample++, 1, 0.001, n);
        benchmark::DoNotOptimize(p.increments.data());
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SamplePath)->Arg(256)->Arg(4096);

void BM_Coarsen(benchmark::State& state) {
    const BrownianPath p = sample_path(0x5EED, 0, 1, 0.001, 8192);
    for (auto _ : state) {
        const BrownianPath c = coarsen(p, state.range(0));
        benchmark::DoNotOptimize(c.increments.data());
    }
}
BENCHMARK(BM_Coarsen)->Arg(2)->Arg(64);

void BM_TraceOscillator(benchmark::State& state) {
    const SystemModel m = make_oscillator(1.0);
    RunOptions opts;
    opts.workers = 1;
    for (auto _ : state) {
        const TraceReport r = run_trace(m, SchemeId::DP, 0.125, 1.0,
                                        state.range(0), 0x5EED, Observable::Energy, opts);
        benchmark::DoNotOptimize(r.sample_mean.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TraceOscillator)->Arg(64)->Arg(512);

} // namespace

BENCHMARK_MAIN();

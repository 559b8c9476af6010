#include <benchmark/benchmark.h>

#include "refcond/condensation.hpp"
#include "refcond/controllers.hpp"
#include "refcond/simulation.hpp"
#include "refcond/studies.hpp"

using namespace refcond;

namespace {

DenseQp saturated_qp(int horizon) {
    const BatchOperators ops = build_batch_operators(double_integrator(0.1), unit_weights(), horizon);
    return build_mpc_qp(ops, Vector::Zero(2), Vector::Constant(horizon, 5.0), InputBounds::symmetric(1, 1.0));
}

} // namespace

static void BM_BatchOperators(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(tracking_gains(build_batch_operators(double_integrator(0.1), unit_weights(), n)));
    }
}
BENCHMARK(BM_BatchOperators)->Arg(10)->Arg(50)->Arg(100);

static void BM_CondensationMaps(benchmark::State& state) {
    const TrackingGains g =
        tracking_gains(build_batch_operators(double_integrator(0.1), unit_weights(), static_cast<int>(state.range(0))));
    for (auto _ : state) {
        benchmark::DoNotOptimize(unweighted_map(g));
        benchmark::DoNotOptimize(weighted_map(g, 1e6));
    }
}
BENCHMARK(BM_CondensationMaps)->Arg(50)->Arg(100);

static void BM_QpCold(benchmark::State& state) {
    const DenseQp qp = saturated_qp(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solve(qp));
}
BENCHMARK(BM_QpCold)->Arg(20)->Arg(50)->Arg(100);

static void BM_QpWarm(benchmark::State& state) {
    const DenseQp qp = saturated_qp(static_cast<int>(state.range(0)));
    QpSettings settings;
    settings.warm_start = solve(qp).active_set;
    for (auto _ : state) benchmark::DoNotOptimize(solve(qp, settings));
}
BENCHMARK(BM_QpWarm)->Arg(20)->Arg(50)->Arg(100);

static void BM_ClosedLoopStep(benchmark::State& state) {
    const bool full = state.range(0) != 0;
    for (auto _ : state) {
        SimConfig cfg{
            .sys = double_integrator(0.1),
            .weights = unit_weights(),
            .horizon = 50,
            .t_final = 20.0,
            .x0 = Vector(),
            .kind = full ? ControllerKind::full_preview() : ControllerKind::reference_condensation(1e6),
            .signal = ReferenceSignal::step(5.0, Vector::Zero(1), Vector::Ones(1)),
            .input_bounds = InputBounds::symmetric(1, 1.0),
            .state_constraints = std::nullopt,
        };
        benchmark::DoNotOptimize(simulate_closed_loop(cfg));
    }
}
BENCHMARK(BM_ClosedLoopStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "placecrb/fim.hpp"
#include "placecrb/optimizer.hpp"
#include "placecrb/rng.hpp"
#include "placecrb/simulate.hpp"

using namespace placecrb;

namespace {

Scenario scenario_n(int n) {
    Scenario s;
    RngStream rng(static_cast<std::uint64_t>(n));
    for (int i = 0; i < n; ++i) {
        s.geometry.sensors.push_back({wrap_angle((2.0 * rng.next_double() - 1.0) * kPi),
                                      100.0 + 4900.0 * rng.next_double()});
    }
    s.noise = {0.5, deg2rad(1.0), 1.0, 1.5, 1000.0, 1.0};
    s.combo = MeasurementCombo::all();
    return s;
}

void BM_assemble_direct(benchmark::State& state) {
    const Scenario s = scenario_n(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_fim_direct(s));
    }
}
BENCHMARK(BM_assemble_direct)->Arg(3)->Arg(10)->Arg(100);

void BM_assemble_closed_form(benchmark::State& state) {
    const Scenario s = scenario_n(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_fim_closed_form(s));
    }
}
BENCHMARK(BM_assemble_closed_form)->Arg(3)->Arg(10)->Arg(100);

void BM_gradient_analytic(benchmark::State& state) {
    const Scenario s = scenario_n(static_cast<int>(state.range(0)));
    const OptimizerConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gradient(s, cfg));
    }
}
BENCHMARK(BM_gradient_analytic)->Arg(3)->Arg(10)->Arg(100);

void BM_optimize_case1(benchmark::State& state) {
    Scenario s;
    for (double a : {75.0, 90.0, 105.0}) s.geometry.sensors.push_back({deg2rad(a), 1000.0});
    s.noise = {0.5, deg2rad(1.0), 1.0, 1.5, 1000.0, 1.0};
    s.combo = MeasurementCombo::all();
    for (auto _ : state) {
        benchmark::DoNotOptimize(optimize(s, OptimizerConfig{}, 0));
    }
}
BENCHMARK(BM_optimize_case1);

void BM_mle_trial(benchmark::State& state) {
    const Scenario s = scenario_n(static_cast<int>(state.range(0)));
    std::uint64_t trial = 0;
    for (auto _ : state) {
        RngStream rng = RngStream::substream(7, trial++);
        const MeasurementVector m = sample_measurements(s, rng);
        benchmark::DoNotOptimize(mle_estimate(m, s, s.geometry.source));
    }
}
BENCHMARK(BM_mle_trial)->Arg(3)->Arg(10);

} // namespace

BENCHMARK_MAIN();

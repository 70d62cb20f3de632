#include <cohortflow/forecast.hpp>

#include "fixtures.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace cohortflow;

void BM_Step(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto model = testing::random_model(rng, StateSpace::standard());
    const auto v = testing::random_vector(rng, model.space().enrolled_size());
    for (auto _ : state) {
        benchmark::DoNotOptimize(step(v, model));
    }
}
BENCHMARK(BM_Step);

void BM_Project(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const auto model = testing::random_model(rng, StateSpace::standard());
    const auto v = testing::random_vector(rng, model.space().enrolled_size());
    const int horizon = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(project(v, model, horizon));
    }
    state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(BM_Project)->Arg(10)->Arg(100)->Arg(1000);

void BM_ApplyScenario(benchmark::State& state) {
    std::mt19937_64 rng(3);
    const auto model = testing::random_model(rng, StateSpace::standard());
    ScenarioSpec spec;
    spec.cell_overrides = {{"Freshman", "Sophomore", 0.6}, {"Junior", "Departed", 0.1}};
    spec.inflow_override = InflowMultiplier{1.5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(apply_scenario(model, spec));
    }
}
BENCHMARK(BM_ApplyScenario);

} // namespace

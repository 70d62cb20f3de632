#include <cohortflow/estimation.hpp>
#include <cohortflow/ingestion.hpp>

#include "fixtures.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace cohortflow;

std::vector<EnrollmentSnapshot> world(double students, int terms) {
    const double third = students / 3.0;
    SyntheticConfig cfg{testing::worked_example_with_departures({third / 20.0, 0, 0}),
                        StateVector({third, third, third}), terms, InflowMode::FixedPerTerm, 42,
                        "T"};
    return generate_synthetic(cfg);
}

void BM_Generate(benchmark::State& state) {
    const double students = static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(world(students, 8));
    }
}
BENCHMARK(BM_Generate)->Arg(3000)->Arg(30000)->Unit(benchmark::kMillisecond);

void BM_Fit(benchmark::State& state) {
    const auto data = world(static_cast<double>(state.range(0)), 8);
    FitConfig cfg;
    cfg.space = testing::three_stage_space();
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit(data, cfg));
    }
}
BENCHMARK(BM_Fit)->Arg(3000)->Arg(30000)->Unit(benchmark::kMillisecond);

void BM_ParseCsv(benchmark::State& state) {
    const std::string csv = write_snapshot_csv(world(30000, 8));
    const auto space = testing::three_stage_space();
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_snapshot_csv(csv, space));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(csv.size()));
}
BENCHMARK(BM_ParseCsv)->Unit(benchmark::kMillisecond);

} // namespace

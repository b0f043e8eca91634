#include <benchmark/benchmark.h>

#include "pocc/datagen.hpp"

using namespace pocc;

static void BM_GeneratePopulation(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        generate_population(ScenarioSpec::preset(Scenario::III, seed++)));
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_GeneratePopulation)->Unit(benchmark::kMillisecond);

static void BM_SampleDesign(benchmark::State& state) {
  const Population pop = generate_population(ScenarioSpec::preset(Scenario::I, 1));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_design(pop, state.range(0), seed++));
  }
}
BENCHMARK(BM_SampleDesign)->Arg(500)->Arg(3000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "pocc/datagen.hpp"
#include "pocc/sampler.hpp"

using namespace pocc;

static void BM_ChainIteration(benchmark::State& state) {
  const long n = state.range(0);
  const Population pop = generate_population(ScenarioSpec::preset(Scenario::I, 5));
  const DrawnSample drawn = sample_design(pop, n, 6);
  SamplerConfig config;
  config.model = EstimatorSpec::m2();
  const Sampler sampler(drawn.sample, config);
  Rng rng(11);
  ChainState chain_state = sampler.init_chain(rng);
  const std::vector<double> scales = {0.3, 0.1};
  for (auto _ : state) {
    sampler.update_beta(chain_state, rng, scales);
    sampler.augment(chain_state, rng);
    benchmark::DoNotOptimize(chain_state.log_post);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ChainIteration)->Arg(500)->Arg(2000);

static void BM_FullStudyFit(benchmark::State& state) {
  const Population pop = generate_population(ScenarioSpec::preset(Scenario::I, 5));
  const DrawnSample drawn = sample_design(pop, state.range(0), 6);
  SamplerConfig config;
  config.model = EstimatorSpec::m2();
  config.burn_in = 10000;
  config.keep = 5000;
  config.seed = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_chain(drawn.sample, config));
  }
}
BENCHMARK(BM_FullStudyFit)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond)->Iterations(1);

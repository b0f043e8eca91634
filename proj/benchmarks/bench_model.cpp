#include <benchmark/benchmark.h>

#include "pocc/model.hpp"
#include "pocc/rng.hpp"

using namespace pocc;

namespace {

CaseControlSample make_sample(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  CaseControlSample sample;
  sample.design = Matrix(n, 2);
  sample.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sample.design(i, 0) = 1.0;
    sample.design(i, 1) = rng.next_normal(0, 3);
    sample.z[i] = i < n / 5 ? 1 : 0;
  }
  return sample;
}

}  // namespace

static void BM_ObservedLogLikelihood(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const CaseControlSample sample = make_sample(n, 42);
  const SampleCounts counts{static_cast<long>(n / 5), static_cast<long>(n - n / 5),
                            static_cast<long>(n / 5)};
  const Beta beta = {0.1, 0.9};
  for (auto _ : state) {
    benchmark::DoNotOptimize(observed_log_likelihood(beta, sample, counts));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ObservedLogLikelihood)->Arg(500)->Arg(2000)->Arg(3000);

static void BM_StratumProbabilities(benchmark::State& state) {
  Rng rng(7);
  std::vector<double> ts(1024);
  for (auto& t : ts) t = rng.next_normal(0, 5);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stratum_presence_prob(ts[i & 1023], 100.0, 80.0));
    ++i;
  }
}
BENCHMARK(BM_StratumProbabilities);

static void BM_InverseLogit(benchmark::State& state) {
  Rng rng(9);
  std::vector<double> ts(1024);
  for (auto& t : ts) t = rng.next_normal(0, 10);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(inverse_logit(ts[i & 1023]));
    ++i;
  }
}
BENCHMARK(BM_InverseLogit);

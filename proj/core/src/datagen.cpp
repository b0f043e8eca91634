#include "pocc/datagen.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pocc/rng.hpp"

namespace pocc {

std::array<double, 3> scenario_beta(Scenario s) {
  switch (s) {
    case Scenario::I: return {0.0, 1.0, 0.0};
    case Scenario::II: return {0.0, 1.0, 1.0};
    case Scenario::III: return {1.0, 1.0, 1.0};
  }
  throw std::invalid_argument("scenario_beta: unknown scenario");
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::I: return "i";
    case Scenario::II: return "ii";
    case Scenario::III: return "iii";
  }
  throw std::invalid_argument("to_string: unknown scenario");
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "i") return Scenario::I;
  if (name == "ii") return Scenario::II;
  if (name == "iii") return Scenario::III;
  throw std::invalid_argument("unknown scenario '" + name + "' (expected i, ii or iii)");
}

ScenarioSpec ScenarioSpec::preset(Scenario s, std::uint64_t seed, long population_size) {
  ScenarioSpec spec;
  spec.beta_true = scenario_beta(s);
  spec.population_size = population_size;
  spec.seed = seed;
  return spec;
}

void validate(const ScenarioSpec& spec) {
  if (spec.population_size <= 0)
    throw std::invalid_argument("ScenarioSpec: population_size must be positive");
  if (!(spec.mixture.sigma2 > 0.0))
    throw std::invalid_argument("ScenarioSpec: mixture sigma2 must be positive");
  if (!(spec.mixture.p_weight > 0.0 && spec.mixture.p_weight < 1.0))
    throw std::invalid_argument("ScenarioSpec: mixture p_weight must lie in (0,1)");
}

long Population::presence_count() const {
  long n = 0;
  for (std::uint8_t yi : y) n += (yi != 0);
  return n;
}

double Population::pi_true() const {
  if (y.empty()) return 0.0;
  return static_cast<double>(presence_count()) / static_cast<double>(y.size());
}

PopulationCounts Population::counts() const {
  return PopulationCounts{static_cast<long>(y.size()), presence_count()};
}

Population generate_population(const ScenarioSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const double sigma = std::sqrt(spec.mixture.sigma2);
  const auto& b = spec.beta_true;

  Population pop;
  const auto n = static_cast<std::size_t>(spec.population_size);
  pop.x1.reserve(n);
  pop.x2.reserve(n);
  pop.y.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool upper = rng.next_bernoulli(spec.mixture.p_weight);
    const double x1 = rng.next_normal(upper ? spec.mixture.mu_a : spec.mixture.mu_b, sigma);
    const double x2 = rng.next_normal();
    const double p = inverse_logit(b[0] + b[1] * x1 + b[2] * x2);
    pop.x1.push_back(x1);
    pop.x2.push_back(x2);
    pop.y.push_back(rng.next_bernoulli(p) ? 1 : 0);
  }
  return pop;
}

namespace {

// First k entries of a seeded partial Fisher-Yates shuffle of `pool`.
std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t> pool,
                                                  std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

DrawnSample sample_design(const Population& population, long n, std::uint64_t seed) {
  if (n <= 0 || n % 5 != 0)
    throw std::invalid_argument("sample_design: n must be a positive multiple of 5");
  const long n_p = n / 5;
  const long n_u = n - n_p;

  std::vector<std::size_t> presence_pool;
  for (std::size_t i = 0; i < population.size(); ++i)
    if (population.y[i]) presence_pool.push_back(i);
  if (static_cast<long>(presence_pool.size()) < n_p)
    throw std::invalid_argument("sample_design: population has fewer than n/5 presences");
  if (static_cast<long>(population.size()) < n_u)
    throw std::invalid_argument("sample_design: population smaller than 4n/5");

  Rng rng(seed);
  const auto presence_rows = draw_without_replacement(std::move(presence_pool),
                                                      static_cast<std::size_t>(n_p), rng);
  std::vector<std::size_t> all(population.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto background_rows =
      draw_without_replacement(std::move(all), static_cast<std::size_t>(n_u), rng);

  DrawnSample out;
  out.sample.design = Matrix(static_cast<std::size_t>(n), 2);
  out.sample.z.reserve(static_cast<std::size_t>(n));
  out.sample.unit_id.reserve(static_cast<std::size_t>(n));
  out.truth.y.reserve(static_cast<std::size_t>(n));

  std::size_t row = 0;
  auto push = [&](std::size_t unit, std::uint8_t z) {
    out.sample.design(row, 0) = 1.0;
    out.sample.design(row, 1) = population.x1[unit];
    out.sample.z.push_back(z);
    out.sample.unit_id.push_back(static_cast<std::int64_t>(unit) + 1);
    out.truth.y.push_back(population.y[unit]);
    ++row;
  };
  for (std::size_t unit : presence_rows) push(unit, 1);
  for (std::size_t unit : background_rows) push(unit, 0);
  return out;
}

EvalSet draw_eval_set(const Population& population, long size, std::uint64_t seed) {
  if (size <= 0) throw std::invalid_argument("draw_eval_set: size must be positive");
  if (static_cast<long>(population.size()) < size)
    throw std::invalid_argument("draw_eval_set: population smaller than requested size");
  Rng rng(seed);
  std::vector<std::size_t> all(population.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto rows = draw_without_replacement(std::move(all), static_cast<std::size_t>(size), rng);
  EvalSet eval;
  eval.x1.reserve(rows.size());
  eval.y.reserve(rows.size());
  for (std::size_t unit : rows) {
    eval.x1.push_back(population.x1[unit]);
    eval.y.push_back(population.y[unit]);
  }
  return eval;
}

}  // namespace pocc

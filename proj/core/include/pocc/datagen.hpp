#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pocc/model.hpp"

namespace pocc {

/// The three study scenarios; they differ only in the generating coefficients.
enum class Scenario { I, II, III };

std::array<double, 3> scenario_beta(Scenario s);
std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

/// Two-component Gaussian mixture generating the informative covariate x1.
struct MixtureSpec {
  double mu_a = 4.0;
  double mu_b = -4.0;
  double sigma2 = 4.0;
  double p_weight = 0.165;  ///< probability of the mu_a component
};

struct ScenarioSpec {
  std::array<double, 3> beta_true{};  ///< (intercept, x1 slope, x2 slope)
  long population_size = 10000;
  MixtureSpec mixture{};
  std::uint64_t seed = 0;

  static ScenarioSpec preset(Scenario s, std::uint64_t seed, long population_size = 10000);
};

void validate(const ScenarioSpec& spec);

/// Full synthetic universe: covariates and true responses for every unit.
struct Population {
  std::vector<double> x1;
  std::vector<double> x2;
  std::vector<std::uint8_t> y;

  std::size_t size() const { return y.size(); }
  long presence_count() const;
  double pi_true() const;
  PopulationCounts counts() const;
};

Population generate_population(const ScenarioSpec& spec);

/// True responses for the rows of a drawn sample. Kept apart from
/// CaseControlSample so estimators can never see them; evaluation code
/// requests them explicitly.
struct SampleTruth {
  std::vector<std::uint8_t> y;  ///< aligned with the sample rows
};

struct DrawnSample {
  CaseControlSample sample;
  SampleTruth truth;
};

/// Modified case-control draw: n/5 presences uniformly from the presence
/// set, 4n/5 background units uniformly from the whole population,
/// independently and without replacement. The sample design carries an
/// intercept column and x1 only.
DrawnSample sample_design(const Population& population, long n, std::uint64_t seed);

/// Labeled holdout for sensitivity/specificity evaluation.
struct EvalSet {
  std::vector<double> x1;
  std::vector<std::uint8_t> y;
};

EvalSet draw_eval_set(const Population& population, long size, std::uint64_t seed);

}  // namespace pocc

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pocc/datagen.hpp"
#include "pocc/sampler.hpp"

namespace pocc {

/// Cartesian simulation grid: scenarios x sample sizes x replicates x models.
struct ExperimentGrid {
  std::vector<Scenario> scenarios;
  std::vector<long> sizes;
  long replicates = 1;
  std::vector<ModelVariant> models;
  std::uint64_t master_seed = 0;
  long population_size = 10000;
  long eval_size = 2000;
  /// Replaces the per-scenario generating coefficients; intended for
  /// diagnostics and failure injection, not for replication runs.
  std::optional<std::array<double, 3>> beta_override;
};

/// Sample sizes the harness accepts in a grid.
std::span<const long> allowed_grid_sizes();

void validate(const ExperimentGrid& grid);

struct ReplicateResult {
  Scenario scenario{};
  long n = 0;
  ModelVariant model{};
  long replicate = 0;
  std::vector<double> beta_hat;  ///< posterior means
  double pi_hat = 0.0;
  double accept_rate = 0.0;
  double sens = 0.0;  ///< NaN when the eval set has no positives
  double spec = 0.0;  ///< NaN when the eval set has no negatives
  bool failed = false;
  std::string error;
};

struct ScenarioTruth {
  std::array<double, 3> beta_true{};
  double pi_true = 0.0;  ///< realized prevalence of the shared population
};

struct GridRun {
  std::vector<ReplicateResult> results;
  std::vector<std::pair<Scenario, ScenarioTruth>> truth;
};

// Seed derivations shared by the harness and the CLI, so a dataset written by
// `generate` is exactly replicate 0 of a `simulate` run with the same seed.
std::uint64_t population_seed(std::uint64_t master_seed, Scenario scenario);
std::uint64_t eval_seed(std::uint64_t master_seed, Scenario scenario);

/// Deterministic seed for one replicate's sample draw.
std::uint64_t replicate_seed(std::uint64_t master_seed, Scenario scenario, long n,
                             long replicate);

/// Runs every (scenario, n, replicate, model) combination. One population and
/// one labeled eval set are generated per scenario from the master seed; every
/// replicate redraws the case-control sample and all requested models fit that
/// same sample. Failures are recorded on the affected results and do not stop
/// the run. `jobs` <= 0 uses the hardware concurrency; the output is
/// independent of `jobs` and of worker scheduling.
GridRun run_grid(const ExperimentGrid& grid, const SamplerConfig& base_config,
                 int jobs = 0,
                 const std::function<void(std::size_t done, std::size_t total)>& progress = {});

struct Correlations {
  double b0_b1 = 0.0;
  double b0_pi = 0.0;
  double b1_pi = 0.0;
};

/// Pearson correlations of the per-replicate point estimates; NaN marks a
/// zero-variance (undefined) entry.
Correlations compute_correlations(std::span<const double> b0, std::span<const double> b1,
                                  std::span<const double> pi);

struct SensSpec {
  double sensitivity = 0.0;
  double specificity = 0.0;
};

/// Classifies eval units with the population rule
/// inverse_logit(b0 + b1 x1) >= 1/2 and scores against the true labels.
SensSpec compute_sens_spec(std::span<const double> beta_hat, const EvalSet& eval);

struct CellStats {
  Scenario scenario{};
  long n = 0;
  ModelVariant model{};
  long n_ok = 0;      ///< replicates that produced estimates
  long n_failed = 0;
  double b0_median = 0.0, b0_q1 = 0.0, b0_q3 = 0.0;
  double b1_median = 0.0, b1_q1 = 0.0, b1_q3 = 0.0;
  double pi_median = 0.0, pi_q1 = 0.0, pi_q3 = 0.0;
  double rmse_b0 = 0.0, rmse_b1 = 0.0, rmse_pi = 0.0;
  double corr_b0_b1 = 0.0, corr_b0_pi = 0.0, corr_b1_pi = 0.0;  ///< NaN = undefined
  double mean_sens = 0.0, mean_spec = 0.0;  ///< undefined replicates excluded
  long excluded_sens = 0, excluded_spec = 0;
  double mean_accept = 0.0;
};

/// Predictive performance of M2 relative to the M1 benchmark in one
/// (scenario, n) slice; NaN when either side is unavailable.
struct RelativePrediction {
  Scenario scenario{};
  long n = 0;
  double sensitivity = 0.0;
  double specificity = 0.0;
};

struct GridSummary {
  std::vector<CellStats> cells;
  std::vector<RelativePrediction> relative;
  std::vector<std::pair<Scenario, ScenarioTruth>> truth;
};

GridSummary summarize_grid(const GridRun& run);

/// Field-by-field equality with NaN treated as equal to NaN; used to verify
/// that a re-derived summary matches a stored one without rounding drift.
bool exactly_equal(const GridSummary& a, const GridSummary& b);

}  // namespace pocc

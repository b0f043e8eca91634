#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pocc/matrix.hpp"

namespace pocc {

// Probability core for logistic regression on presence-only data under the
// modified case-control design. Everything here is a pure function of its
// arguments; offsets and stratum probabilities are parametrized by the
// effective presence count in the background sample so the same code serves
// both the augmented-count and the known-prevalence variants.

/// Regression coefficients; index 0 is the intercept when the design matrix
/// carries an intercept column.
using Beta = std::vector<double>;

/// Counts describing one case-control sample (Table-2 margins).
struct SampleCounts {
  long n_p = 0;    ///< observed presences (presence-stratum rows)
  long n_u = 0;    ///< background sample size
  long n_1u = 0;   ///< presences among the background rows (latent, augmented)
};

/// Throws std::invalid_argument unless 0 <= n_1u <= n_u, n_p >= 0, n_u >= 1.
void validate(const SampleCounts& counts);

/// Finite-population margins (Table-1).
struct PopulationCounts {
  long total = 0;      ///< N
  long presences = 0;  ///< N_1
  double prevalence() const { return static_cast<double>(presences) / static_cast<double>(total); }
};

/// Per-stratum sample inclusion probabilities.
struct InclusionRates {
  double rho0 = 0.0;  ///< Pr(C=1 | Y=0)
  double rho1 = 0.0;  ///< Pr(C=1 | Y=1)
};

/// Independent Gaussian prior, one (mean, variance) pair per coefficient.
struct PriorSpec {
  std::vector<double> mean;
  std::vector<double> variance;

  static PriorSpec iid(std::size_t size, double mean, double variance);
};

void validate(const PriorSpec& prior, std::size_t beta_size);

/// Case-control sample as seen by the estimators: a design matrix (intercept
/// column first), the stratum indicator z, and optional unit provenance.
/// True responses are deliberately not part of this type.
struct CaseControlSample {
  Matrix design;                     ///< n rows, one per sampled unit
  std::vector<std::uint8_t> z;       ///< 1 = drawn from the presence stratum
  std::vector<std::int64_t> unit_id; ///< empty when provenance is not tracked

  std::size_t size() const { return z.size(); }
  long presence_count() const;
  long background_count() const;
};

/// Throws unless row counts are coherent and `counts` matches the sample.
void validate(const CaseControlSample& sample);
void validate_against(const CaseControlSample& sample, const SampleCounts& counts);

// --- link functions -------------------------------------------------------

/// log(p/(1-p)); domain error unless 0 < p < 1.
double logit(double p);

/// Overflow-safe sigmoid: e^phi / (1 + e^phi).
double inverse_logit(double phi);

/// log(1 + e^t), stable over the whole real line.
double log1pexp(double t);

// --- offsets ---------------------------------------------------------------

/// Classic case-control intercept correction log(n1/n0) - log(pi/(1-pi)).
double case_control_offset(long n_cases, long n_controls, double prevalence);

/// Presence probability in the presence-augmented population: 2p/(1+p).
double marginal_presence_prob(double pi_star);

/// Offset from the augmented background count: log((n_1u + n_p)/n_1u).
/// Domain error when counts.n_1u < 1; callers clamp the augmentation first.
double sample_count_offset(const SampleCounts& counts);

/// Offset from expected counts under a known prevalence:
/// log((pi*n_u + n_p)/(pi*n_u)).
double known_prevalence_offset(double pi, long n_u, long n_p);

// --- stratum probabilities --------------------------------------------------

// `nu` is the effective presence count in the background sample: the
// augmented n_1u, or pi*n_u when the prevalence is known.

/// Pr(Z=1 | C=1, x): (n_p/nu) e^xb / (1 + (1 + n_p/nu) e^xb).
double stratum_presence_prob(double xbeta, double n_p, double nu);
double stratum_background_prob(double xbeta, double n_p, double nu);
double log_stratum_presence_prob(double xbeta, double n_p, double nu);
double log_stratum_background_prob(double xbeta, double n_p, double nu);

double stratum_presence_prob(double xbeta, const SampleCounts& counts);
double stratum_background_prob(double xbeta, const SampleCounts& counts);

// --- likelihood and posterior ------------------------------------------------

/// Log-likelihood of the observed strata z given beta, with the effective
/// presence count taken from counts.n_1u.
double observed_log_likelihood(const Beta& beta, const CaseControlSample& sample,
                               const SampleCounts& counts);

/// Same likelihood with an arbitrary (possibly non-integer) effective count.
double observed_log_likelihood_nu(const Beta& beta, const CaseControlSample& sample,
                                  double nu);

/// Core of the likelihood over precomputed linear predictors; the other
/// overloads and the sampler's cached path all reduce to this sum.
double observed_log_likelihood_from_predictors(std::span<const double> xbeta,
                                               std::span<const std::uint8_t> z,
                                               double n_p, double nu);

/// Plain Bernoulli-logit log-likelihood of observed responses y on a design.
double logistic_log_likelihood(const Beta& beta, const Matrix& design,
                               std::span<const std::uint8_t> y);

/// Gaussian log-density of beta under the prior, normalizing constants included.
double log_prior_density(const Beta& beta, const PriorSpec& prior);

double log_posterior(const Beta& beta, const PriorSpec& prior,
                     const CaseControlSample& sample, const SampleCounts& counts);

/// Conditional presence probability for an unlabeled background unit given
/// its linear predictor; this is the augmentation distribution and equals
/// the population model inverse_logit(xbeta).
double predictive_presence_prob(double xbeta);

/// Inclusion rates implied by population and sample margins:
/// rho0 = n_0u/((1-pi)N), rho1 = (n_1u + n_p)/(2 pi N).
InclusionRates inclusion_rates(const PopulationCounts& population,
                               const SampleCounts& counts);

}  // namespace pocc

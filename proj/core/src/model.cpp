#include "pocc/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pocc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void validate(const SampleCounts& counts) {
  require(counts.n_p >= 0, "SampleCounts: n_p must be >= 0");
  require(counts.n_u >= 1, "SampleCounts: n_u must be >= 1");
  require(counts.n_1u >= 0 && counts.n_1u <= counts.n_u,
          "SampleCounts: n_1u must lie in [0, n_u]");
}

PriorSpec PriorSpec::iid(std::size_t size, double mean, double variance) {
  return PriorSpec{std::vector<double>(size, mean), std::vector<double>(size, variance)};
}

void validate(const PriorSpec& prior, std::size_t beta_size) {
  require(prior.mean.size() == beta_size && prior.variance.size() == beta_size,
          "PriorSpec: dimension does not match beta");
  for (double v : prior.variance) require(v > 0.0, "PriorSpec: variances must be positive");
}

long CaseControlSample::presence_count() const {
  long n = 0;
  for (std::uint8_t zi : z) n += (zi != 0);
  return n;
}

long CaseControlSample::background_count() const {
  return static_cast<long>(z.size()) - presence_count();
}

void validate(const CaseControlSample& sample) {
  require(sample.design.rows() == sample.z.size(),
          "CaseControlSample: design rows and z length differ");
  require(sample.unit_id.empty() || sample.unit_id.size() == sample.z.size(),
          "CaseControlSample: unit_id length does not match rows");
  require(sample.design.cols() >= 1, "CaseControlSample: design has no columns");
}

void validate_against(const CaseControlSample& sample, const SampleCounts& counts) {
  validate(sample);
  validate(counts);
  require(counts.n_p == sample.presence_count(),
          "SampleCounts: n_p does not match the sample");
  require(counts.n_u == sample.background_count(),
          "SampleCounts: n_u does not match the sample");
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("logit: p must lie in (0,1)");
  return std::log(p) - std::log1p(-p);
}

double inverse_logit(double phi) {
  if (phi >= 0.0) {
    return 1.0 / (1.0 + std::exp(-phi));
  }
  const double e = std::exp(phi);
  return e / (1.0 + e);
}

double log1pexp(double t) {
  // Piecewise evaluation keeps every branch within a few ulp.
  if (t <= -37.0) return std::exp(t);
  if (t <= 18.0) return std::log1p(std::exp(t));
  if (t <= 33.3) return t + std::exp(-t);
  return t;
}

double case_control_offset(long n_cases, long n_controls, double prevalence) {
  if (n_cases <= 0 || n_controls <= 0)
    throw std::domain_error("case_control_offset: counts must be positive");
  if (!(prevalence > 0.0 && prevalence < 1.0))
    throw std::domain_error("case_control_offset: prevalence must lie in (0,1)");
  return std::log(static_cast<double>(n_cases) / static_cast<double>(n_controls)) -
         logit(prevalence);
}

double marginal_presence_prob(double pi_star) {
  if (!(pi_star >= 0.0 && pi_star <= 1.0))
    throw std::domain_error("marginal_presence_prob: pi_star must lie in [0,1]");
  return 2.0 * pi_star / (1.0 + pi_star);
}

double sample_count_offset(const SampleCounts& counts) {
  validate(counts);
  if (counts.n_1u < 1)
    throw std::domain_error("sample_count_offset: n_1u must be >= 1 (clamp before use)");
  return std::log1p(static_cast<double>(counts.n_p) / static_cast<double>(counts.n_1u));
}

double known_prevalence_offset(double pi, long n_u, long n_p) {
  if (!(pi > 0.0 && pi < 1.0))
    throw std::domain_error("known_prevalence_offset: pi must lie in (0,1)");
  if (n_u <= 0) throw std::domain_error("known_prevalence_offset: n_u must be positive");
  if (n_p < 0) throw std::domain_error("known_prevalence_offset: n_p must be >= 0");
  return std::log1p(static_cast<double>(n_p) / (pi * static_cast<double>(n_u)));
}

namespace {

void require_effective_count(double n_p, double nu) {
  if (!(nu > 0.0))
    throw std::domain_error("stratum probability: effective presence count must be positive");
  if (n_p < 0.0) throw std::domain_error("stratum probability: n_p must be >= 0");
}

}  // namespace

double stratum_presence_prob(double xbeta, double n_p, double nu) {
  require_effective_count(n_p, nu);
  const double r = n_p / nu;
  const double c = 1.0 + r;
  if (xbeta <= 0.0) {
    const double e = std::exp(xbeta);
    return r * e / (1.0 + c * e);
  }
  const double q = std::exp(-xbeta);
  return r / (q + c);
}

double stratum_background_prob(double xbeta, double n_p, double nu) {
  require_effective_count(n_p, nu);
  const double c = 1.0 + n_p / nu;
  if (xbeta <= 0.0) {
    const double e = std::exp(xbeta);
    return (1.0 + e) / (1.0 + c * e);
  }
  const double q = std::exp(-xbeta);
  return (q + 1.0) / (q + c);
}

double log_stratum_presence_prob(double xbeta, double n_p, double nu) {
  require_effective_count(n_p, nu);
  if (n_p == 0.0) return -std::numeric_limits<double>::infinity();
  const double r = n_p / nu;
  const double log_c = std::log1p(r);
  return std::log(r) + xbeta - log1pexp(xbeta + log_c);
}

double log_stratum_background_prob(double xbeta, double n_p, double nu) {
  require_effective_count(n_p, nu);
  const double log_c = std::log1p(n_p / nu);
  return log1pexp(xbeta) - log1pexp(xbeta + log_c);
}

double stratum_presence_prob(double xbeta, const SampleCounts& counts) {
  validate(counts);
  if (counts.n_1u < 1)
    throw std::domain_error("stratum_presence_prob: n_1u must be >= 1 (clamp before use)");
  return stratum_presence_prob(xbeta, static_cast<double>(counts.n_p),
                               static_cast<double>(counts.n_1u));
}

double stratum_background_prob(double xbeta, const SampleCounts& counts) {
  validate(counts);
  if (counts.n_1u < 1)
    throw std::domain_error("stratum_background_prob: n_1u must be >= 1 (clamp before use)");
  return stratum_background_prob(xbeta, static_cast<double>(counts.n_p),
                                 static_cast<double>(counts.n_1u));
}

double observed_log_likelihood(const Beta& beta, const CaseControlSample& sample,
                               const SampleCounts& counts) {
  validate(sample);
  if (sample.size() == 0) return 0.0;
  validate_against(sample, counts);
  if (counts.n_1u < 1)
    throw std::domain_error("observed_log_likelihood: n_1u must be >= 1 (clamp before use)");
  return observed_log_likelihood_nu(beta, sample, static_cast<double>(counts.n_1u));
}

double observed_log_likelihood_nu(const Beta& beta, const CaseControlSample& sample,
                                  double nu) {
  validate(sample);
  if (sample.design.cols() != beta.size())
    throw std::invalid_argument("observed_log_likelihood: beta length does not match design");
  if (sample.size() == 0) return 0.0;

  std::vector<double> xbeta(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i)
    xbeta[i] = dot(sample.design.row(i), std::span<const double>(beta));
  return observed_log_likelihood_from_predictors(
      xbeta, sample.z, static_cast<double>(sample.presence_count()), nu);
}

double observed_log_likelihood_from_predictors(std::span<const double> xbeta,
                                               std::span<const std::uint8_t> z,
                                               double n_p, double nu) {
  if (xbeta.size() != z.size())
    throw std::invalid_argument("observed_log_likelihood: predictor and z lengths differ");
  if (xbeta.empty()) return 0.0;
  require_effective_count(n_p, nu);
  const double r = n_p / nu;
  const double log_c = std::log1p(r);
  const double log_r = n_p > 0.0 ? std::log(r) : 0.0;

  double total = 0.0;
  for (std::size_t i = 0; i < xbeta.size(); ++i) {
    const double denom = log1pexp(xbeta[i] + log_c);
    if (z[i]) {
      total += log_r + xbeta[i] - denom;
    } else {
      total += log1pexp(xbeta[i]) - denom;
    }
  }
  return total;
}

double logistic_log_likelihood(const Beta& beta, const Matrix& design,
                               std::span<const std::uint8_t> y) {
  if (design.rows() != y.size())
    throw std::invalid_argument("logistic_log_likelihood: design rows and y length differ");
  if (design.cols() != beta.size())
    throw std::invalid_argument("logistic_log_likelihood: beta length does not match design");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double t = dot(design.row(i), std::span<const double>(beta));
    total += (y[i] ? t : 0.0) - log1pexp(t);
  }
  return total;
}

double log_prior_density(const Beta& beta, const PriorSpec& prior) {
  validate(prior, beta.size());
  double total = 0.0;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    const double d = beta[j] - prior.mean[j];
    total += -0.5 * std::log(2.0 * std::numbers::pi * prior.variance[j]) -
             d * d / (2.0 * prior.variance[j]);
  }
  return total;
}

double log_posterior(const Beta& beta, const PriorSpec& prior,
                     const CaseControlSample& sample, const SampleCounts& counts) {
  return observed_log_likelihood(beta, sample, counts) + log_prior_density(beta, prior);
}

double predictive_presence_prob(double xbeta) { return inverse_logit(xbeta); }

InclusionRates inclusion_rates(const PopulationCounts& population,
                               const SampleCounts& counts) {
  validate(counts);
  if (population.total <= 0)
    throw std::domain_error("inclusion_rates: population size must be positive");
  if (population.presences <= 0 || population.presences >= population.total)
    throw std::domain_error("inclusion_rates: prevalence must lie strictly in (0,1)");
  const double pi = population.prevalence();
  const double n = static_cast<double>(population.total);
  const double n_0u = static_cast<double>(counts.n_u - counts.n_1u);
  InclusionRates rates;
  rates.rho0 = n_0u / ((1.0 - pi) * n);
  rates.rho1 = static_cast<double>(counts.n_1u + counts.n_p) / (2.0 * pi * n);
  return rates;
}

}  // namespace pocc

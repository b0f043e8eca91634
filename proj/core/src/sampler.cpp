#include "pocc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pocc/stats.hpp"

namespace pocc {

namespace {

constexpr double kDefaultProposalScale = 0.25;
constexpr double kTargetAcceptance = 0.3;
constexpr double kDefaultPriorVariance = 25.0;

}  // namespace

std::string to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::M0: return "m0";
    case ModelVariant::M1: return "m1";
    case ModelVariant::M2: return "m2";
  }
  throw std::invalid_argument("to_string: unknown model variant");
}

ModelVariant model_from_string(const std::string& name) {
  if (name == "m0" || name == "M0") return ModelVariant::M0;
  if (name == "m1" || name == "M1") return ModelVariant::M1;
  if (name == "m2" || name == "M2") return ModelVariant::M2;
  throw std::invalid_argument("unknown model '" + name + "' (expected m0, m1 or m2)");
}

void validate(const EstimatorSpec& spec) {
  if (spec.variant == ModelVariant::M1) {
    if (!spec.known_pi || !(*spec.known_pi > 0.0 && *spec.known_pi < 1.0))
      throw std::invalid_argument("EstimatorSpec: M1 requires known_pi in (0,1)");
  } else if (spec.known_pi) {
    throw std::invalid_argument("EstimatorSpec: known_pi is only meaningful for M1");
  }
}

void validate(const SamplerConfig& config) {
  if (config.burn_in < 0) throw std::invalid_argument("SamplerConfig: burn_in must be >= 0");
  if (config.keep < 1) throw std::invalid_argument("SamplerConfig: keep must be >= 1");
  if (config.thin < 1) throw std::invalid_argument("SamplerConfig: thin must be >= 1");
  for (double s : config.proposal_scale)
    if (!(s > 0.0)) throw std::invalid_argument("SamplerConfig: proposal scales must be positive");
  validate(config.model);
}

Sampler::Sampler(const CaseControlSample& sample, SamplerConfig config,
                 const std::vector<std::uint8_t>* observed_background_y)
    : sample_(sample), config_(std::move(config)) {
  pocc::validate(sample_);
  pocc::validate(config_);

  for (std::size_t i = 0; i < sample_.size(); ++i)
    if (!sample_.z[i]) background_rows_.push_back(i);
  n_u_ = static_cast<long>(background_rows_.size());
  n_p_ = static_cast<long>(sample_.size()) - n_u_;
  if (n_u_ == 0) throw std::invalid_argument("Sampler: background sample is empty");

  const std::size_t dim = sample_.design.cols();
  prior_ = config_.prior.mean.empty() ? PriorSpec::iid(dim, 0.0, kDefaultPriorVariance)
                                      : config_.prior;
  pocc::validate(prior_, dim);

  if (config_.model.variant == ModelVariant::M0) {
    if (observed_background_y == nullptr)
      throw std::invalid_argument("Sampler: M0 requires observed background labels");
    if (observed_background_y->size() != static_cast<std::size_t>(n_u_))
      throw std::invalid_argument("Sampler: observed labels do not match background size");
    observed_y_ = *observed_background_y;
  } else if (observed_background_y != nullptr) {
    throw std::invalid_argument("Sampler: observed labels are only accepted for M0");
  }
}

double Sampler::effective_presence_count(const ChainState& state) const {
  switch (config_.model.variant) {
    case ModelVariant::M1:
      return *config_.model.known_pi * static_cast<double>(n_u_);
    case ModelVariant::M0:
    case ModelVariant::M2:
      return static_cast<double>(state.n_1u);
  }
  throw std::logic_error("effective_presence_count: unknown variant");
}

double Sampler::log_likelihood_from_cache(const ChainState& state) const {
  if (config_.model.variant == ModelVariant::M0) {
    // Plain logistic regression on the observed background responses.
    double total = 0.0;
    for (std::size_t k = 0; k < background_rows_.size(); ++k) {
      const double t = state.linear_pred[background_rows_[k]];
      total += (observed_y_[k] ? t : 0.0) - log1pexp(t);
    }
    return total;
  }
  return observed_log_likelihood_from_predictors(state.linear_pred, sample_.z,
                                                 static_cast<double>(n_p_),
                                                 effective_presence_count(state));
}

double Sampler::log_posterior_for(const ChainState& state) const {
  ChainState scratch = state;
  scratch.linear_pred.resize(sample_.size());
  for (std::size_t i = 0; i < sample_.size(); ++i)
    scratch.linear_pred[i] = dot(sample_.design.row(i), std::span<const double>(state.beta));
  return log_likelihood_from_cache(scratch) + log_prior_density(state.beta, prior_);
}

ChainState Sampler::init_chain(Rng& rng) const {
  ChainState state;
  state.beta = prior_.mean;
  state.y_u.resize(static_cast<std::size_t>(n_u_));
  if (config_.model.variant == ModelVariant::M0) {
    state.y_u = observed_y_;
  } else {
    for (auto& yi : state.y_u) yi = rng.next_bernoulli(0.5) ? 1 : 0;
  }
  long total = 0;
  for (std::uint8_t yi : state.y_u) total += yi;
  state.n_1u = std::max<long>(1, total);

  state.linear_pred.resize(sample_.size());
  for (std::size_t i = 0; i < sample_.size(); ++i)
    state.linear_pred[i] = dot(sample_.design.row(i), std::span<const double>(state.beta));
  state.log_post = log_likelihood_from_cache(state) + log_prior_density(state.beta, prior_);
  return state;
}

StepResult Sampler::update_beta(ChainState& state, Rng& rng,
                                std::span<const double> scales) const {
  if (scales.size() != state.beta.size())
    throw std::invalid_argument("update_beta: scale vector length does not match beta");

  Beta proposal = state.beta;
  for (std::size_t j = 0; j < proposal.size(); ++j)
    proposal[j] += scales[j] * rng.next_normal();

  std::vector<double> proposal_pred(sample_.size());
  for (std::size_t i = 0; i < sample_.size(); ++i)
    proposal_pred[i] = dot(sample_.design.row(i), std::span<const double>(proposal));

  ChainState candidate;
  candidate.n_1u = state.n_1u;
  candidate.linear_pred = std::move(proposal_pred);
  const double log_post =
      log_likelihood_from_cache(candidate) + log_prior_density(proposal, prior_);

  StepResult result;
  result.alpha = std::isfinite(log_post)
                     ? std::min(1.0, std::exp(log_post - state.log_post))
                     : 0.0;
  const double u = rng.next_uniform();
  if (u < result.alpha) {
    state.beta = std::move(proposal);
    state.linear_pred = std::move(candidate.linear_pred);
    state.log_post = log_post;
    result.accepted = true;
  }
  return result;
}

void Sampler::augment(ChainState& state, Rng& rng) const {
  if (config_.model.variant == ModelVariant::M0) return;

  long total = 0;
  for (std::size_t k = 0; k < background_rows_.size(); ++k) {
    const double p = inverse_logit(state.linear_pred[background_rows_[k]]);
    const std::uint8_t yi = rng.next_bernoulli(p) ? 1 : 0;
    state.y_u[k] = yi;
    total += yi;
  }
  state.n_1u = std::max<long>(1, total);

  // The M2 offset tracks n_1u, so the cached posterior must be refreshed;
  // the M1 offset is pinned to the known prevalence and nothing changes.
  if (config_.model.variant == ModelVariant::M2) {
    state.log_post =
        log_likelihood_from_cache(state) + log_prior_density(state.beta, prior_);
  }
}

std::vector<double> Sampler::resolved_scales() const {
  const std::size_t dim = sample_.design.cols();
  if (config_.proposal_scale.empty())
    return std::vector<double>(dim, kDefaultProposalScale);
  if (config_.proposal_scale.size() == 1)
    return std::vector<double>(dim, config_.proposal_scale[0]);
  if (config_.proposal_scale.size() != dim)
    throw std::invalid_argument("SamplerConfig: proposal_scale length does not match design");
  return config_.proposal_scale;
}

ChainOutput Sampler::run() const {
  Rng rng(config_.seed);
  ChainState state = init_chain(rng);
  std::vector<double> scales = resolved_scales();
  const std::size_t dim = state.beta.size();

  // Robbins-Monro on a shared log-factor, plus per-coefficient shape taken
  // from the running posterior spread; both frozen when burn-in ends.
  double log_factor = 0.0;
  std::vector<double> base_scales = scales;
  std::vector<double> run_mean(dim, 0.0), run_m2(dim, 0.0);
  long adapt_count = 0;

  ChainOutput out;
  out.n_u = n_u_;
  out.beta_draws = Matrix(static_cast<std::size_t>(config_.keep), dim);
  out.n_1u_trace.reserve(static_cast<std::size_t>(config_.keep));

  const long total_iters = config_.burn_in + config_.keep * config_.thin;
  long recorded = 0;
  long accepted_post_burn = 0;

  for (long iter = 0; iter < total_iters; ++iter) {
    const StepResult step = update_beta(state, rng, scales);
    const bool in_burn = iter < config_.burn_in;

    if (in_burn && config_.adapt) {
      ++adapt_count;
      for (std::size_t j = 0; j < dim; ++j) {
        const double delta = state.beta[j] - run_mean[j];
        run_mean[j] += delta / static_cast<double>(adapt_count);
        run_m2[j] += delta * (state.beta[j] - run_mean[j]);
      }
      const double gamma = std::pow(static_cast<double>(adapt_count), -0.6);
      log_factor = std::clamp(log_factor + gamma * (step.alpha - kTargetAcceptance),
                              -20.0, 20.0);
      if (adapt_count >= 200) {
        for (std::size_t j = 0; j < dim; ++j) {
          const double sd =
              std::sqrt(run_m2[j] / static_cast<double>(adapt_count - 1));
          if (sd > 0.0) base_scales[j] = sd;
        }
      }
      for (std::size_t j = 0; j < dim; ++j)
        scales[j] = base_scales[j] * std::exp(log_factor);
    }

    augment(state, rng);

    if (!in_burn) {
      accepted_post_burn += step.accepted ? 1 : 0;
      if ((iter - config_.burn_in) % config_.thin == config_.thin - 1) {
        for (std::size_t j = 0; j < dim; ++j)
          out.beta_draws(static_cast<std::size_t>(recorded), j) = state.beta[j];
        out.n_1u_trace.push_back(state.n_1u);
        ++recorded;
      }
    }
  }

  out.acceptance_rate = static_cast<double>(accepted_post_burn) /
                        static_cast<double>(config_.keep * config_.thin);
  double trace_sum = 0.0;
  for (long v : out.n_1u_trace) trace_sum += static_cast<double>(v);
  out.pi_hat = trace_sum / static_cast<double>(out.n_1u_trace.size()) /
               static_cast<double>(n_u_);
  out.final_scales = scales;
  return out;
}

ChainOutput run_chain(const CaseControlSample& sample, const SamplerConfig& config,
                      const std::vector<std::uint8_t>* observed_background_y) {
  return Sampler(sample, config, observed_background_y).run();
}

PosteriorSummary summarize(const ChainOutput& output) {
  if (output.beta_draws.rows() == 0)
    throw std::invalid_argument("summarize: chain output holds no draws");
  const std::size_t keep = output.beta_draws.rows();
  const std::size_t dim = output.beta_draws.cols();

  PosteriorSummary s;
  s.kept = static_cast<long>(keep);
  s.pi_hat = output.pi_hat;
  s.acceptance_rate = output.acceptance_rate;
  for (std::size_t j = 0; j < dim; ++j) {
    std::vector<double> column(keep);
    for (std::size_t i = 0; i < keep; ++i) column[i] = output.beta_draws(i, j);
    const double m = mean(column);
    double ss = 0.0;
    for (double v : column) ss += (v - m) * (v - m);
    s.beta_mean.push_back(m);
    s.beta_sd.push_back(keep > 1 ? std::sqrt(ss / static_cast<double>(keep - 1)) : 0.0);
    s.beta_median.push_back(quantile(column, 0.5));
    s.beta_q1.push_back(quantile(column, 0.25));
    s.beta_q3.push_back(quantile(column, 0.75));
  }
  return s;
}

}  // namespace pocc

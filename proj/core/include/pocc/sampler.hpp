#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pocc/matrix.hpp"
#include "pocc/model.hpp"
#include "pocc/rng.hpp"

namespace pocc {

/// Estimation variants: M0 fits observed responses on the background sample,
/// M1 corrects with a known prevalence, M2 augments the latent background
/// labels and needs no prevalence input.
enum class ModelVariant { M0, M1, M2 };

std::string to_string(ModelVariant v);
ModelVariant model_from_string(const std::string& name);

struct EstimatorSpec {
  ModelVariant variant = ModelVariant::M2;
  std::optional<double> known_pi;  ///< required iff variant == M1

  static EstimatorSpec m0() { return {ModelVariant::M0, std::nullopt}; }
  static EstimatorSpec m1(double pi) { return {ModelVariant::M1, pi}; }
  static EstimatorSpec m2() { return {ModelVariant::M2, std::nullopt}; }
};

void validate(const EstimatorSpec& spec);

struct SamplerConfig {
  long burn_in = 10000;
  long keep = 5000;
  long thin = 1;                        ///< record every thin-th post-burn-in draw
  std::vector<double> proposal_scale;   ///< per coefficient; empty = default, one value = broadcast
  bool adapt = true;                    ///< scale adaptation during burn-in, frozen afterward
  std::uint64_t seed = 0;
  EstimatorSpec model{};
  PriorSpec prior{};                    ///< empty = N(0,25) on every coefficient
};

void validate(const SamplerConfig& config);

struct ChainState {
  Beta beta;
  std::vector<std::uint8_t> y_u;    ///< background labels (augmented; observed for M0)
  long n_1u = 1;                    ///< max(1, sum(y_u))
  double log_post = 0.0;            ///< cached log-posterior under the active model
  std::vector<double> linear_pred;  ///< cached x_i . beta for every sample row
};

struct ChainOutput {
  Matrix beta_draws;                ///< keep rows, one per recorded draw
  std::vector<long> n_1u_trace;     ///< background presence count per recorded draw
  double acceptance_rate = 0.0;     ///< over post-burn-in proposals
  double pi_hat = 0.0;              ///< mean(n_1u_trace)/n_u
  long n_u = 0;
  std::vector<double> final_scales; ///< proposal scales after adaptation froze
};

struct PosteriorSummary {
  std::vector<double> beta_mean;
  std::vector<double> beta_sd;
  std::vector<double> beta_median;
  std::vector<double> beta_q1;
  std::vector<double> beta_q3;
  double pi_hat = 0.0;
  double acceptance_rate = 0.0;
  long kept = 0;
};

struct StepResult {
  bool accepted = false;
  double alpha = 0.0;  ///< acceptance probability of the proposal
};

/// Metropolis-within-Gibbs sampler over (beta, y_u). One instance is bound
/// to one sample and one configuration; run() and the step methods are const
/// and safe to call from concurrent chains, each with its own Rng and state.
class Sampler {
 public:
  /// `observed_background_y`: true labels for the background rows in sample
  /// order, required for M0 and rejected otherwise.
  Sampler(const CaseControlSample& sample, SamplerConfig config,
          const std::vector<std::uint8_t>* observed_background_y = nullptr);

  /// Step 0: beta at the prior mean, background labels fair-coin initialized
  /// (observed for M0), caches filled.
  ChainState init_chain(Rng& rng) const;

  /// Step 3: joint Gaussian random-walk proposal on beta, accepted with
  /// probability min(1, exp(delta log-posterior)).
  StepResult update_beta(ChainState& state, Rng& rng, std::span<const double> scales) const;

  /// Step 4: redraw every background label from its conditional
  /// Bernoulli(inverse_logit(x_i . beta)); refreshes n_1u and, when the
  /// offset depends on it, the cached log-posterior. No-op for M0.
  void augment(ChainState& state, Rng& rng) const;

  /// Full protocol: burn-in with optional adaptation, then keep*thin
  /// iterations recording every thin-th draw.
  ChainOutput run() const;

  /// Fresh log-posterior of a state under the active model (cache ignored).
  double log_posterior_for(const ChainState& state) const;

  /// Effective presence count feeding the offset for this state.
  double effective_presence_count(const ChainState& state) const;

  const SamplerConfig& config() const { return config_; }
  const PriorSpec& prior() const { return prior_; }
  long background_size() const { return static_cast<long>(background_rows_.size()); }

 private:
  double log_likelihood_from_cache(const ChainState& state) const;
  std::vector<double> resolved_scales() const;

  const CaseControlSample& sample_;
  SamplerConfig config_;
  PriorSpec prior_;
  std::vector<std::size_t> background_rows_;
  std::vector<std::uint8_t> observed_y_;  // M0 only, aligned with background_rows_
  long n_p_ = 0;
  long n_u_ = 0;
};

/// Convenience wrapper: construct, run, return the chain output.
ChainOutput run_chain(const CaseControlSample& sample, const SamplerConfig& config,
                      const std::vector<std::uint8_t>* observed_background_y = nullptr);

PosteriorSummary summarize(const ChainOutput& output);

}  // namespace pocc

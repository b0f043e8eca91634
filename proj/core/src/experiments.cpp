#include "pocc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "pocc/stats.hpp"

namespace pocc {

namespace {

constexpr long kAllowedSizes[] = {50, 100, 200, 500, 1000, 1500, 2000, 3000};

constexpr std::uint64_t kTagPopulation = 0xA1;
constexpr std::uint64_t kTagEval = 0xA2;
constexpr std::uint64_t kTagSample = 0xA3;
constexpr std::uint64_t kTagChain = 0xA4;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t scenario_tag(Scenario s) { return static_cast<std::uint64_t>(s); }
std::uint64_t model_tag(ModelVariant m) { return static_cast<std::uint64_t>(m); }

}  // namespace

std::span<const long> allowed_grid_sizes() { return kAllowedSizes; }

void validate(const ExperimentGrid& grid) {
  if (grid.scenarios.empty()) throw std::invalid_argument("ExperimentGrid: no scenarios");
  if (grid.sizes.empty()) throw std::invalid_argument("ExperimentGrid: no sample sizes");
  if (grid.models.empty()) throw std::invalid_argument("ExperimentGrid: no models");
  if (grid.replicates < 1) throw std::invalid_argument("ExperimentGrid: replicates must be >= 1");
  if (grid.population_size <= 0)
    throw std::invalid_argument("ExperimentGrid: population_size must be positive");
  if (grid.eval_size <= 0 || grid.eval_size > grid.population_size)
    throw std::invalid_argument("ExperimentGrid: eval_size must lie in [1, population_size]");
  for (long n : grid.sizes) {
    if (std::find(std::begin(kAllowedSizes), std::end(kAllowedSizes), n) ==
        std::end(kAllowedSizes))
      throw std::invalid_argument("ExperimentGrid: sample size " + std::to_string(n) +
                                  " is not in the study set {50,100,200,500,1000,1500,2000,3000}");
  }
  auto has_dup = [](const auto& v) {
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
  };
  if (has_dup(grid.sizes)) throw std::invalid_argument("ExperimentGrid: duplicate sample size");
  std::vector<int> sc, mo;
  for (auto s : grid.scenarios) sc.push_back(static_cast<int>(s));
  for (auto m : grid.models) mo.push_back(static_cast<int>(m));
  if (has_dup(sc)) throw std::invalid_argument("ExperimentGrid: duplicate scenario");
  if (has_dup(mo)) throw std::invalid_argument("ExperimentGrid: duplicate model");
}

std::uint64_t population_seed(std::uint64_t master_seed, Scenario scenario) {
  return derive_seed(master_seed, {kTagPopulation, scenario_tag(scenario)});
}

std::uint64_t eval_seed(std::uint64_t master_seed, Scenario scenario) {
  return derive_seed(master_seed, {kTagEval, scenario_tag(scenario)});
}

std::uint64_t replicate_seed(std::uint64_t master_seed, Scenario scenario, long n,
                             long replicate) {
  return derive_seed(master_seed, {kTagSample, scenario_tag(scenario),
                                   static_cast<std::uint64_t>(n),
                                   static_cast<std::uint64_t>(replicate)});
}

Correlations compute_correlations(std::span<const double> b0, std::span<const double> b1,
                                  std::span<const double> pi) {
  if (b0.size() < 3 || b0.size() != b1.size() || b0.size() != pi.size())
    throw std::invalid_argument("compute_correlations: need >= 3 aligned estimates");
  return Correlations{pearson(b0, b1), pearson(b0, pi), pearson(b1, pi)};
}

SensSpec compute_sens_spec(std::span<const double> beta_hat, const EvalSet& eval) {
  if (beta_hat.size() < 2)
    throw std::invalid_argument("compute_sens_spec: beta must hold intercept and slope");
  if (eval.x1.size() != eval.y.size() || eval.x1.empty())
    throw std::invalid_argument("compute_sens_spec: malformed eval set");

  long tp = 0, fn = 0, tn = 0, fp = 0;
  for (std::size_t i = 0; i < eval.x1.size(); ++i) {
    // inverse_logit(t) >= 1/2 exactly when t >= 0.
    const bool predicted = beta_hat[0] + beta_hat[1] * eval.x1[i] >= 0.0;
    if (eval.y[i]) {
      predicted ? ++tp : ++fn;
    } else {
      predicted ? ++fp : ++tn;
    }
  }
  SensSpec out;
  out.sensitivity = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : kNaN;
  out.specificity = (tn + fp) > 0 ? static_cast<double>(tn) / static_cast<double>(tn + fp) : kNaN;
  return out;
}

namespace {

struct ScenarioContext {
  Scenario scenario{};
  Population population;
  EvalSet eval;
  ScenarioTruth truth;
};

ReplicateResult fit_one(const ScenarioContext& ctx, const DrawnSample& drawn, long n,
                        ModelVariant model, long replicate, const ExperimentGrid& grid,
                        const SamplerConfig& base_config) {
  ReplicateResult res;
  res.scenario = ctx.scenario;
  res.n = n;
  res.model = model;
  res.replicate = replicate;

  SamplerConfig config = base_config;
  config.model = model == ModelVariant::M1 ? EstimatorSpec::m1(ctx.population.pi_true())
                                           : EstimatorSpec{model, std::nullopt};
  config.seed = derive_seed(grid.master_seed,
                            {kTagChain, scenario_tag(ctx.scenario),
                             static_cast<std::uint64_t>(n),
                             static_cast<std::uint64_t>(replicate), model_tag(model)});

  std::vector<std::uint8_t> background_truth;
  const std::vector<std::uint8_t>* truth_ptr = nullptr;
  if (model == ModelVariant::M0) {
    for (std::size_t i = 0; i < drawn.sample.size(); ++i)
      if (!drawn.sample.z[i]) background_truth.push_back(drawn.truth.y[i]);
    truth_ptr = &background_truth;
  }

  const ChainOutput output = run_chain(drawn.sample, config, truth_ptr);
  const PosteriorSummary summary = summarize(output);
  res.beta_hat = summary.beta_mean;
  res.pi_hat = summary.pi_hat;
  res.accept_rate = summary.acceptance_rate;
  const SensSpec pred = compute_sens_spec(res.beta_hat, ctx.eval);
  res.sens = pred.sensitivity;
  res.spec = pred.specificity;
  return res;
}

}  // namespace

GridRun run_grid(const ExperimentGrid& grid, const SamplerConfig& base_config, int jobs,
                 const std::function<void(std::size_t, std::size_t)>& progress) {
  validate(grid);
  validate(base_config);

  GridRun run;
  std::vector<ScenarioContext> contexts;
  contexts.reserve(grid.scenarios.size());
  for (Scenario s : grid.scenarios) {
    ScenarioContext ctx;
    ctx.scenario = s;
    ScenarioSpec spec = ScenarioSpec::preset(s, 0, grid.population_size);
    if (grid.beta_override) spec.beta_true = *grid.beta_override;
    spec.seed = population_seed(grid.master_seed, s);
    ctx.population = generate_population(spec);
    ctx.eval = draw_eval_set(ctx.population, grid.eval_size, eval_seed(grid.master_seed, s));
    ctx.truth = ScenarioTruth{spec.beta_true, ctx.population.pi_true()};
    run.truth.emplace_back(s, ctx.truth);
    contexts.push_back(std::move(ctx));
  }

  struct Task {
    std::size_t context_index;
    long n;
    long replicate;
  };
  std::vector<Task> tasks;
  for (std::size_t ci = 0; ci < contexts.size(); ++ci)
    for (long n : grid.sizes)
      for (long rep = 0; rep < grid.replicates; ++rep)
        tasks.push_back(Task{ci, n, rep});

  const std::size_t models = grid.models.size();
  run.results.assign(tasks.size() * models, ReplicateResult{});

  const std::size_t worker_count = [&] {
    std::size_t w = jobs > 0 ? static_cast<std::size_t>(jobs)
                             : std::max(1u, std::thread::hardware_concurrency());
    return std::min(w, std::max<std::size_t>(1, tasks.size()));
  }();

  std::atomic<std::size_t> next_task{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t ti = next_task.fetch_add(1);
      if (ti >= tasks.size()) return;
      const Task& task = tasks[ti];
      const ScenarioContext& ctx = contexts[task.context_index];

      std::optional<DrawnSample> drawn;
      std::string draw_error;
      try {
        drawn = sample_design(ctx.population, task.n,
                              replicate_seed(grid.master_seed, ctx.scenario, task.n,
                                             task.replicate));
      } catch (const std::exception& e) {
        draw_error = e.what();
      }

      for (std::size_t mi = 0; mi < models; ++mi) {
        ReplicateResult& slot = run.results[ti * models + mi];
        if (!drawn) {
          slot.scenario = ctx.scenario;
          slot.n = task.n;
          slot.model = grid.models[mi];
          slot.replicate = task.replicate;
          slot.failed = true;
          slot.error = draw_error;
          continue;
        }
        try {
          slot = fit_one(ctx, *drawn, task.n, grid.models[mi], task.replicate, grid,
                         base_config);
        } catch (const std::exception& e) {
          slot.scenario = ctx.scenario;
          slot.n = task.n;
          slot.model = grid.models[mi];
          slot.replicate = task.replicate;
          slot.failed = true;
          slot.error = e.what();
        }
      }

      const std::size_t completed = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(completed, tasks.size());
      }
    }
  };

  if (worker_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (std::size_t w = 0; w < worker_count; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return run;
}

namespace {

double nan_excluding_mean(std::span<const double> values, long& excluded) {
  double sum = 0.0;
  long count = 0;
  excluded = 0;
  for (double v : values) {
    if (std::isnan(v)) {
      ++excluded;
    } else {
      sum += v;
      ++count;
    }
  }
  return count > 0 ? sum / static_cast<double>(count) : kNaN;
}

}  // namespace

GridSummary summarize_grid(const GridRun& run) {
  GridSummary summary;
  summary.truth = run.truth;

  // Collect the cell keys in first-appearance order; the results vector is
  // already laid out deterministically by run_grid.
  struct Key {
    Scenario scenario;
    long n;
    ModelVariant model;
    bool operator==(const Key&) const = default;
  };
  std::vector<Key> keys;
  for (const auto& r : run.results) {
    const Key k{r.scenario, r.n, r.model};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }

  auto truth_for = [&](Scenario s) -> const ScenarioTruth& {
    for (const auto& [sc, t] : run.truth)
      if (sc == s) return t;
    throw std::logic_error("summarize_grid: missing scenario truth");
  };

  for (const Key& key : keys) {
    CellStats cell;
    cell.scenario = key.scenario;
    cell.n = key.n;
    cell.model = key.model;

    std::vector<double> b0, b1, pi, sens, spec, accept;
    for (const auto& r : run.results) {
      if (r.scenario != key.scenario || r.n != key.n || r.model != key.model) continue;
      if (r.failed) {
        ++cell.n_failed;
        continue;
      }
      b0.push_back(r.beta_hat.at(0));
      b1.push_back(r.beta_hat.at(1));
      pi.push_back(r.pi_hat);
      sens.push_back(r.sens);
      spec.push_back(r.spec);
      accept.push_back(r.accept_rate);
    }
    cell.n_ok = static_cast<long>(b0.size());
    if (cell.n_ok > 0) {
      const ScenarioTruth& truth = truth_for(key.scenario);
      cell.b0_median = quantile(b0, 0.5);
      cell.b0_q1 = quantile(b0, 0.25);
      cell.b0_q3 = quantile(b0, 0.75);
      cell.b1_median = quantile(b1, 0.5);
      cell.b1_q1 = quantile(b1, 0.25);
      cell.b1_q3 = quantile(b1, 0.75);
      cell.pi_median = quantile(pi, 0.5);
      cell.pi_q1 = quantile(pi, 0.25);
      cell.pi_q3 = quantile(pi, 0.75);
      cell.rmse_b0 = root_mean_squared_error(b0, truth.beta_true[0]);
      cell.rmse_b1 = root_mean_squared_error(b1, truth.beta_true[1]);
      cell.rmse_pi = root_mean_squared_error(pi, truth.pi_true);
      if (cell.n_ok >= 3) {
        const Correlations c = compute_correlations(b0, b1, pi);
        cell.corr_b0_b1 = c.b0_b1;
        cell.corr_b0_pi = c.b0_pi;
        cell.corr_b1_pi = c.b1_pi;
      } else {
        cell.corr_b0_b1 = cell.corr_b0_pi = cell.corr_b1_pi = kNaN;
      }
      cell.mean_sens = nan_excluding_mean(sens, cell.excluded_sens);
      cell.mean_spec = nan_excluding_mean(spec, cell.excluded_spec);
      cell.mean_accept = mean(accept);
    } else {
      cell.b0_median = cell.b0_q1 = cell.b0_q3 = kNaN;
      cell.b1_median = cell.b1_q1 = cell.b1_q3 = kNaN;
      cell.pi_median = cell.pi_q1 = cell.pi_q3 = kNaN;
      cell.rmse_b0 = cell.rmse_b1 = cell.rmse_pi = kNaN;
      cell.corr_b0_b1 = cell.corr_b0_pi = cell.corr_b1_pi = kNaN;
      cell.mean_sens = cell.mean_spec = kNaN;
      cell.mean_accept = kNaN;
    }
    summary.cells.push_back(cell);
  }

  // Relative predictive performance, M2 over the M1 benchmark.
  auto find_cell = [&](Scenario s, long n, ModelVariant m) -> const CellStats* {
    for (const auto& c : summary.cells)
      if (c.scenario == s && c.n == n && c.model == m) return &c;
    return nullptr;
  };
  std::vector<std::pair<Scenario, long>> slices;
  for (const auto& c : summary.cells) {
    const std::pair<Scenario, long> slice{c.scenario, c.n};
    if (std::find(slices.begin(), slices.end(), slice) == slices.end())
      slices.push_back(slice);
  }
  for (const auto& [s, n] : slices) {
    const CellStats* m1 = find_cell(s, n, ModelVariant::M1);
    const CellStats* m2 = find_cell(s, n, ModelVariant::M2);
    if (m1 == nullptr || m2 == nullptr) continue;
    RelativePrediction rel;
    rel.scenario = s;
    rel.n = n;
    rel.sensitivity = (m1->mean_sens > 0.0) ? m2->mean_sens / m1->mean_sens : kNaN;
    rel.specificity = (m1->mean_spec > 0.0) ? m2->mean_spec / m1->mean_spec : kNaN;
    summary.relative.push_back(rel);
  }
  return summary;
}

namespace {

bool same_number(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

}  // namespace

bool exactly_equal(const GridSummary& a, const GridSummary& b) {
  if (a.truth.size() != b.truth.size() || a.cells.size() != b.cells.size() ||
      a.relative.size() != b.relative.size())
    return false;
  for (std::size_t i = 0; i < a.truth.size(); ++i) {
    if (a.truth[i].first != b.truth[i].first) return false;
    if (a.truth[i].second.beta_true != b.truth[i].second.beta_true) return false;
    if (!same_number(a.truth[i].second.pi_true, b.truth[i].second.pi_true)) return false;
  }
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const CellStats& x = a.cells[i];
    const CellStats& y = b.cells[i];
    if (x.scenario != y.scenario || x.n != y.n || x.model != y.model) return false;
    if (x.n_ok != y.n_ok || x.n_failed != y.n_failed) return false;
    if (x.excluded_sens != y.excluded_sens || x.excluded_spec != y.excluded_spec)
      return false;
    const double xs[] = {x.b0_median, x.b0_q1, x.b0_q3, x.b1_median, x.b1_q1, x.b1_q3,
                         x.pi_median, x.pi_q1, x.pi_q3, x.rmse_b0, x.rmse_b1, x.rmse_pi,
                         x.corr_b0_b1, x.corr_b0_pi, x.corr_b1_pi, x.mean_sens,
                         x.mean_spec, x.mean_accept};
    const double ys[] = {y.b0_median, y.b0_q1, y.b0_q3, y.b1_median, y.b1_q1, y.b1_q3,
                         y.pi_median, y.pi_q1, y.pi_q3, y.rmse_b0, y.rmse_b1, y.rmse_pi,
                         y.corr_b0_b1, y.corr_b0_pi, y.corr_b1_pi, y.mean_sens,
                         y.mean_spec, y.mean_accept};
    for (std::size_t k = 0; k < std::size(xs); ++k)
      if (!same_number(xs[k], ys[k])) return false;
  }
  for (std::size_t i = 0; i < a.relative.size(); ++i) {
    if (a.relative[i].scenario != b.relative[i].scenario) return false;
    if (a.relative[i].n != b.relative[i].n) return false;
    if (!same_number(a.relative[i].sensitivity, b.relative[i].sensitivity)) return false;
    if (!same_number(a.relative[i].specificity, b.relative[i].specificity)) return false;
  }
  return true;
}

}  // namespace pocc


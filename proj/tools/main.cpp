// pocc: presence-only case-control logistic regression.
//
// Subcommands:
//   generate   synthetic population + case-control sample files
//   fit        MCMC fit of one sample (models m0/m1/m2)
//   simulate   replication grid -> result archive
//   report     render tables and plot series from an archive

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pocc/experiments.hpp"
#include "pocc/io.hpp"
#include "pocc/version.hpp"

namespace fs = std::filesystem;
using namespace pocc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitPartial = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path default_out_dir() {
  if (const char* env = std::getenv("POCC_OUT_DIR"); env != nullptr && *env != '\0')
    return fs::path(env);
  return fs::path(".");
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct GenerateOptions {
  std::string scenario;
  long n = 0;
  std::uint64_t seed = 0;
  long population_size = 10000;
  std::optional<double> beta0, beta1, beta2;
  std::string out;
};

struct FitOptions {
  std::string sample_path;
  std::string model;
  std::optional<double> pi;
  std::string truth_path;
  long burn_in = 10000;
  long keep = 5000;
  long thin = 1;
  std::uint64_t seed = 0;
  std::vector<double> scale;
  bool no_adapt = false;
  std::string out;
  std::string draws_path;
  std::string format = "json";
};

struct SimulateOptions {
  std::vector<std::string> scenarios;
  std::vector<long> sizes;
  long replicates = 1;
  std::vector<std::string> models;
  long burn_in = 10000;
  long keep = 5000;
  long thin = 1;
  std::uint64_t seed = 0;
  std::vector<double> scale;
  bool no_adapt = false;
  long population_size = 10000;
  long eval_size = 2000;
  std::optional<double> beta0, beta1, beta2;
  int jobs = 0;
  std::string out;
  std::string manifest_path;
};

struct ReportOptions {
  std::string archive;
  std::string out;
};

std::optional<std::array<double, 3>> beta_override_from(const std::optional<double>& b0,
                                                        const std::optional<double>& b1,
                                                        const std::optional<double>& b2,
                                                        Scenario scenario) {
  if (!b0 && !b1 && !b2) return std::nullopt;
  std::array<double, 3> beta = scenario_beta(scenario);
  if (b0) beta[0] = *b0;
  if (b1) beta[1] = *b1;
  if (b2) beta[2] = *b2;
  return beta;
}

int run_generate(const GenerateOptions& opt) {
  const Scenario scenario = scenario_from_string(opt.scenario);
  ScenarioSpec spec = ScenarioSpec::preset(scenario, 0, opt.population_size);
  if (auto beta = beta_override_from(opt.beta0, opt.beta1, opt.beta2, scenario))
    spec.beta_true = *beta;
  spec.seed = population_seed(opt.seed, scenario);

  const Population population = generate_population(spec);
  const DrawnSample drawn =
      sample_design(population, opt.n, replicate_seed(opt.seed, scenario, opt.n, 0));

  const fs::path dir = opt.out.empty() ? default_out_dir() : fs::path(opt.out);
  fs::create_directories(dir);
  io::write_population_csv(dir / "population.csv", population);
  io::write_sample_csv(dir / "sample.csv", drawn.sample);
  io::write_truth_csv(dir / "sample_truth.csv", drawn.sample, drawn.truth);

  std::cout << "wrote " << (dir / "population.csv").string() << " (" << population.size()
            << " units, prevalence " << io::format_double(population.pi_true()) << ")\n"
            << "wrote " << (dir / "sample.csv").string() << " (n_p="
            << drawn.sample.presence_count() << ", n_u=" << drawn.sample.background_count()
            << ")\n"
            << "wrote " << (dir / "sample_truth.csv").string() << "\n";
  return kExitOk;
}

int run_fit(const FitOptions& opt) {
  const ModelVariant model = model_from_string(opt.model);
  if (model == ModelVariant::M1 && !opt.pi)
    throw UsageError("model m1 requires --pi <prevalence>");
  if (model != ModelVariant::M1 && opt.pi)
    throw UsageError("--pi is only meaningful for model m1");
  if (model == ModelVariant::M0 && opt.truth_path.empty())
    throw UsageError("model m0 requires --truth <file>");
  if (model != ModelVariant::M0 && !opt.truth_path.empty())
    throw UsageError("--truth is only read for model m0");
  if (opt.format != "json" && opt.format != "csv")
    throw UsageError("--format must be json or csv");

  const CaseControlSample sample = io::read_sample_csv(opt.sample_path);

  SamplerConfig config;
  config.burn_in = opt.burn_in;
  config.keep = opt.keep;
  config.thin = opt.thin;
  config.seed = opt.seed;
  config.adapt = !opt.no_adapt;
  config.proposal_scale = opt.scale;
  config.model = model == ModelVariant::M1 ? EstimatorSpec::m1(*opt.pi)
                                           : EstimatorSpec{model, std::nullopt};

  std::vector<std::uint8_t> background_truth;
  const std::vector<std::uint8_t>* truth_ptr = nullptr;
  if (model == ModelVariant::M0) {
    const SampleTruth truth = io::read_truth_csv(opt.truth_path, sample);
    for (std::size_t i = 0; i < sample.size(); ++i)
      if (!sample.z[i]) background_truth.push_back(truth.y[i]);
    truth_ptr = &background_truth;
  }

  const ChainOutput output = run_chain(sample, config, truth_ptr);

  io::FitRecord record;
  record.model = to_string(model);
  record.known_pi = opt.pi;
  record.burn_in = config.burn_in;
  record.keep = config.keep;
  record.thin = config.thin;
  record.adapt = config.adapt;
  record.seed = config.seed;
  record.n_p = sample.presence_count();
  record.n_u = sample.background_count();
  record.summary = summarize(output);

  fs::path out_path;
  if (!opt.out.empty()) {
    out_path = opt.out;
  } else {
    out_path = default_out_dir() / (opt.format == "json" ? "fit_summary.json" : "fit_summary.csv");
  }
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  if (opt.format == "json") {
    io::write_fit_json(out_path, record);
  } else {
    io::write_fit_csv(out_path, record);
  }
  if (!opt.draws_path.empty()) io::write_draws_csv(opt.draws_path, output);

  std::cout << "model " << record.model << ": pi_hat="
            << io::format_double(record.summary.pi_hat) << ", acceptance="
            << io::format_double(record.summary.acceptance_rate) << "\n";
  for (std::size_t j = 0; j < record.summary.beta_mean.size(); ++j)
    std::cout << "  beta" << j << " mean=" << io::format_double(record.summary.beta_mean[j])
              << " sd=" << io::format_double(record.summary.beta_sd[j]) << "\n";
  std::cout << "wrote " << out_path.string() << "\n";
  return kExitOk;
}

int run_simulate(const SimulateOptions& opt) {
  io::ArchiveConfig config;
  if (!opt.manifest_path.empty()) {
    config = io::read_manifest(opt.manifest_path).config;
  } else {
    if (opt.scenarios.empty()) throw UsageError("simulate requires at least one --scenario");
    if (opt.sizes.empty()) throw UsageError("simulate requires at least one --n");
    if (opt.models.empty()) throw UsageError("simulate requires at least one --model");
    for (const auto& s : opt.scenarios)
      config.grid.scenarios.push_back(scenario_from_string(s));
    for (const auto& m : opt.models) config.grid.models.push_back(model_from_string(m));
    config.grid.sizes = opt.sizes;
    config.grid.replicates = opt.replicates;
    config.grid.master_seed = opt.seed;
    config.grid.population_size = opt.population_size;
    config.grid.eval_size = opt.eval_size;
    if (!config.grid.scenarios.empty()) {
      config.grid.beta_override = beta_override_from(opt.beta0, opt.beta1, opt.beta2,
                                                     config.grid.scenarios.front());
    }
    config.burn_in = opt.burn_in;
    config.keep = opt.keep;
    config.thin = opt.thin;
    config.adapt = !opt.no_adapt;
    config.proposal_scale = opt.scale;
  }

  const SamplerConfig sampler = io::sampler_config_from(config);
  validate(config.grid);
  validate(sampler);

  const std::size_t total_tasks =
      config.grid.scenarios.size() * config.grid.sizes.size() *
      static_cast<std::size_t>(config.grid.replicates);
  const std::size_t report_every = std::max<std::size_t>(1, total_tasks / 20);
  auto progress = [&](std::size_t done, std::size_t total) {
    if (done % report_every == 0 || done == total)
      std::cerr << "progress: " << done << "/" << total << " replicates\r" << std::flush;
  };

  const GridRun run = run_grid(config.grid, sampler, opt.jobs, progress);
  std::cerr << "\n";
  const GridSummary summary = summarize_grid(run);

  io::Manifest manifest;
  manifest.version = kVersion;
  manifest.created_utc = utc_timestamp();
  manifest.config = config;
  for (const auto& r : run.results) {
    if (r.failed) {
      manifest.failed_cells.push_back("scenario=" + to_string(r.scenario) +
                                      " n=" + std::to_string(r.n) + " replicate=" +
                                      std::to_string(r.replicate) + " model=" +
                                      to_string(r.model) + ": " + r.error);
    }
  }

  const fs::path dir = opt.out.empty() ? default_out_dir() : fs::path(opt.out);
  io::write_archive(dir, manifest, run, summary);

  std::cout << io::render_summary_tables(summary);
  std::cout << "archive written to " << dir.string() << "\n";
  if (!manifest.failed_cells.empty()) {
    std::cerr << manifest.failed_cells.size()
              << " replicate fits failed; see manifest.json\n";
    return kExitPartial;
  }
  return kExitOk;
}

int run_report(const ReportOptions& opt) {
  const fs::path dir(opt.archive);
  const io::Manifest manifest = io::read_manifest(dir / "manifest.json");
  const auto results = io::read_replicates_csv(dir / "replicates.csv");
  const GridSummary stored = io::read_summary_json(dir / "summary.json");

  // Re-derive the summary from the replicate table; any mismatch with the
  // stored document means the archive is inconsistent.
  GridRun run;
  run.results = results;
  run.truth = stored.truth;
  const GridSummary recomputed = summarize_grid(run);
  if (!exactly_equal(recomputed, stored))
    throw io::ParseError("archive summary.json does not match its replicate table");

  std::cout << "archive: " << dir.string() << " (version " << manifest.version
            << ", created " << manifest.created_utc << ", master seed "
            << manifest.config.grid.master_seed << ")\n";
  if (!manifest.failed_cells.empty())
    std::cout << "warning: " << manifest.failed_cells.size() << " failed replicate fits\n";
  std::cout << "\n" << io::render_summary_tables(stored);

  if (!stored.relative.empty()) {
    std::cout << "Relative predictive performance (m2 / m1)\n";
    for (const auto& r : stored.relative) {
      std::cout << "  scenario (" << to_string(r.scenario) << "), n=" << r.n
                << ": sensitivity " << io::format_double(r.sensitivity) << ", specificity "
                << io::format_double(r.specificity) << "\n";
    }
    std::cout << "\n";
  }
  for (const auto& note : io::rmse_monotonicity_notes(stored))
    std::cout << "note: " << note << "\n";

  if (!opt.out.empty()) {
    const fs::path out_dir(opt.out);
    fs::create_directories(out_dir);
    std::ofstream report_file(out_dir / "report.txt", std::ios::binary);
    report_file << io::render_summary_tables(stored);
    for (const auto& f : {"rmse_vs_n.csv", "relative_pred_vs_n.csv", "scatter_beta0_pi.csv"}) {
      const fs::path src = dir / "plots" / f;
      if (fs::exists(src)) fs::copy_file(src, out_dir / f, fs::copy_options::overwrite_existing);
    }
    std::cout << "report written to " << out_dir.string() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian logistic regression for presence-only data under a modified "
               "case-control design (MCMC with data augmentation)"};
  app.set_version_flag("--version", std::string("pocc ") + kVersion);
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic population and sample");
  generate->add_option("--scenario", gen.scenario, "Scenario: i, ii or iii")->required();
  generate->add_option("--n", gen.n, "Total sample size (multiple of 5; n_p:n_u = 1:4)")
      ->required();
  generate->add_option("--seed", gen.seed, "Master seed");
  generate->add_option("--population-size", gen.population_size, "Population size N");
  generate->add_option("--beta0", gen.beta0, "Override the true intercept");
  generate->add_option("--beta1", gen.beta1, "Override the true x1 slope");
  generate->add_option("--beta2", gen.beta2, "Override the true x2 slope");
  generate->add_option("--out", gen.out, "Output directory (default $POCC_OUT_DIR or .)");

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one sample file by MCMC");
  fit_cmd->add_option("sample", fit.sample_path, "Sample CSV path")->required();
  fit_cmd->add_option("--model", fit.model, "Model: m0, m1 or m2")->required();
  fit_cmd->add_option("--pi", fit.pi, "Known population prevalence (m1 only)");
  fit_cmd->add_option("--truth", fit.truth_path, "Truth CSV with observed labels (m0 only)");
  fit_cmd->add_option("--burn-in", fit.burn_in, "Burn-in iterations");
  fit_cmd->add_option("--keep", fit.keep, "Recorded draws after burn-in");
  fit_cmd->add_option("--thin", fit.thin, "Record every thin-th draw");
  fit_cmd->add_option("--seed", fit.seed, "Chain seed");
  fit_cmd->add_option("--scale", fit.scale, "Proposal scale(s), one value or one per coefficient");
  fit_cmd->add_flag("--no-adapt", fit.no_adapt, "Disable burn-in scale adaptation");
  fit_cmd->add_option("--out", fit.out, "Summary output path");
  fit_cmd->add_option("--draws", fit.draws_path, "Optional full draw dump (CSV)");
  fit_cmd->add_option("--format", fit.format, "Summary format: json or csv");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run a replication grid into an archive");
  simulate->add_option("--scenario", sim.scenarios, "Scenario(s): i, ii, iii")
      ->delimiter(',');
  simulate->add_option("--n", sim.sizes, "Sample size(s) from the study set")->delimiter(',');
  simulate->add_option("--replicates", sim.replicates, "Replicates per cell");
  simulate->add_option("--model", sim.models, "Model(s): m0, m1, m2")->delimiter(',');
  simulate->add_option("--burn-in", sim.burn_in, "Burn-in iterations");
  simulate->add_option("--keep", sim.keep, "Recorded draws after burn-in");
  simulate->add_option("--thin", sim.thin, "Record every thin-th draw");
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_option("--scale", sim.scale, "Proposal scale(s)");
  simulate->add_flag("--no-adapt", sim.no_adapt, "Disable burn-in scale adaptation");
  simulate->add_option("--population-size", sim.population_size, "Population size N");
  simulate->add_option("--eval-size", sim.eval_size, "Held-out evaluation set size");
  simulate->add_option("--beta0", sim.beta0, "Override the true intercept (all scenarios)");
  simulate->add_option("--beta1", sim.beta1, "Override the true x1 slope");
  simulate->add_option("--beta2", sim.beta2, "Override the true x2 slope");
  simulate->add_option("--jobs", sim.jobs, "Worker threads (0 = hardware)");
  simulate->add_option("--out", sim.out, "Archive directory (default $POCC_OUT_DIR or .)");
  simulate->add_option("--manifest", sim.manifest_path,
                       "Re-run the configuration echoed in an existing manifest.json")
      ->excludes("--scenario")->excludes("--n")->excludes("--replicates")
      ->excludes("--model")->excludes("--seed");

  ReportOptions rep;
  auto* report = app.add_subcommand("report", "Render tables and plot data from an archive");
  report->add_option("archive", rep.archive, "Archive directory")->required();
  report->add_option("--out", rep.out, "Directory for report.txt and plot series");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (generate->parsed()) return run_generate(gen);
    if (fit_cmd->parsed()) return run_fit(fit);
    if (simulate->parsed()) return run_simulate(sim);
    if (report->parsed()) return run_report(rep);
    std::cerr << "no subcommand given\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pocc/datagen.hpp"
#include "pocc/experiments.hpp"
#include "pocc/sampler.hpp"

namespace pocc::io {

// Every file carries a schema identifier: the first line "# schema=<id>" for
// CSV, a top-level "schema" field for JSON. Readers reject anything else.
inline constexpr const char* kPopulationSchema = "pocc.population/1";
inline constexpr const char* kSampleSchema = "pocc.sample/1";
inline constexpr const char* kTruthSchema = "pocc.truth/1";
inline constexpr const char* kReplicatesSchema = "pocc.replicates/1";
inline constexpr const char* kDrawsSchema = "pocc.draws/1";
inline constexpr const char* kPlotSchema = "pocc.plot/1";
inline constexpr const char* kFitSchema = "pocc.fit/1";
inline constexpr const char* kSummarySchema = "pocc.summary/1";
inline constexpr const char* kManifestSchema = "pocc.manifest/1";

/// Malformed or mis-versioned input data.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::filesystem::path& path, std::size_t line, const std::string& what)
      : std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what) {}
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Shortest exact decimal form that round-trips the double (17 significant
/// digits); NaN becomes "nan".
std::string format_double(double v);

// --- datasets ---------------------------------------------------------------

void write_population_csv(const std::filesystem::path& path, const Population& population);
Population read_population_csv(const std::filesystem::path& path);

void write_sample_csv(const std::filesystem::path& path, const CaseControlSample& sample);
CaseControlSample read_sample_csv(const std::filesystem::path& path);

/// Truth rows are aligned with (and keyed by) the sample's unit ids.
void write_truth_csv(const std::filesystem::path& path, const CaseControlSample& sample,
                     const SampleTruth& truth);
SampleTruth read_truth_csv(const std::filesystem::path& path, const CaseControlSample& sample);

// --- fit output --------------------------------------------------------------

struct FitRecord {
  std::string model;
  std::optional<double> known_pi;
  long burn_in = 0;
  long keep = 0;
  long thin = 1;
  bool adapt = true;
  std::uint64_t seed = 0;
  long n_p = 0;
  long n_u = 0;
  PosteriorSummary summary;
};

void write_fit_json(const std::filesystem::path& path, const FitRecord& record);
FitRecord read_fit_json(const std::filesystem::path& path);
void write_fit_csv(const std::filesystem::path& path, const FitRecord& record);

void write_draws_csv(const std::filesystem::path& path, const ChainOutput& output);

// --- simulation archive -------------------------------------------------------

struct ArchiveConfig {
  ExperimentGrid grid;
  long burn_in = 10000;
  long keep = 5000;
  long thin = 1;
  bool adapt = true;
  std::vector<double> proposal_scale;
};

struct Manifest {
  std::string version;      ///< tool version that produced the archive
  std::string created_utc;  ///< informational; not part of reproducibility
  ArchiveConfig config;
  std::vector<std::string> failed_cells;
};

SamplerConfig sampler_config_from(const ArchiveConfig& config);

/// Writes manifest.json, replicates.csv, summary.json and plots/ under dir.
void write_archive(const std::filesystem::path& dir, const Manifest& manifest,
                   const GridRun& run, const GridSummary& summary);

Manifest read_manifest(const std::filesystem::path& path);
std::vector<ReplicateResult> read_replicates_csv(const std::filesystem::path& path);
GridSummary read_summary_json(const std::filesystem::path& path);

// --- report -------------------------------------------------------------------

/// Aligned text tables in the study layout: one block per scenario and size,
/// one row per model with median (Q1 ; Q3) columns.
std::string render_summary_tables(const GridSummary& summary);

/// Diagnostic notes for RMSE series that fail to decrease with n.
std::vector<std::string> rmse_monotonicity_notes(const GridSummary& summary);

}  // namespace pocc::io

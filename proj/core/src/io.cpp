#include "pocc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pocc/version.hpp"

namespace pocc::io {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "' for reading");
  return in;
}

void write_schema_line(std::ofstream& out, const char* schema) {
  out << "# schema=" << schema << "\n";
}

class CsvReader {
 public:
  CsvReader(const std::filesystem::path& path, const char* schema)
      : path_(path), in_(open_for_read(path)) {
    std::string first;
    if (!std::getline(in_, first)) throw ParseError(path_, 1, "empty file");
    ++line_;
    const std::string expected = std::string("# schema=") + schema;
    if (first != expected)
      throw ParseError(path_, 1,
                       "schema mismatch: expected '" + expected + "', found '" + first + "'");
  }

  bool next(std::vector<std::string>& fields) {
    std::string line;
    if (!std::getline(in_, line)) return false;
    ++line_;
    fields = split(line);
    return true;
  }

  void expect_header(const std::string& header) {
    std::string line;
    if (!std::getline(in_, line) || line != header)
      throw ParseError(path_, 2, "expected header '" + header + "'");
    ++line_;
  }

  std::size_t line() const { return line_; }
  const std::filesystem::path& path() const { return path_; }

  double to_double(const std::string& field) const {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0')
      throw ParseError(path_, line_, "expected a number, found '" + field + "'");
    return v;
  }

  long to_long(const std::string& field) const {
    char* end = nullptr;
    const long v = std::strtol(field.c_str(), &end, 10);
    if (end == field.c_str() || *end != '\0')
      throw ParseError(path_, line_, "expected an integer, found '" + field + "'");
    return v;
  }

  std::uint8_t to_binary(const std::string& field) const {
    if (field == "0") return 0;
    if (field == "1") return 1;
    throw ParseError(path_, line_, "expected 0 or 1, found '" + field + "'");
  }

 private:
  std::vector<std::string> split(const std::string& line) const {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field.push_back('"');
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"' && field.empty()) {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else {
        field.push_back(c);
      }
    }
    if (quoted) throw ParseError(path_, line_, "unterminated quoted field");
    fields.push_back(std::move(field));
    return fields;
  }

  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_ = 0;
};

std::string quote_csv(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double number_from(const json& j) {
  if (j.is_null()) return kNaN;
  return j.get<double>();
}

json dump_double_array(const std::vector<double>& values) {
  json arr = json::array();
  for (double v : values) arr.push_back(number_or_null(v));
  return arr;
}

std::vector<double> load_double_array(const json& arr) {
  std::vector<double> values;
  for (const auto& v : arr) values.push_back(number_from(v));
  return values;
}

json read_json_with_schema(const std::filesystem::path& path, const char* schema) {
  std::ifstream in = open_for_read(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path, 0, std::string("invalid JSON: ") + e.what());
  }
  if (!j.contains("schema") || j["schema"] != schema)
    throw ParseError(path, 1, std::string("schema mismatch: expected '") + schema + "'");
  return j;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out = open_for_write(path);
  out << j.dump(2) << "\n";
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_population_csv(const std::filesystem::path& path, const Population& population) {
  std::ofstream out = open_for_write(path);
  write_schema_line(out, kPopulationSchema);
  out << "unit_id,x1,x2,y\n";
  for (std::size_t i = 0; i < population.size(); ++i) {
    out << (i + 1) << ',' << format_double(population.x1[i]) << ','
        << format_double(population.x2[i]) << ',' << int(population.y[i]) << "\n";
  }
}

Population read_population_csv(const std::filesystem::path& path) {
  CsvReader reader(path, kPopulationSchema);
  reader.expect_header("unit_id,x1,x2,y");
  Population pop;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 4)
      throw ParseError(reader.path(), reader.line(), "expected 4 fields");
    pop.x1.push_back(reader.to_double(fields[1]));
    pop.x2.push_back(reader.to_double(fields[2]));
    pop.y.push_back(reader.to_binary(fields[3]));
  }
  if (pop.size() == 0) throw ParseError(reader.path(), reader.line(), "no data rows");
  return pop;
}

void write_sample_csv(const std::filesystem::path& path, const CaseControlSample& sample) {
  validate(sample);
  if (sample.design.cols() != 2)
    throw std::invalid_argument("write_sample_csv: expected an intercept + x1 design");
  std::ofstream out = open_for_write(path);
  write_schema_line(out, kSampleSchema);
  out << "unit_id,x1,z\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const std::int64_t id =
        sample.unit_id.empty() ? static_cast<std::int64_t>(i + 1) : sample.unit_id[i];
    out << id << ',' << format_double(sample.design(i, 1)) << ',' << int(sample.z[i]) << "\n";
  }
}

CaseControlSample read_sample_csv(const std::filesystem::path& path) {
  CsvReader reader(path, kSampleSchema);
  reader.expect_header("unit_id,x1,z");
  std::vector<std::int64_t> ids;
  std::vector<double> x1;
  std::vector<std::uint8_t> z;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 3)
      throw ParseError(reader.path(), reader.line(), "expected 3 fields");
    ids.push_back(reader.to_long(fields[0]));
    x1.push_back(reader.to_double(fields[1]));
    z.push_back(reader.to_binary(fields[2]));
  }
  if (ids.empty()) throw ParseError(reader.path(), reader.line(), "no data rows");

  CaseControlSample sample;
  sample.design = Matrix(ids.size(), 2);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    sample.design(i, 0) = 1.0;
    sample.design(i, 1) = x1[i];
  }
  sample.z = std::move(z);
  sample.unit_id = std::move(ids);
  return sample;
}

void write_truth_csv(const std::filesystem::path& path, const CaseControlSample& sample,
                     const SampleTruth& truth) {
  if (truth.y.size() != sample.size())
    throw std::invalid_argument("write_truth_csv: truth rows do not match the sample");
  std::ofstream out = open_for_write(path);
  write_schema_line(out, kTruthSchema);
  out << "unit_id,y\n";
  for (std::size_t i = 0; i < truth.y.size(); ++i) {
    const std::int64_t id =
        sample.unit_id.empty() ? static_cast<std::int64_t>(i + 1) : sample.unit_id[i];
    out << id << ',' << int(truth.y[i]) << "\n";
  }
}

SampleTruth read_truth_csv(const std::filesystem::path& path, const CaseControlSample& sample) {
  CsvReader reader(path, kTruthSchema);
  reader.expect_header("unit_id,y");
  SampleTruth truth;
  std::vector<std::int64_t> ids;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 2)
      throw ParseError(reader.path(), reader.line(), "expected 2 fields");
    ids.push_back(reader.to_long(fields[0]));
    truth.y.push_back(reader.to_binary(fields[1]));
  }
  if (truth.y.size() != sample.size())
    throw ParseError(reader.path(), reader.line(),
                     "truth row count does not match the sample");
  if (!sample.unit_id.empty()) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] != sample.unit_id[i])
        throw ParseError(reader.path(), i + 3, "unit_id does not match the sample row");
    }
  }
  // Presence-stratum rows are presences by construction.
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (sample.z[i] && !truth.y[i])
      throw ParseError(reader.path(), i + 3, "presence-stratum row labeled y=0");
  }
  return truth;
}

void write_fit_json(const std::filesystem::path& path, const FitRecord& record) {
  json j;
  j["schema"] = kFitSchema;
  j["version"] = kVersion;
  j["model"] = record.model;
  j["known_pi"] = record.known_pi ? json(*record.known_pi) : json(nullptr);
  j["config"] = {{"burn_in", record.burn_in},
                 {"keep", record.keep},
                 {"thin", record.thin},
                 {"adapt", record.adapt},
                 {"seed", record.seed}};
  j["data"] = {{"n_p", record.n_p}, {"n_u", record.n_u}};
  j["results"] = {{"beta_mean", dump_double_array(record.summary.beta_mean)},
                  {"beta_sd", dump_double_array(record.summary.beta_sd)},
                  {"beta_median", dump_double_array(record.summary.beta_median)},
                  {"beta_q1", dump_double_array(record.summary.beta_q1)},
                  {"beta_q3", dump_double_array(record.summary.beta_q3)},
                  {"pi_hat", number_or_null(record.summary.pi_hat)},
                  {"acceptance_rate", number_or_null(record.summary.acceptance_rate)},
                  {"kept", record.summary.kept}};
  write_json_file(path, j);
}

FitRecord read_fit_json(const std::filesystem::path& path) {
  const json j = read_json_with_schema(path, kFitSchema);
  FitRecord record;
  record.model = j.at("model").get<std::string>();
  if (!j.at("known_pi").is_null()) record.known_pi = j["known_pi"].get<double>();
  const auto& config = j.at("config");
  record.burn_in = config.at("burn_in").get<long>();
  record.keep = config.at("keep").get<long>();
  record.thin = config.at("thin").get<long>();
  record.adapt = config.at("adapt").get<bool>();
  record.seed = config.at("seed").get<std::uint64_t>();
  const auto& data = j.at("data");
  record.n_p = data.at("n_p").get<long>();
  record.n_u = data.at("n_u").get<long>();
  const auto& results = j.at("results");
  record.summary.beta_mean = load_double_array(results.at("beta_mean"));
  record.summary.beta_sd = load_double_array(results.at("beta_sd"));
  record.summary.beta_median = load_double_array(results.at("beta_median"));
  record.summary.beta_q1 = load_double_array(results.at("beta_q1"));
  record.summary.beta_q3 = load_double_array(results.at("beta_q3"));
  record.summary.pi_hat = number_from(results.at("pi_hat"));
  record.summary.acceptance_rate = number_from(results.at("acceptance_rate"));
  record.summary.kept = results.at("kept").get<long>();
  return record;
}

void write_fit_csv(const std::filesystem::path& path, const FitRecord& record) {
  std::ofstream out = open_for_write(path);
  write_schema_line(out, kFitSchema);
  out << "key,value\n";
  out << "model," << record.model << "\n";
  out << "known_pi," << (record.known_pi ? format_double(*record.known_pi) : "nan") << "\n";
  out << "burn_in," << record.burn_in << "\n";
  out << "keep," << record.keep << "\n";
  out << "thin," << record.thin << "\n";
  out << "adapt," << (record.adapt ? 1 : 0) << "\n";
  out << "seed," << record.seed << "\n";
  out << "n_p," << record.n_p << "\n";
  out << "n_u," << record.n_u << "\n";
  for (std::size_t jdx = 0; jdx < record.summary.beta_mean.size(); ++jdx) {
    out << "beta" << jdx << "_mean," << format_double(record.summary.beta_mean[jdx]) << "\n";
    out << "beta" << jdx << "_sd," << format_double(record.summary.beta_sd[jdx]) << "\n";
    out << "beta" << jdx << "_median," << format_double(record.summary.beta_median[jdx]) << "\n";
    out << "beta" << jdx << "_q1," << format_double(record.summary.beta_q1[jdx]) << "\n";
    out << "beta" << jdx << "_q3," << format_double(record.summary.beta_q3[jdx]) << "\n";
  }
  out << "pi_hat," << format_double(record.summary.pi_hat) << "\n";
  out << "acceptance_rate," << format_double(record.summary.acceptance_rate) << "\n";
  out << "kept," << record.summary.kept << "\n";
}

void write_draws_csv(const std::filesystem::path& path, const ChainOutput& output) {
  std::ofstream out = open_for_write(path);
  write_schema_line(out, kDrawsSchema);
  out << "draw";
  for (std::size_t j = 0; j < output.beta_draws.cols(); ++j) out << ",beta" << j;
  out << ",n_1u\n";
  for (std::size_t i = 0; i < output.beta_draws.rows(); ++i) {
    out << (i + 1);
    for (std::size_t j = 0; j < output.beta_draws.cols(); ++j)
      out << ',' << format_double(output.beta_draws(i, j));
    out << ',' << output.n_1u_trace[i] << "\n";
  }
}

SamplerConfig sampler_config_from(const ArchiveConfig& config) {
  SamplerConfig sampler;
  sampler.burn_in = config.burn_in;
  sampler.keep = config.keep;
  sampler.thin = config.thin;
  sampler.adapt = config.adapt;
  sampler.proposal_scale = config.proposal_scale;
  return sampler;
}

namespace {

json manifest_to_json(const Manifest& manifest) {
  json scenarios = json::array();
  for (Scenario s : manifest.config.grid.scenarios) scenarios.push_back(to_string(s));
  json models = json::array();
  for (ModelVariant m : manifest.config.grid.models) models.push_back(to_string(m));

  json j;
  j["schema"] = kManifestSchema;
  j["version"] = manifest.version;
  j["created_utc"] = manifest.created_utc;
  j["config"] = {
      {"scenarios", scenarios},
      {"sizes", manifest.config.grid.sizes},
      {"replicates", manifest.config.grid.replicates},
      {"models", models},
      {"master_seed", manifest.config.grid.master_seed},
      {"population_size", manifest.config.grid.population_size},
      {"eval_size", manifest.config.grid.eval_size},
      {"beta_override",
       manifest.config.grid.beta_override
           ? json(std::vector<double>(manifest.config.grid.beta_override->begin(),
                                      manifest.config.grid.beta_override->end()))
           : json(nullptr)},
      {"sampler",
       {{"burn_in", manifest.config.burn_in},
        {"keep", manifest.config.keep},
        {"thin", manifest.config.thin},
        {"adapt", manifest.config.adapt},
        {"proposal_scale", manifest.config.proposal_scale}}}};
  j["failed_cells"] = manifest.failed_cells;
  return j;
}

}  // namespace

Manifest read_manifest(const std::filesystem::path& path) {
  const json j = read_json_with_schema(path, kManifestSchema);
  Manifest manifest;
  manifest.version = j.at("version").get<std::string>();
  manifest.created_utc = j.at("created_utc").get<std::string>();
  const auto& config = j.at("config");
  for (const auto& s : config.at("scenarios"))
    manifest.config.grid.scenarios.push_back(scenario_from_string(s.get<std::string>()));
  manifest.config.grid.sizes = config.at("sizes").get<std::vector<long>>();
  manifest.config.grid.replicates = config.at("replicates").get<long>();
  for (const auto& m : config.at("models"))
    manifest.config.grid.models.push_back(model_from_string(m.get<std::string>()));
  manifest.config.grid.master_seed = config.at("master_seed").get<std::uint64_t>();
  manifest.config.grid.population_size = config.at("population_size").get<long>();
  manifest.config.grid.eval_size = config.at("eval_size").get<long>();
  if (!config.at("beta_override").is_null()) {
    const auto arr = config["beta_override"].get<std::vector<double>>();
    if (arr.size() != 3)
      throw ParseError(path, 0, "beta_override must hold exactly 3 values");
    manifest.config.grid.beta_override = std::array<double, 3>{arr[0], arr[1], arr[2]};
  }
  const auto& sampler = config.at("sampler");
  manifest.config.burn_in = sampler.at("burn_in").get<long>();
  manifest.config.keep = sampler.at("keep").get<long>();
  manifest.config.thin = sampler.at("thin").get<long>();
  manifest.config.adapt = sampler.at("adapt").get<bool>();
  manifest.config.proposal_scale = sampler.at("proposal_scale").get<std::vector<double>>();
  manifest.failed_cells = j.at("failed_cells").get<std::vector<std::string>>();
  return manifest;
}

namespace {

void write_replicates_csv(const std::filesystem::path& path,
                          const std::vector<ReplicateResult>& results) {
  std::ofstream out = open_for_write(path);
  write_schema_line(out, kReplicatesSchema);
  out << "scenario,n,model,replicate,failed,beta0_hat,beta1_hat,pi_hat,accept_rate,sens,spec,error\n";
  for (const auto& r : results) {
    const double b0 = r.beta_hat.size() > 0 ? r.beta_hat[0] : kNaN;
    const double b1 = r.beta_hat.size() > 1 ? r.beta_hat[1] : kNaN;
    out << to_string(r.scenario) << ',' << r.n << ',' << to_string(r.model) << ','
        << r.replicate << ',' << (r.failed ? 1 : 0) << ',' << format_double(b0) << ','
        << format_double(b1) << ',' << format_double(r.pi_hat) << ','
        << format_double(r.accept_rate) << ',' << format_double(r.sens) << ','
        << format_double(r.spec) << ',' << quote_csv(r.error) << "\n";
  }
}

json summary_to_json(const GridSummary& summary) {
  json j;
  j["schema"] = kSummarySchema;
  json truth = json::array();
  for (const auto& [s, t] : summary.truth) {
    truth.push_back({{"scenario", to_string(s)},
                     {"beta_true", std::vector<double>(t.beta_true.begin(), t.beta_true.end())},
                     {"pi_true", t.pi_true}});
  }
  j["truth"] = truth;

  json cells = json::array();
  for (const auto& c : summary.cells) {
    cells.push_back(
        {{"scenario", to_string(c.scenario)},
         {"n", c.n},
         {"model", to_string(c.model)},
         {"n_ok", c.n_ok},
         {"n_failed", c.n_failed},
         {"beta0", {{"median", number_or_null(c.b0_median)},
                    {"q1", number_or_null(c.b0_q1)},
                    {"q3", number_or_null(c.b0_q3)}}},
         {"beta1", {{"median", number_or_null(c.b1_median)},
                    {"q1", number_or_null(c.b1_q1)},
                    {"q3", number_or_null(c.b1_q3)}}},
         {"pi", {{"median", number_or_null(c.pi_median)},
                 {"q1", number_or_null(c.pi_q1)},
                 {"q3", number_or_null(c.pi_q3)}}},
         {"rmse", {{"beta0", number_or_null(c.rmse_b0)},
                   {"beta1", number_or_null(c.rmse_b1)},
                   {"pi", number_or_null(c.rmse_pi)}}},
         {"corr", {{"b0_b1", number_or_null(c.corr_b0_b1)},
                   {"b0_pi", number_or_null(c.corr_b0_pi)},
                   {"b1_pi", number_or_null(c.corr_b1_pi)}}},
         {"prediction", {{"mean_sens", number_or_null(c.mean_sens)},
                         {"mean_spec", number_or_null(c.mean_spec)},
                         {"excluded_sens", c.excluded_sens},
                         {"excluded_spec", c.excluded_spec}}},
         {"mean_accept", number_or_null(c.mean_accept)}});
  }
  j["cells"] = cells;

  json relative = json::array();
  for (const auto& r : summary.relative) {
    relative.push_back({{"scenario", to_string(r.scenario)},
                        {"n", r.n},
                        {"sensitivity", number_or_null(r.sensitivity)},
                        {"specificity", number_or_null(r.specificity)}});
  }
  j["relative"] = relative;
  return j;
}

void write_plot_files(const std::filesystem::path& dir, const GridSummary& summary,
                      const std::vector<ReplicateResult>& results) {
  std::filesystem::create_directories(dir);

  {
    std::ofstream out = open_for_write(dir / "rmse_vs_n.csv");
    write_schema_line(out, kPlotSchema);
    out << "scenario,model,n,rmse_beta0,rmse_beta1,rmse_pi\n";
    for (const auto& c : summary.cells) {
      out << to_string(c.scenario) << ',' << to_string(c.model) << ',' << c.n << ','
          << format_double(c.rmse_b0) << ',' << format_double(c.rmse_b1) << ','
          << format_double(c.rmse_pi) << "\n";
    }
  }
  {
    std::ofstream out = open_for_write(dir / "relative_pred_vs_n.csv");
    write_schema_line(out, kPlotSchema);
    out << "scenario,n,rel_sensitivity,rel_specificity\n";
    for (const auto& r : summary.relative) {
      out << to_string(r.scenario) << ',' << r.n << ',' << format_double(r.sensitivity)
          << ',' << format_double(r.specificity) << "\n";
    }
  }
  {
    std::ofstream out = open_for_write(dir / "scatter_beta0_pi.csv");
    write_schema_line(out, kPlotSchema);
    out << "scenario,n,model,replicate,beta0_hat,pi_hat\n";
    for (const auto& r : results) {
      if (r.failed) continue;
      out << to_string(r.scenario) << ',' << r.n << ',' << to_string(r.model) << ','
          << r.replicate << ',' << format_double(r.beta_hat.at(0)) << ','
          << format_double(r.pi_hat) << "\n";
    }
  }
}

}  // namespace

void write_archive(const std::filesystem::path& dir, const Manifest& manifest,
                   const GridRun& run, const GridSummary& summary) {
  std::filesystem::create_directories(dir);
  write_json_file(dir / "manifest.json", manifest_to_json(manifest));
  write_replicates_csv(dir / "replicates.csv", run.results);
  write_json_file(dir / "summary.json", summary_to_json(summary));
  write_plot_files(dir / "plots", summary, run.results);
}

std::vector<ReplicateResult> read_replicates_csv(const std::filesystem::path& path) {
  CsvReader reader(path, kReplicatesSchema);
  reader.expect_header(
      "scenario,n,model,replicate,failed,beta0_hat,beta1_hat,pi_hat,accept_rate,sens,spec,error");
  std::vector<ReplicateResult> results;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 12)
      throw ParseError(reader.path(), reader.line(), "expected 12 fields");
    ReplicateResult r;
    r.scenario = scenario_from_string(fields[0]);
    r.n = reader.to_long(fields[1]);
    r.model = model_from_string(fields[2]);
    r.replicate = reader.to_long(fields[3]);
    r.failed = reader.to_binary(fields[4]) != 0;
    r.beta_hat = {reader.to_double(fields[5]), reader.to_double(fields[6])};
    r.pi_hat = reader.to_double(fields[7]);
    r.accept_rate = reader.to_double(fields[8]);
    r.sens = reader.to_double(fields[9]);
    r.spec = reader.to_double(fields[10]);
    r.error = fields[11];
    results.push_back(std::move(r));
  }
  return results;
}

GridSummary read_summary_json(const std::filesystem::path& path) {
  const json j = read_json_with_schema(path, kSummarySchema);
  GridSummary summary;
  for (const auto& t : j.at("truth")) {
    ScenarioTruth truth;
    const auto beta = t.at("beta_true").get<std::vector<double>>();
    if (beta.size() != 3) throw ParseError(path, 0, "beta_true must hold 3 values");
    truth.beta_true = {beta[0], beta[1], beta[2]};
    truth.pi_true = t.at("pi_true").get<double>();
    summary.truth.emplace_back(scenario_from_string(t.at("scenario").get<std::string>()),
                               truth);
  }
  for (const auto& c : j.at("cells")) {
    CellStats cell;
    cell.scenario = scenario_from_string(c.at("scenario").get<std::string>());
    cell.n = c.at("n").get<long>();
    cell.model = model_from_string(c.at("model").get<std::string>());
    cell.n_ok = c.at("n_ok").get<long>();
    cell.n_failed = c.at("n_failed").get<long>();
    cell.b0_median = number_from(c.at("beta0").at("median"));
    cell.b0_q1 = number_from(c.at("beta0").at("q1"));
    cell.b0_q3 = number_from(c.at("beta0").at("q3"));
    cell.b1_median = number_from(c.at("beta1").at("median"));
    cell.b1_q1 = number_from(c.at("beta1").at("q1"));
    cell.b1_q3 = number_from(c.at("beta1").at("q3"));
    cell.pi_median = number_from(c.at("pi").at("median"));
    cell.pi_q1 = number_from(c.at("pi").at("q1"));
    cell.pi_q3 = number_from(c.at("pi").at("q3"));
    cell.rmse_b0 = number_from(c.at("rmse").at("beta0"));
    cell.rmse_b1 = number_from(c.at("rmse").at("beta1"));
    cell.rmse_pi = number_from(c.at("rmse").at("pi"));
    cell.corr_b0_b1 = number_from(c.at("corr").at("b0_b1"));
    cell.corr_b0_pi = number_from(c.at("corr").at("b0_pi"));
    cell.corr_b1_pi = number_from(c.at("corr").at("b1_pi"));
    cell.mean_sens = number_from(c.at("prediction").at("mean_sens"));
    cell.mean_spec = number_from(c.at("prediction").at("mean_spec"));
    cell.excluded_sens = c.at("prediction").at("excluded_sens").get<long>();
    cell.excluded_spec = c.at("prediction").at("excluded_spec").get<long>();
    cell.mean_accept = number_from(c.at("mean_accept"));
    summary.cells.push_back(cell);
  }
  for (const auto& r : j.at("relative")) {
    RelativePrediction rel;
    rel.scenario = scenario_from_string(r.at("scenario").get<std::string>());
    rel.n = r.at("n").get<long>();
    rel.sensitivity = number_from(r.at("sensitivity"));
    rel.specificity = number_from(r.at("specificity"));
    summary.relative.push_back(rel);
  }
  return summary;
}

namespace {

std::string fixed2(double v) {
  if (std::isnan(v)) return "--";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string triple(double median, double q1, double q3) {
  if (std::isnan(median)) return "--";
  return fixed2(median) + " (" + fixed2(q1) + " ; " + fixed2(q3) + ")";
}

}  // namespace

std::string render_summary_tables(const GridSummary& summary) {
  std::ostringstream out;
  std::vector<Scenario> scenarios;
  for (const auto& c : summary.cells)
    if (std::find(scenarios.begin(), scenarios.end(), c.scenario) == scenarios.end())
      scenarios.push_back(c.scenario);

  for (Scenario s : scenarios) {
    double pi_true = kNaN;
    for (const auto& [sc, t] : summary.truth)
      if (sc == s) pi_true = t.pi_true;
    out << "Scenario (" << to_string(s) << "), population prevalence "
        << fixed2(pi_true) << "\n";
    out << "  " << std::string(78, '-') << "\n";
    char header[128];
    std::snprintf(header, sizeof(header), "  %6s %-6s %-22s %-22s %-20s\n", "n", "model",
                  "beta0 med (Q1 ; Q3)", "beta1 med (Q1 ; Q3)", "pi med (Q1 ; Q3)");
    out << header;
    out << "  " << std::string(78, '-') << "\n";
    for (const auto& c : summary.cells) {
      if (c.scenario != s) continue;
      char row[160];
      std::snprintf(row, sizeof(row), "  %6ld %-6s %-22s %-22s %-20s\n", c.n,
                    to_string(c.model).c_str(), triple(c.b0_median, c.b0_q1, c.b0_q3).c_str(),
                    triple(c.b1_median, c.b1_q1, c.b1_q3).c_str(),
                    triple(c.pi_median, c.pi_q1, c.pi_q3).c_str());
      out << row;
    }
    out << "\n";
  }
  return out.str();
}

std::vector<std::string> rmse_monotonicity_notes(const GridSummary& summary) {
  std::vector<std::string> notes;
  struct SeriesKey {
    Scenario scenario;
    ModelVariant model;
    bool operator==(const SeriesKey&) const = default;
  };
  std::vector<SeriesKey> keys;
  for (const auto& c : summary.cells) {
    const SeriesKey k{c.scenario, c.model};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  const char* names[3] = {"beta0", "beta1", "pi"};
  for (const auto& key : keys) {
    std::vector<std::pair<long, std::array<double, 3>>> series;
    for (const auto& c : summary.cells)
      if (c.scenario == key.scenario && c.model == key.model)
        series.emplace_back(c.n, std::array<double, 3>{c.rmse_b0, c.rmse_b1, c.rmse_pi});
    std::sort(series.begin(), series.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (int p = 0; p < 3; ++p) {
      for (std::size_t i = 1; i < series.size(); ++i) {
        if (!std::isnan(series[i - 1].second[p]) && !std::isnan(series[i].second[p]) &&
            series[i].second[p] > series[i - 1].second[p]) {
          notes.push_back("rmse(" + std::string(names[p]) + ") for scenario " +
                          to_string(key.scenario) + ", model " + to_string(key.model) +
                          " rises from n=" + std::to_string(series[i - 1].first) +
                          " to n=" + std::to_string(series[i].first));
        }
      }
    }
  }
  return notes;
}

}  // namespace pocc::io

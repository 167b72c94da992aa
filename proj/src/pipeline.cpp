#include "potflare/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <set>

#include "potflare/digest.hpp"
#include "potflare/format.hpp"

namespace potflare {
namespace fs = std::filesystem;

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
Json optional_number(const std::optional<double>& v) { return v ? number_or_null(*v) : Json(nullptr); }

void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) throw ConfigError("unknown key `" + key + "` in " + where);
  }
}

template <class T>
void read_into(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

IngestConfig ingest_from_json(const Json& j, IngestConfig base, const std::string& where) {
  reject_unknown_keys(j, {"scaling_divisor", "saturation_level", "retained_saturation_events", "missing_sentinels"}, where);
  read_into(j, "scaling_divisor", base.scaling_divisor, where);
  read_into(j, "saturation_level", base.saturation_level, where);
  read_into(j, "missing_sentinels", base.missing_sentinels, where);
  if (j.contains("retained_saturation_events")) {
    std::vector<std::string> dates;
    read_into(j, "retained_saturation_events", dates, where);
    base.retained_saturation_events.clear();
    for (const auto& d : dates) {
      const auto parsed = parse_date(d);
      if (!parsed) throw ConfigError(where + ".retained_saturation_events: bad date `" + d + "`");
      base.retained_saturation_events.push_back(*parsed);
    }
  }
  try {
    base.validate();
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return base;
}

Json row_to_json(const ReturnRow& row) {
  Json j{{"m_years", row.m_years},
         {"level", row.level},
         {"level_x_class", x_class(row.level)},
         {"sub_threshold", row.sub_threshold}};
  if (row.ci) {
    j["ci_low"] = row.ci->log_low;
    j["ci_high"] = row.ci->log_high;
    j["ci_low_x_class"] = x_class(row.ci->log_low);
    j["ci_high_x_class"] = x_class(row.ci->log_high);
    j["symmetric_low"] = row.ci->low;
    j["symmetric_high"] = row.ci->high;
    j["std_error"] = row.ci->std_error;
  } else {
    j["ci_low"] = j["ci_high"] = nullptr;
  }
  return j;
}

Json scenario_to_json(const PeriodScenario& s) {
  return {{"level", s.level},
          {"level_x_class", x_class(s.level)},
          {"period_years", s.period_years},
          {"ci_low_years", optional_number(s.ci_low_years)},
          {"ci_high_years", optional_number(s.ci_high_years)}};
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const auto minutes = std::chrono::duration_cast<std::chrono::minutes>(now.time_since_epoch()).count();
  return format_utc_minute(UtcMinute{minutes});
}

class Manifest {
 public:
  explicit Manifest(fs::path path) : path_(std::move(path)) {}

  void complete(Stage s) { completed_.push_back(stage_name(s)); }

  void write(const std::optional<StageError>& failure) const {
    Json j{{"schema_version", kReportSchemaVersion}, {"completed_stages", completed_}};
    if (failure) {
      j["failed_stage"] = stage_name(failure->stage());
      j["error"] = failure->what();
    } else {
      j["failed_stage"] = nullptr;
    }
    write_json_file(path_, j);
  }

 private:
  fs::path path_;
  std::vector<std::string> completed_;
};

// Runs `body`, rethrowing any library error as a StageError for `stage`.
template <class F>
auto in_stage(Stage stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace

PipelineConfig::PipelineConfig() {
  for (int g = 1; g <= 30; ++g) sweep_gaps.push_back(g);
}

void PipelineConfig::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(decluster_threshold) || !positive(gpd_threshold)) throw ConfigError("thresholds must be positive");
  if (gpd_threshold < decluster_threshold) throw ConfigError("gpd_threshold must be at least decluster_threshold");
  if (gap_minutes < 1) throw ConfigError("gap_minutes must be at least 1");
  if (!positive(observations_per_year)) throw ConfigError("observations_per_year must be positive");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw ConfigError("ci_level must lie in (0, 1)");
  if (sweep_gaps.empty()) throw ConfigError("sweep_gaps must not be empty");
  for (std::size_t i = 0; i < sweep_gaps.size(); ++i) {
    if (sweep_gaps[i] < 1 || (i > 0 && sweep_gaps[i] <= sweep_gaps[i - 1])) {
      throw ConfigError("sweep_gaps must be strictly increasing and at least 1");
    }
  }
  if (mrl_grid_points < 2) throw ConfigError("mrl_grid_points must be at least 2");
  if (!positive(return_grid_min_years) || !(return_grid_max_years > return_grid_min_years) || return_grid_per_decade < 1) {
    throw ConfigError("invalid return grid");
  }
  for (double m : report_years) {
    if (!positive(m)) throw ConfigError("report_years must be positive");
  }
  for (double m : scenario_years) {
    if (!positive(m)) throw ConfigError("scenario_years must be positive");
  }
  for (double level : scenario_levels) {
    if (!(level > gpd_threshold) || !std::isfinite(level)) throw ConfigError("scenario_levels must exceed gpd_threshold");
  }
  try {
    ingest.validate();
    for (const auto& in : inputs) in.ingest.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

PipelineConfig config_from_json(const Json& j, const fs::path& base_dir) {
  const std::string where = "config";
  reject_unknown_keys(j,
                      {"ingest", "inputs", "decluster_threshold", "gap_minutes", "gpd_threshold", "observations_per_year",
                       "ci_level", "min_excesses", "sweep_gaps", "mrl_grid_points", "return_grid", "report_years",
                       "scenario_levels", "scenario_years", "write_series"},
                      where);
  PipelineConfig c;
  if (j.contains("ingest")) c.ingest = ingest_from_json(j.at("ingest"), c.ingest, "config.ingest");
  if (j.contains("inputs")) {
    if (!j.at("inputs").is_array()) throw ConfigError("config.inputs must be an array");
    for (const auto& item : j.at("inputs")) {
      const std::string here = "config.inputs[" + std::to_string(c.inputs.size()) + "]";
      InputSpec spec{{}, c.ingest};
      if (item.is_string()) {
        spec.path = item.get<std::string>();
      } else {
        reject_unknown_keys(item, {"path", "ingest"}, here);
        std::string p;
        read_into(item, "path", p, here);
        if (p.empty()) throw ConfigError(here + ".path is required");
        spec.path = p;
        if (item.contains("ingest")) spec.ingest = ingest_from_json(item.at("ingest"), c.ingest, here + ".ingest");
      }
      if (spec.path.is_relative() && !base_dir.empty()) spec.path = base_dir / spec.path;
      c.inputs.push_back(std::move(spec));
    }
  }
  read_into(j, "decluster_threshold", c.decluster_threshold, where);
  read_into(j, "gap_minutes", c.gap_minutes, where);
  read_into(j, "gpd_threshold", c.gpd_threshold, where);
  read_into(j, "observations_per_year", c.observations_per_year, where);
  read_into(j, "ci_level", c.ci_level, where);
  read_into(j, "min_excesses", c.min_excesses, where);
  read_into(j, "sweep_gaps", c.sweep_gaps, where);
  read_into(j, "mrl_grid_points", c.mrl_grid_points, where);
  if (j.contains("return_grid")) {
    const auto& g = j.at("return_grid");
    reject_unknown_keys(g, {"min_years", "max_years", "per_decade"}, "config.return_grid");
    read_into(g, "min_years", c.return_grid_min_years, "config.return_grid");
    read_into(g, "max_years", c.return_grid_max_years, "config.return_grid");
    read_into(g, "per_decade", c.return_grid_per_decade, "config.return_grid");
  }
  read_into(j, "report_years", c.report_years, where);
  read_into(j, "scenario_levels", c.scenario_levels, where);
  read_into(j, "scenario_years", c.scenario_years, where);
  read_into(j, "write_series", c.write_series, where);
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  Json j;
  try {
    j = read_json_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(j, path.parent_path());
}

Json to_json(const IngestConfig& config) {
  Json dates = Json::array();
  for (const auto& d : config.retained_saturation_events) dates.push_back(format_date(d));
  return {{"scaling_divisor", config.scaling_divisor},
          {"saturation_level", config.saturation_level},
          {"retained_saturation_events", std::move(dates)},
          {"missing_sentinels", config.missing_sentinels}};
}

Json to_json(const PipelineConfig& c) {
  Json inputs = Json::array();
  for (const auto& in : c.inputs) inputs.push_back({{"path", in.path.string()}, {"ingest", to_json(in.ingest)}});
  return {{"ingest", to_json(c.ingest)},
          {"inputs", std::move(inputs)},
          {"decluster_threshold", c.decluster_threshold},
          {"gap_minutes", c.gap_minutes},
          {"gpd_threshold", c.gpd_threshold},
          {"observations_per_year", c.observations_per_year},
          {"ci_level", c.ci_level},
          {"min_excesses", c.min_excesses},
          {"sweep_gaps", c.sweep_gaps},
          {"mrl_grid_points", c.mrl_grid_points},
          {"return_grid",
           {{"min_years", c.return_grid_min_years},
            {"max_years", c.return_grid_max_years},
            {"per_decade", c.return_grid_per_decade}}},
          {"report_years", c.report_years},
          {"scenario_levels", c.scenario_levels},
          {"scenario_years", c.scenario_years},
          {"write_series", c.write_series}};
}

const char* stage_name(Stage stage) {
  switch (stage) {
    case Stage::config: return "config";
    case Stage::ingest: return "ingest";
    case Stage::decluster: return "decluster";
    case Stage::sweep: return "sweep";
    case Stage::fit: return "fit";
    case Stage::diagnose: return "diagnose";
    case Stage::returns: return "returns";
    case Stage::report: return "report";
  }
  return "unknown";
}

int exit_code(Stage stage) {
  switch (stage) {
    case Stage::config: return 1;
    case Stage::ingest: return 2;
    case Stage::decluster: return 3;
    case Stage::sweep: return 4;
    case Stage::fit: return 5;
    case Stage::diagnose: return 6;
    case Stage::returns: return 7;
    case Stage::report: return 8;
  }
  return 9;
}

IngestOutcome run_ingest(const std::vector<InputSpec>& inputs) {
  if (inputs.empty()) throw EmptyInputError("no input files");
  IngestOutcome outcome;
  std::vector<FluxSeries> parts;
  for (const auto& in : inputs) {
    auto result = ingest_file(in.path, in.ingest);
    FileIngestSummary s;
    s.path = in.path.string();
    s.sha256 = sha256_file(in.path);
    s.n_samples = static_cast<std::int64_t>(result.series.size());
    s.n_observations = result.series.n_observations();
    s.removed_saturation_runs = result.removed_saturation_runs;
    s.retained_saturation_runs = result.retained_saturation_runs;
    for (const auto& d : result.removed_dates) s.removed_dates.push_back(format_date(d));
    outcome.files.push_back(std::move(s));
    parts.push_back(std::move(result.series));
  }
  outcome.series = concatenate(std::move(parts));
  return outcome;
}

Json to_json(const IngestOutcome& outcome) {
  Json files = Json::array();
  std::size_t removed = 0, retained = 0;
  for (const auto& f : outcome.files) {
    removed += f.removed_saturation_runs;
    retained += f.retained_saturation_runs;
    files.push_back({{"path", f.path},
                     {"sha256", f.sha256},
                     {"n_samples", f.n_samples},
                     {"n_observations", f.n_observations},
                     {"removed_saturation_runs", f.removed_saturation_runs},
                     {"retained_saturation_runs", f.retained_saturation_runs},
                     {"removed_dates", f.removed_dates}});
  }
  const auto& s = outcome.series;
  return {{"n_samples", s.size()},
          {"n_observations", s.n_observations()},
          {"span_start", format_utc_minute(s.span_start())},
          {"span_end", format_utc_minute(s.span_end())},
          {"removed_saturation_runs", removed},
          {"retained_saturation_runs", retained},
          {"saturated_runs_removed", removed > 0},
          {"files", std::move(files)}};
}

EventCatalog run_decluster(const FluxSeries& series, const PipelineConfig& config) {
  return decluster(series, config.decluster_threshold, config.gap_minutes);
}

SweepOutcome run_sweep(const FluxSeries& series, const PipelineConfig& config) {
  SweepOutcome out;
  out.curve = gap_sweep(series, config.decluster_threshold, config.sweep_gaps);
  try {
    out.raw_lag1 = raw_lag1_autocorrelation(series);
  } catch (const InsufficientDataError&) {
  } catch (const ZeroVarianceError&) {
  }
  return out;
}

Json to_json(const SweepOutcome& outcome) {
  Json j = to_json(outcome.curve);
  j["raw_lag1_autocorrelation"] = optional_number(outcome.raw_lag1);
  return j;
}

std::vector<double> catalog_excesses(const EventCatalog& catalog, double gpd_threshold) {
  return excesses_over(catalog.peak_fluxes(), gpd_threshold);
}

GpdFit run_fit(const EventCatalog& catalog, const PipelineConfig& config) {
  const auto excesses = catalog_excesses(catalog, config.gpd_threshold);
  FitOptions opts;
  opts.threshold = config.gpd_threshold;
  opts.n_total = catalog.n_total_observations;
  opts.min_excesses = config.min_excesses;
  return fit_gpd(excesses, opts);
}

DiagnoseOutcome run_diagnose(const EventCatalog& catalog, const GpdFit& fit, const PipelineConfig& config) {
  const auto peaks = catalog.peak_fluxes();
  const auto grid = default_u_grid(peaks, catalog.decluster_threshold, config.mrl_grid_points);
  return {mean_excess_curve(peaks, grid, config.ci_level), probability_plot(fit, catalog_excesses(catalog, fit.threshold))};
}

ReturnsOutcome run_returns(const GpdFit& fit, const PipelineConfig& config) {
  const ObservationCalendar cal{config.observations_per_year};
  const CiOptions ci{config.ci_level, true};
  const bool has_ci = fit.covariance.has_value();
  const double m0 = threshold_period(fit, cal);

  auto row = [&](double m) {
    const auto level = return_level(fit, m, cal);
    ReturnRow r{m, level.level, level.sub_threshold, std::nullopt};
    if (has_ci) r.ci = return_level_ci(fit, m, cal, ci);
    return r;
  };

  ReturnsOutcome out;
  out.curve.ci_level = config.ci_level;
  for (double m : default_m_grid(config.return_grid_min_years, config.return_grid_max_years, config.return_grid_per_decade)) {
    if (!(m > m0)) continue;
    const auto r = row(m);
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    out.curve.points.push_back({m, r.level, r.ci ? r.ci->log_low : nan, r.ci ? r.ci->log_high : nan,
                                r.ci ? r.ci->low : nan, r.ci ? r.ci->high : nan});
  }
  for (double m : config.report_years) out.table.push_back(row(m));
  for (double m : config.scenario_years) out.level_scenarios.push_back(row(m));
  for (double level : config.scenario_levels) {
    PeriodScenario s{level, std::numeric_limits<double>::infinity(), std::nullopt, std::nullopt};
    try {
      if (has_ci) {
        const auto p = return_period_ci(fit, level, cal, ci);
        s = {level, p.period, p.low, p.high};
      } else {
        s.period_years = return_period(fit, level, cal);
      }
    } catch (const InfiniteReturnError&) {
      // Level beyond a finite upper endpoint: never exceeded under the model.
    }
    out.period_scenarios.push_back(s);
  }
  return out;
}

Json to_json(const ReturnsOutcome& outcome) {
  Json table = Json::array();
  for (const auto& r : outcome.table) table.push_back(row_to_json(r));
  Json levels = Json::array();
  for (const auto& r : outcome.level_scenarios) levels.push_back(row_to_json(r));
  Json periods = Json::array();
  for (const auto& s : outcome.period_scenarios) periods.push_back(scenario_to_json(s));
  return {{"curve", to_json(outcome.curve)},
          {"table", std::move(table)},
          {"scenarios", {{"return_periods", std::move(periods)}, {"return_levels", std::move(levels)}}}};
}

void write_ingest_artifacts(const fs::path& dir, const IngestOutcome& outcome, bool write_series) {
  write_json_file(dir / "ingest.json", to_json(outcome));
  if (write_series) write_flux_csv(dir / "series.csv", outcome.series);
}

void write_decluster_artifacts(const fs::path& dir, const EventCatalog& catalog) {
  write_text_file(dir / "catalog.csv", [&](std::ostream& out) { write_catalog_csv(out, catalog); });
  write_json_file(dir / "catalog.json", to_json(catalog));
}

void write_sweep_artifacts(const fs::path& dir, const SweepOutcome& outcome) {
  write_text_file(dir / "sweep.csv", [&](std::ostream& out) { write_sweep_csv(out, outcome.curve); });
  write_json_file(dir / "sweep.json", to_json(outcome));
}

void write_fit_artifacts(const fs::path& dir, const GpdFit& fit, const std::vector<double>& excesses) {
  write_json_file(dir / "fit.json", to_json(fit));
  write_text_file(dir / "excesses.txt", [&](std::ostream& out) {
    for (double y : excesses) out << format_double(y) << '\n';
  });
}

void write_diagnose_artifacts(const fs::path& dir, const DiagnoseOutcome& outcome) {
  write_text_file(dir / "mrl.csv", [&](std::ostream& out) { write_mrl_csv(out, outcome.mrl); });
  write_json_file(dir / "mrl.json", to_json(outcome.mrl));
  write_text_file(dir / "probplot.csv", [&](std::ostream& out) { write_probplot_csv(out, outcome.probplot); });
  write_json_file(dir / "probplot.json", to_json(outcome.probplot));
}

void write_returns_artifacts(const fs::path& dir, const ReturnsOutcome& outcome) {
  write_text_file(dir / "returns.csv", [&](std::ostream& out) { write_returns_csv(out, outcome.curve); });
  write_json_file(dir / "returns.json", to_json(outcome));
}

AnalysisReport run_pipeline(const PipelineConfig& config, const fs::path& out_dir, const RunOptions& options) {
  in_stage(Stage::config, [&] {
    config.validate();
    fs::create_directories(out_dir);
    return 0;
  });
  Manifest manifest(out_dir / "manifest.json");
  try {
    const auto ingested = in_stage(Stage::ingest, [&] {
      auto r = run_ingest(config.inputs);
      write_ingest_artifacts(out_dir, r, config.write_series);
      return r;
    });
    manifest.complete(Stage::ingest);

    const auto catalog = in_stage(Stage::decluster, [&] {
      auto c = run_decluster(ingested.series, config);
      write_decluster_artifacts(out_dir, c);
      return c;
    });
    manifest.complete(Stage::decluster);

    const auto sweep = in_stage(Stage::sweep, [&] {
      auto s = run_sweep(ingested.series, config);
      write_sweep_artifacts(out_dir, s);
      return s;
    });
    manifest.complete(Stage::sweep);

    const auto fit = in_stage(Stage::fit, [&] {
      auto f = run_fit(catalog, config);
      write_fit_artifacts(out_dir, f, catalog_excesses(catalog, config.gpd_threshold));
      return f;
    });
    manifest.complete(Stage::fit);

    in_stage(Stage::diagnose, [&] {
      write_diagnose_artifacts(out_dir, run_diagnose(catalog, fit, config));
      return 0;
    });
    manifest.complete(Stage::diagnose);

    const auto returns = in_stage(Stage::returns, [&] {
      auto r = run_returns(fit, config);
      write_returns_artifacts(out_dir, r);
      return r;
    });
    manifest.complete(Stage::returns);

    AnalysisReport report = in_stage(Stage::report, [&] {
      const Json returns_json = to_json(returns);
      std::optional<double> lag1_at_gap;
      for (const auto& p : sweep.curve.points) {
        if (p.gap_minutes == config.gap_minutes) lag1_at_gap = p.lag1_autocorrelation;
      }
      const Json ingest_json = to_json(ingested);

      Json inputs = Json::array();
      for (const auto& f : ingested.files) inputs.push_back({{"path", f.path}, {"sha256", f.sha256}});

      Json doc;
      doc["schema_version"] = kReportSchemaVersion;
      doc["tool"] = {{"name", "potflare"}, {"version", kToolVersion}};
      doc["generated_at"] = options.fixed_clock ? format_utc_minute(UtcMinute{0}) : utc_now();
      doc["catalog"] = {{"n_total_observations", catalog.n_total_observations},
                        {"n_events", catalog.events.size()},
                        {"n_excesses", fit.n_excesses},
                        {"span_start", ingest_json.at("span_start")},
                        {"span_end", ingest_json.at("span_end")},
                        {"span_years", catalog.span_years},
                        {"decluster_threshold", catalog.decluster_threshold},
                        {"gap_minutes", catalog.gap_minutes},
                        {"missing_policy", catalog.missing_policy}};
      doc["saturation"] = {{"saturated_runs_removed", ingest_json.at("saturated_runs_removed")},
                           {"removed_runs", ingest_json.at("removed_saturation_runs")},
                           {"retained_runs", ingest_json.at("retained_saturation_runs")},
                           {"policy", "saturated runs blanked to missing; sub-level minutes around them kept"}};
      doc["independence"] = {{"series", "event-peak-fluxes"},
                             {"raw_lag1_autocorrelation", optional_number(sweep.raw_lag1)},
                             {"gap_minutes", config.gap_minutes},
                             {"lag1_autocorrelation_at_gap", optional_number(lag1_at_gap)}};
      Json fit_json = to_json(fit);
      fit_json["threshold_x_class"] = x_class(fit.threshold);
      fit_json["scale_x_class"] = x_class(fit.params.scale);
      doc["fit"] = std::move(fit_json);
      doc["return_levels"] = {{"ci_level", config.ci_level},
                              {"ci_method", returns.curve.ci_method},
                              {"rows", returns_json.at("table")}};
      doc["scenarios"] = returns_json.at("scenarios");
      doc["artifacts"] = {{"ingest", "ingest.json"},       {"catalog_csv", "catalog.csv"}, {"catalog_json", "catalog.json"},
                          {"sweep_csv", "sweep.csv"},     {"sweep_json", "sweep.json"},   {"fit", "fit.json"},
                          {"excesses", "excesses.txt"},   {"mrl_csv", "mrl.csv"},         {"mrl_json", "mrl.json"},
                          {"probplot_csv", "probplot.csv"}, {"probplot_json", "probplot.json"},
                          {"returns_csv", "returns.csv"}, {"returns_json", "returns.json"}};
      if (config.write_series) doc["artifacts"]["series"] = "series.csv";
      doc["provenance"] = {{"config_sha256", sha256_hex(to_json(config).dump())},
                           {"inputs", std::move(inputs)},
                           {"tool_version", kToolVersion}};
      const auto path = out_dir / "report.json";
      write_json_file(path, doc);
      return AnalysisReport{std::move(doc), path};
    });
    manifest.complete(Stage::report);
    manifest.write(std::nullopt);
    return report;
  } catch (const StageError& e) {
    manifest.write(e);
    throw;
  }
}

}  // namespace potflare

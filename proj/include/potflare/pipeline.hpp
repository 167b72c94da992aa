#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "potflare/decluster.hpp"
#include "potflare/diagnostics.hpp"
#include "potflare/errors.hpp"
#include "potflare/gpd.hpp"
#include "potflare/ingest.hpp"
#include "potflare/io.hpp"
#include "potflare/returns.hpp"

namespace potflare {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

/// One flux file with its own ingest settings (per-satellite scaling).
struct InputSpec {
  std::filesystem::path path;
  IngestConfig ingest;
};

struct PipelineConfig {
  IngestConfig ingest;
  std::vector<InputSpec> inputs;
  double decluster_threshold{1e-4};
  int gap_minutes{15};
  double gpd_threshold{3.5e-4};
  double observations_per_year{kMinutesPerYear};
  double ci_level{0.95};
  std::size_t min_excesses{20};
  std::vector<int> sweep_gaps;
  std::size_t mrl_grid_points{200};
  double return_grid_min_years{1.0};
  double return_grid_max_years{1e5};
  int return_grid_per_decade{20};
  std::vector<double> report_years{10, 30, 100, 150, 500, 1e4};
  /// Levels (W m^-2) whose return periods are reported; X45 and X200.
  std::vector<double> scenario_levels{45e-4, 200e-4};
  /// Periods (years) whose return levels are reported.
  std::vector<double> scenario_years{150};
  /// Also write the cleaned minute series (large for multi-year input).
  bool write_series{false};

  PipelineConfig();
  /// Throws ConfigError on an inconsistent configuration.
  void validate() const;
};

/// Strict key-value document: unknown keys are rejected and omitted keys
/// keep their defaults. Relative input paths resolve against `base_dir`.
PipelineConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);
Json to_json(const PipelineConfig& config);
Json to_json(const IngestConfig& config);

enum class Stage { config, ingest, decluster, sweep, fit, diagnose, returns, report };

const char* stage_name(Stage stage);
/// Nonzero process exit status for a failure in `stage`.
int exit_code(Stage stage);

class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& what)
      : Error(std::string(stage_name(stage)) + ": " + what), stage_(stage) {}
  [[nodiscard]] Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

struct FileIngestSummary {
  std::string path;
  std::string sha256;
  std::int64_t n_samples{0};
  std::int64_t n_observations{0};
  std::size_t removed_saturation_runs{0};
  std::size_t retained_saturation_runs{0};
  std::vector<std::string> removed_dates;
};

struct IngestOutcome {
  FluxSeries series;
  std::vector<FileIngestSummary> files;
};

IngestOutcome run_ingest(const std::vector<InputSpec>& inputs);
Json to_json(const IngestOutcome& outcome);

EventCatalog run_decluster(const FluxSeries& series, const PipelineConfig& config);

struct SweepOutcome {
  GapSweepCurve curve;
  std::optional<double> raw_lag1;
};

SweepOutcome run_sweep(const FluxSeries& series, const PipelineConfig& config);
Json to_json(const SweepOutcome& outcome);

/// Excesses of catalog peaks over the GPD threshold, in time order.
std::vector<double> catalog_excesses(const EventCatalog& catalog, double gpd_threshold);

/// Fits the peaks above gpd_threshold with n_total from the catalog.
GpdFit run_fit(const EventCatalog& catalog, const PipelineConfig& config);

struct DiagnoseOutcome {
  MrlCurve mrl;
  ProbabilityPlot probplot;
};

/// MRL over all declustered peaks; probability plot of the fitted excesses.
DiagnoseOutcome run_diagnose(const EventCatalog& catalog, const GpdFit& fit, const PipelineConfig& config);

struct ReturnRow {
  double m_years{0.0};
  double level{0.0};
  bool sub_threshold{false};
  std::optional<ReturnLevelInterval> ci;
};

struct PeriodScenario {
  double level{0.0};
  double period_years{0.0};
  std::optional<double> ci_low_years;
  std::optional<double> ci_high_years;
};

struct ReturnsOutcome {
  ReturnLevelCurve curve;
  std::vector<ReturnRow> table;
  std::vector<PeriodScenario> period_scenarios;
  std::vector<ReturnRow> level_scenarios;
};

/// Curve over the configured grid (periods at or below the threshold period
/// are skipped), the report table, and scenario rows. CI fields are empty
/// when the fit has no covariance.
ReturnsOutcome run_returns(const GpdFit& fit, const PipelineConfig& config);
Json to_json(const ReturnsOutcome& outcome);

/// Flux in X-class units (multiples of 1e-4 W m^-2).
inline double x_class(double flux) { return flux / 1e-4; }

// Artifact writers shared by the subcommands and the full pipeline.
void write_ingest_artifacts(const std::filesystem::path& dir, const IngestOutcome& outcome, bool write_series);
void write_decluster_artifacts(const std::filesystem::path& dir, const EventCatalog& catalog);
void write_sweep_artifacts(const std::filesystem::path& dir, const SweepOutcome& outcome);
void write_fit_artifacts(const std::filesystem::path& dir, const GpdFit& fit, const std::vector<double>& excesses);
void write_diagnose_artifacts(const std::filesystem::path& dir, const DiagnoseOutcome& outcome);
void write_returns_artifacts(const std::filesystem::path& dir, const ReturnsOutcome& outcome);

struct RunOptions {
  /// Replace the wall-clock timestamp with the Unix epoch.
  bool fixed_clock{false};
};

struct AnalysisReport {
  Json document;
  std::filesystem::path path;
};

/// ingest -> decluster -> sweep -> fit -> diagnose -> returns -> report.
/// Writes every intermediate plus report.json and manifest.json to `out_dir`.
/// On failure writes a manifest of completed stages and throws StageError.
AnalysisReport run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir,
                            const RunOptions& options = {});

}  // namespace potflare

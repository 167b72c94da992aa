#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "potflare/time.hpp"

namespace potflare {

/// One minute-averaged 0.1-0.8 nm flux reading in W m^-2. A missing reading
/// is stored as NaN; a present reading is finite and non-negative.
struct FluxSample {
  static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

  UtcMinute time{};
  double flux{kMissing};

  [[nodiscard]] bool missing() const noexcept { return std::isnan(flux); }
};

/// Time-ordered minute-cadence flux samples.
///
/// Construction validates strict timestamp ordering and the flux invariant
/// and counts non-missing samples. The span defaults to the first and last
/// timestamps; an explicit span must contain every sample.
class FluxSeries {
 public:
  FluxSeries() = default;
  explicit FluxSeries(std::vector<FluxSample> samples);
  FluxSeries(std::vector<FluxSample> samples, UtcMinute span_start, UtcMinute span_end);

  [[nodiscard]] std::span<const FluxSample> samples() const noexcept { return samples_; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }
  [[nodiscard]] std::int64_t n_observations() const noexcept { return n_observations_; }
  [[nodiscard]] UtcMinute span_start() const noexcept { return span_start_; }
  [[nodiscard]] UtcMinute span_end() const noexcept { return span_end_; }
  /// Inclusive span length in minutes; zero for an empty series.
  [[nodiscard]] std::int64_t span_minutes() const noexcept;

  /// Releases the sample buffer to the caller.
  [[nodiscard]] std::vector<FluxSample> take_samples() && { return std::move(samples_); }

  friend bool operator==(const FluxSeries& a, const FluxSeries& b);

 private:
  void validate();

  std::vector<FluxSample> samples_;
  UtcMinute span_start_{};
  UtcMinute span_end_{};
  std::int64_t n_observations_{0};
};

struct IngestConfig {
  double scaling_divisor{0.7};
  double saturation_level{17e-4};
  std::vector<std::chrono::year_month_day> retained_saturation_events{
      std::chrono::year{2003} / std::chrono::October / 28};
  std::vector<double> missing_sentinels{-99999.0};

  /// Throws DomainError on a non-positive divisor or saturation level.
  void validate() const;
};

/// Reads the `timestamp,flux_wm2` CSV. An empty flux field or a sentinel
/// value maps to a missing sample.
FluxSeries parse_flux_csv(std::istream& source, const IngestConfig& config);
FluxSeries read_flux_csv(const std::filesystem::path& path, const IngestConfig& config);

/// Writes the same CSV format, missing samples as empty fields.
void write_flux_csv(std::ostream& out, const FluxSeries& series);
void write_flux_csv(const std::filesystem::path& path, const FluxSeries& series);

/// Divides every present flux by `divisor`.
FluxSeries apply_scaling(const FluxSeries& series, double divisor);

struct SaturationResult {
  FluxSeries series;
  std::size_t removed_runs{0};
  std::size_t retained_runs{0};
  std::vector<std::chrono::year_month_day> removed_dates;
};

/// Blanks every contiguous run of samples at or above the saturation level
/// unless the run starts on a retained date. A run is broken by any
/// sub-level, missing, or absent minute.
SaturationResult filter_saturation(const FluxSeries& series, const IngestConfig& config);

/// Parse, scale and saturation-filter one file.
struct IngestResult {
  FluxSeries series;
  std::size_t removed_saturation_runs{0};
  std::size_t retained_saturation_runs{0};
  std::vector<std::chrono::year_month_day> removed_dates;
};

IngestResult ingest_file(const std::filesystem::path& path, const IngestConfig& config);
IngestResult ingest_stream(std::istream& source, const IngestConfig& config);

/// Concatenates series in the given order and re-validates ordering.
FluxSeries concatenate(std::vector<FluxSeries> parts);

struct SynthParams {
  double scale{3e-4};
  double shape{0.25};
  double event_rate{6.0};           // events per year
  double cluster_length_mean{10.0};  // minutes
  double duration_years{30.0};
  std::uint64_t seed{1};

  /// Event peaks are base_threshold + GPD(scale, shape) excesses.
  double base_threshold{3.5e-4};
  /// Cluster minutes stay at or above this level except for dips.
  double activity_floor{1e-4};
  /// Probability that a non-peak cluster minute dips below the floor.
  double dip_probability{0.3};
  /// Quiet minutes enforced between consecutive clusters.
  std::int64_t min_separation{60};
  UtcMinute start{make_utc_minute(1986, 1, 1)};
};

/// Deterministic synthetic minute series with clustered GPD flare peaks.
///
/// Event starts follow exponential waiting times at `event_rate` plus the
/// enforced separation. Each cluster lasts a geometric number of minutes
/// with the given mean; the peak minute carries the GPD draw and every other
/// minute either dips below the floor or sits at floor + f*(peak - floor)
/// with f uniform in [0.6, 1). Background minutes are log-uniform between
/// 1e-3 and 0.5 of the floor.
FluxSeries synth_clustered_series(const SynthParams& params);

}  // namespace potflare

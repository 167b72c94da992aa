#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "potflare/ingest.hpp"
#include "potflare/time.hpp"

namespace potflare {

/// One declustered flare: the maximum of a run cluster.
struct FlareEvent {
  UtcMinute peak_time{};
  double peak_flux{0.0};
  UtcMinute cluster_start{};
  UtcMinute cluster_end{};
  /// Number of samples at or above the threshold inside the cluster.
  std::int64_t cluster_sample_count{0};

  friend bool operator==(const FlareEvent&, const FlareEvent&) = default;
};

/// How missing minutes are treated inside a closing gap window.
inline constexpr const char* kMissingPolicy = "missing-counts-as-quiet";

struct EventCatalog {
  std::vector<FlareEvent> events;
  double decluster_threshold{1e-4};
  int gap_minutes{15};
  std::int64_t n_total_observations{0};
  double span_years{0.0};
  std::string missing_policy{kMissingPolicy};

  [[nodiscard]] std::vector<double> peak_fluxes() const;
};

/// Runs declustering.
///
/// A cluster opens at the first sample >= threshold and closes once
/// `gap_minutes` consecutive quiet minutes follow its last exceedance; an
/// exceedance inside the window resets the count. Quiet minutes are samples
/// below the threshold, missing samples, and minutes absent from the grid.
/// A cluster still open at the end of the series is closed there. Each
/// cluster yields its first maximum.
EventCatalog decluster(const FluxSeries& series, double threshold = 1e-4, int gap_minutes = 15);

/// r1 = sum (x_t - m)(x_{t+1} - m) / sum (x_t - m)^2 with m the full-sample mean.
double lag1_autocorrelation(std::span<const double> values);

/// lag1_autocorrelation of the present fluxes in time order (missing dropped).
double raw_lag1_autocorrelation(const FluxSeries& series);

struct GapSweepPoint {
  int gap_minutes{0};
  /// Absent when fewer than three events or zero variance.
  std::optional<double> lag1_autocorrelation;
  std::int64_t event_count{0};
};

struct GapSweepCurve {
  std::vector<GapSweepPoint> points;
};

/// Lag-1 autocorrelation of the time-ordered event peak fluxes as a function
/// of the declustering gap.
GapSweepCurve gap_sweep(const FluxSeries& series, double threshold, std::span<const int> gaps);

}  // namespace potflare

#include "potflare/decluster.hpp"

#include <cmath>
#include <numeric>

#include "potflare/errors.hpp"

namespace potflare {

std::vector<double> EventCatalog::peak_fluxes() const {
  std::vector<double> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(e.peak_flux);
  return out;
}

EventCatalog decluster(const FluxSeries& series, double threshold, int gap_minutes) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) throw DomainError("decluster: threshold must be positive");
  if (gap_minutes < 1) throw DomainError("decluster: gap_minutes must be at least 1");

  EventCatalog catalog;
  catalog.decluster_threshold = threshold;
  catalog.gap_minutes = gap_minutes;
  catalog.n_total_observations = series.n_observations();
  catalog.span_years = static_cast<double>(series.span_minutes()) / kMinutesPerYear;

  bool open = false;
  FlareEvent current;
  std::int64_t quiet = 0;
  std::optional<UtcMinute> previous;

  auto close = [&] {
    catalog.events.push_back(current);
    open = false;
    quiet = 0;
  };
  auto add_quiet = [&](std::int64_t minutes) {
    if (!open) return;
    quiet += minutes;
    if (quiet >= gap_minutes) close();
  };

  for (const auto& s : series.samples()) {
    if (previous) add_quiet(s.time - *previous - 1);
    previous = s.time;

    if (!s.missing() && s.flux >= threshold) {
      if (!open) {
        open = true;
        current = FlareEvent{s.time, s.flux, s.time, s.time, 0};
      } else if (s.flux > current.peak_flux) {
        current.peak_time = s.time;
        current.peak_flux = s.flux;
      }
      current.cluster_end = s.time;
      ++current.cluster_sample_count;
      quiet = 0;
    } else {
      add_quiet(1);
    }
  }
  if (open) close();
  return catalog;
}

double lag1_autocorrelation(std::span<const double> values) {
  if (values.size() < 3) throw InsufficientDataError("lag1_autocorrelation: need at least 3 values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double denom = 0.0;
  for (double x : values) denom += (x - mean) * (x - mean);
  if (!(denom > 0.0)) throw ZeroVarianceError("lag1_autocorrelation: zero variance");
  double num = 0.0;
  for (std::size_t t = 0; t + 1 < values.size(); ++t) num += (values[t] - mean) * (values[t + 1] - mean);
  return num / denom;
}

double raw_lag1_autocorrelation(const FluxSeries& series) {
  std::vector<double> present;
  present.reserve(static_cast<std::size_t>(series.n_observations()));
  for (const auto& s : series.samples()) {
    if (!s.missing()) present.push_back(s.flux);
  }
  return lag1_autocorrelation(present);
}

GapSweepCurve gap_sweep(const FluxSeries& series, double threshold, std::span<const int> gaps) {
  if (gaps.empty()) throw DomainError("gap_sweep: no gaps given");
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (gaps[i] < 1) throw DomainError("gap_sweep: gaps must be at least 1");
    if (i > 0 && gaps[i] <= gaps[i - 1]) throw DomainError("gap_sweep: gaps must be strictly increasing");
  }
  GapSweepCurve curve;
  for (int gap : gaps) {
    const auto catalog = decluster(series, threshold, gap);
    GapSweepPoint point{gap, std::nullopt, static_cast<std::int64_t>(catalog.events.size())};
    if (catalog.events.size() >= 3) {
      try {
        point.lag1_autocorrelation = lag1_autocorrelation(catalog.peak_fluxes());
      } catch (const ZeroVarianceError&) {
      }
    }
    curve.points.push_back(point);
  }
  return curve;
}

}  // namespace potflare

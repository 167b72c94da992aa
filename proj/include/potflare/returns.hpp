#pragma once

#include <span>
#include <string>
#include <vector>

#include "potflare/gpd.hpp"
#include "potflare/time.hpp"

namespace potflare {

struct ObservationCalendar {
  /// Observations per year.
  double d{kMinutesPerYear};

  void validate() const;
};

struct ReturnLevel {
  double level{0.0};
  /// Set when the period is shorter than the mean waiting time between
  /// exceedances (m*d*n_c/n < 1), so the level lies below the threshold.
  bool sub_threshold{false};
};

/// m-year return level x_m = u + (scale/shape)[(m*d*n_c/n)^shape - 1].
ReturnLevel return_level(const GpdFit& fit, double m_years, const ObservationCalendar& cal = {});

/// Inverse of return_level: years until `level` is expected to be exceeded once.
/// Throws DomainError for level <= u and InfiniteReturnError at or beyond a
/// finite upper endpoint.
double return_period(const GpdFit& fit, double level, const ObservationCalendar& cal = {});

/// Period at which the return level equals the threshold, n/(d*n_c).
double threshold_period(const GpdFit& fit, const ObservationCalendar& cal = {});

struct CiOptions {
  double ci_level{0.95};
  /// Adds Var(zeta) = zeta(1 - zeta)/n for the exceedance rate.
  bool include_rate_uncertainty{true};
};

struct ReturnLevelInterval {
  double level{0.0};
  double std_error{0.0};
  /// level -/+ z*se
  double low{0.0};
  double high{0.0};
  /// Same delta-method variance on the log(x_m - u) scale; stays above u.
  /// Equal to the symmetric bounds below threshold.
  double log_low{0.0};
  double log_high{0.0};
};

/// Delta-method interval over (zeta, scale, shape) with zeta = n_c/n.
/// Throws CiUnavailableError when the fit has no covariance.
ReturnLevelInterval return_level_ci(const GpdFit& fit, double m_years, const ObservationCalendar& cal = {},
                                    const CiOptions& options = {});

struct ReturnPeriodInterval {
  double period{0.0};
  /// Periods where the upper and lower preferred return-level bounds cross
  /// `level`. `high` is +inf when the lower bound never reaches it.
  double low{0.0};
  double high{0.0};
};

ReturnPeriodInterval return_period_ci(const GpdFit& fit, double level, const ObservationCalendar& cal = {},
                                      const CiOptions& options = {});

struct ReturnCurvePoint {
  double m_years{0.0};
  double level{0.0};
  double ci_low{0.0};
  double ci_high{0.0};
  double symmetric_low{0.0};
  double symmetric_high{0.0};
};

struct ReturnLevelCurve {
  std::vector<ReturnCurvePoint> points;
  double ci_level{0.95};
  /// ci_low/ci_high come from the log-excess delta interval.
  std::string ci_method{"delta-log-excess"};
};

/// Requires an increasing grid with every m above threshold_period.
ReturnLevelCurve return_curve(const GpdFit& fit, std::span<const double> m_grid, const ObservationCalendar& cal = {},
                              const CiOptions& options = {});

/// Log-spaced grid from `lo` to `hi` years, `per_decade` points per decade.
std::vector<double> default_m_grid(double lo = 1.0, double hi = 1e5, int per_decade = 20);

}  // namespace potflare

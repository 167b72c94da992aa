#include "potflare/returns.hpp"

#include <cmath>
#include <limits>

#include "potflare/diagnostics.hpp"
#include "potflare/errors.hpp"

namespace potflare {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxSearchYears = 1e12;

// Exceedances per year, d*n_c/n.
double annual_rate(const GpdFit& fit, const ObservationCalendar& cal) {
  cal.validate();
  fit.params.validate();
  if (fit.n_excesses <= 0 || fit.n_total < fit.n_excesses) throw DomainError("fit has inconsistent exceedance counts");
  return cal.d * static_cast<double>(fit.n_excesses) / static_cast<double>(fit.n_total);
}

// expm1(shape*L)/shape and its derivative in shape.
double growth(double L, double shape) {
  if (std::abs(shape) < kShapeSwitchTolerance) return L * (1.0 + shape * L / 2.0 + shape * shape * L * L / 6.0);
  return std::expm1(shape * L) / shape;
}

double growth_dshape(double L, double shape) {
  if (std::abs(shape * L) < 1e-4) return L * L * (0.5 + shape * L / 3.0 + shape * shape * L * L / 8.0);
  return (L * std::exp(shape * L) * shape - std::expm1(shape * L)) / (shape * shape);
}

}  // namespace

void ObservationCalendar::validate() const {
  if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("observations per year must be positive");
}

double threshold_period(const GpdFit& fit, const ObservationCalendar& cal) { return 1.0 / annual_rate(fit, cal); }

ReturnLevel return_level(const GpdFit& fit, double m_years, const ObservationCalendar& cal) {
  if (!(m_years > 0.0) || !std::isfinite(m_years)) throw DomainError("return_level: m must be positive");
  const double L = std::log(m_years * annual_rate(fit, cal));
  return {fit.threshold + fit.params.scale * growth(L, fit.params.shape), L < 0.0};
}

double return_period(const GpdFit& fit, double level, const ObservationCalendar& cal) {
  const double rate = annual_rate(fit, cal);
  if (!(level > fit.threshold)) throw DomainError("return_period: level must exceed the threshold");
  const double excess = level - fit.threshold;
  if (excess >= fit.params.upper_endpoint()) {
    throw InfiniteReturnError("return_period: level is at or beyond the model's upper endpoint");
  }
  const double z = excess / fit.params.scale;
  const double xi = fit.params.shape;
  const double hazard = std::abs(xi) < kShapeSwitchTolerance ? z * (1.0 - xi * z / 2.0 + xi * xi * z * z / 3.0)
                                                             : std::log1p(xi * z) / xi;
  return std::exp(hazard) / rate;
}

ReturnLevelInterval return_level_ci(const GpdFit& fit, double m_years, const ObservationCalendar& cal,
                                    const CiOptions& options) {
  const double z_crit = two_sided_z(options.ci_level);
  if (!fit.covariance) throw CiUnavailableError("return_level_ci: fit has no covariance matrix");
  const auto level = return_level(fit, m_years, cal);

  const double zeta = static_cast<double>(fit.n_excesses) / static_cast<double>(fit.n_total);
  if (!(zeta > 0.0 && zeta <= 1.0)) throw DomainError("return_level_ci: exceedance probability outside (0, 1]");
  const double sigma = fit.params.scale;
  const double xi = fit.params.shape;
  const double L = std::log(m_years * cal.d * zeta);

  const double g_zeta = sigma * std::exp(xi * L) / zeta;
  const double g_sigma = growth(L, xi);
  const double g_xi = sigma * growth_dshape(L, xi);

  const auto& c = *fit.covariance;
  double var = g_sigma * g_sigma * c[0] + 2.0 * g_sigma * g_xi * c[1] + g_xi * g_xi * c[3];
  if (options.include_rate_uncertainty) {
    var += g_zeta * g_zeta * zeta * (1.0 - zeta) / static_cast<double>(fit.n_total);
  }
  ReturnLevelInterval out;
  out.level = level.level;
  out.std_error = std::sqrt(std::max(var, 0.0));
  out.low = out.level - z_crit * out.std_error;
  out.high = out.level + z_crit * out.std_error;
  const double excess = out.level - fit.threshold;
  if (excess > 0.0) {
    const double spread = z_crit * out.std_error / excess;
    out.log_low = fit.threshold + excess * std::exp(-spread);
    out.log_high = fit.threshold + excess * std::exp(spread);
  } else {
    out.log_low = out.low;
    out.log_high = out.high;
  }
  return out;
}

ReturnPeriodInterval return_period_ci(const GpdFit& fit, double level, const ObservationCalendar& cal,
                                      const CiOptions& options) {
  ReturnPeriodInterval out;
  out.period = return_period(fit, level, cal);
  const double m0 = threshold_period(fit, cal);

  // Each bound: walk geometrically outward from the point estimate until the
  // band crosses `level`, then bisect.
  auto bisect = [&](auto above, double below_m, double above_m) {
    for (int i = 0; i < 200 && std::abs(above_m / below_m - 1.0) > 1e-13; ++i) {
      const double mid = std::sqrt(below_m * above_m);
      (above(mid) ? above_m : below_m) = mid;
    }
    return above_m;
  };

  auto upper_reaches = [&](double m) { return return_level_ci(fit, m, cal, options).log_high >= level; };
  double hi = out.period;
  double lo = hi;
  for (;;) {
    lo = std::max(lo / 1.5, m0 * (1.0 + 1e-9));
    if (!upper_reaches(lo)) break;
    if (lo <= m0 * (1.0 + 1e-9)) break;
    hi = lo;
  }
  out.low = upper_reaches(lo) ? lo : bisect(upper_reaches, lo, hi);

  auto lower_reaches = [&](double m) { return return_level_ci(fit, m, cal, options).log_low >= level; };
  lo = out.period;
  hi = lo;
  out.high = kInf;
  while (hi * 1.5 <= kMaxSearchYears) {
    hi *= 1.5;
    if (lower_reaches(hi)) {
      out.high = bisect(lower_reaches, lo, hi);
      break;
    }
    lo = hi;
  }
  return out;
}

ReturnLevelCurve return_curve(const GpdFit& fit, std::span<const double> m_grid, const ObservationCalendar& cal,
                              const CiOptions& options) {
  const double m0 = threshold_period(fit, cal);
  ReturnLevelCurve curve;
  curve.ci_level = options.ci_level;
  for (std::size_t i = 0; i < m_grid.size(); ++i) {
    if (i > 0 && !(m_grid[i] > m_grid[i - 1])) throw DomainError("return_curve: m grid must be increasing");
    if (!(m_grid[i] > m0)) throw DomainError("return_curve: grid periods must exceed the threshold period");
    const auto ci = return_level_ci(fit, m_grid[i], cal, options);
    curve.points.push_back({m_grid[i], ci.level, ci.log_low, ci.log_high, ci.low, ci.high});
  }
  return curve;
}

std::vector<double> default_m_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi > lo) || per_decade < 1) throw DomainError("default_m_grid: invalid bounds");
  const double decades = std::log10(hi / lo);
  const int steps = static_cast<int>(std::ceil(decades * per_decade - 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) grid.push_back(lo * std::pow(10.0, decades * i / steps));
  grid.back() = hi;
  return grid;
}

}  // namespace potflare

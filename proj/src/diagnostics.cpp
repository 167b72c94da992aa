#include "potflare/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <boost/math/distributions/normal.hpp>

#include "potflare/errors.hpp"

namespace potflare {

double two_sided_z(double ci_level) {
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw DomainError("ci_level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>{}, 0.5 + ci_level / 2.0);
}

MrlCurve mean_excess_curve(std::span<const double> peaks, std::span<const double> u_grid, double ci_level) {
  if (peaks.empty()) throw InsufficientDataError("mean_excess_curve: no peaks");
  for (std::size_t i = 1; i < u_grid.size(); ++i) {
    if (!(u_grid[i] > u_grid[i - 1])) throw DomainError("mean_excess_curve: u_grid must be strictly increasing");
  }
  const double z = two_sided_z(ci_level);

  MrlCurve curve;
  curve.ci_level = ci_level;
  for (double u0 : u_grid) {
    std::int64_t n = 0;
    double sum = 0.0;
    for (double x : peaks) {
      if (x > u0) {
        ++n;
        sum += x - u0;
      }
    }
    if (n < 2) continue;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double x : peaks) {
      if (x > u0) ss += (x - u0 - mean) * (x - u0 - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    curve.points.push_back({u0, mean, z * sd / std::sqrt(static_cast<double>(n)), n});
  }
  return curve;
}

std::vector<double> default_u_grid(std::span<const double> peaks, double lower, std::size_t count) {
  if (peaks.size() < 3) throw InsufficientDataError("default_u_grid: need at least 3 peaks");
  if (count < 2) throw DomainError("default_u_grid: need at least 2 grid points");
  std::vector<double> sorted(peaks.begin(), peaks.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double upper = sorted[2];
  if (!(upper > lower)) throw InsufficientDataError("default_u_grid: third-largest peak is not above the lower bound");
  std::vector<double> grid(count);
  const double step = (upper - lower) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) grid[i] = lower + step * static_cast<double>(i);
  grid.back() = upper;
  return grid;
}

double mrl_slope(const MrlCurve& curve) {
  const auto& pts = curve.points;
  if (pts.size() < 2) throw InsufficientDataError("mrl_slope: need at least 2 points");
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.u0;
    my += p.mean_excess;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : pts) {
    sxy += (p.u0 - mx) * (p.mean_excess - my);
    sxx += (p.u0 - mx) * (p.u0 - mx);
  }
  return sxy / sxx;
}

ProbabilityPlot probability_plot(const GpdFit& fit, std::span<const double> excesses) {
  if (excesses.empty()) throw InsufficientDataError("probability_plot: no excesses");
  fit.params.validate();
  std::vector<double> sorted(excesses.begin(), excesses.end());
  std::stable_sort(sorted.begin(), sorted.end());

  ProbabilityPlot plot;
  const double k1 = static_cast<double>(sorted.size() + 1);
  plot.points.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const ProbabilityPoint p{static_cast<double>(i + 1) / k1, gpd_cdf(sorted[i], fit.params)};
    plot.max_abs_deviation_from_diagonal = std::max(plot.max_abs_deviation_from_diagonal, std::abs(p.model - p.empirical));
    plot.points.push_back(p);
  }
  return plot;
}

}  // namespace potflare

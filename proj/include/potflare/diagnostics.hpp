#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "potflare/gpd.hpp"

namespace potflare {

/// Two-sided standard-normal critical value, e.g. 1.959964 for 0.95.
double two_sided_z(double ci_level);

struct MrlPoint {
  double u0{0.0};
  double mean_excess{0.0};
  double ci_halfwidth{0.0};
  std::int64_t n_exceed{0};
};

/// Mean-residual-life (mean exceedance) curve.
struct MrlCurve {
  std::vector<MrlPoint> points;
  double ci_level{0.95};
};

/// Mean of (x - u0) over x > u0 for each grid threshold, with a normal
/// z*s/sqrt(n) band. Thresholds with fewer than two exceedances are omitted.
MrlCurve mean_excess_curve(std::span<const double> peaks, std::span<const double> u_grid, double ci_level = 0.95);

/// `count` evenly spaced thresholds from `lower` to the third-largest peak.
std::vector<double> default_u_grid(std::span<const double> peaks, double lower, std::size_t count = 200);

/// Ordinary least-squares slope of mean excess against threshold.
double mrl_slope(const MrlCurve& curve);

struct ProbabilityPoint {
  double empirical{0.0};
  double model{0.0};
};

struct ProbabilityPlot {
  std::vector<ProbabilityPoint> points;
  double max_abs_deviation_from_diagonal{0.0};
};

/// Points (i/(k+1), H(y_(i))) for the sorted excesses under the fitted model.
ProbabilityPlot probability_plot(const GpdFit& fit, std::span<const double> excesses);

}  // namespace potflare

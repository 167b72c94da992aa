#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "potflare/errors.hpp"

namespace potflare {

/// Below this |shape| the exponential limit (with a first-order series
/// correction) replaces the general formulas.
inline constexpr double kShapeSwitchTolerance = 1e-6;

/// Generalized Pareto distribution of threshold excesses.
///
/// `scale` is the effective scale at the threshold. Support is y >= 0, and
/// additionally y < -scale/shape when shape < 0.
struct GpdParams {
  double scale{1.0};
  double shape{0.0};

  /// Throws DomainError unless scale is finite and positive and shape finite.
  void validate() const;
  /// Upper end of the support; +inf when shape >= 0.
  [[nodiscard]] double upper_endpoint() const;

  friend bool operator==(const GpdParams&, const GpdParams&) = default;
};

/// H(y) = 1 - (1 + shape*y/scale)^(-1/shape).
double gpd_cdf(double y, const GpdParams& params);

/// Inverse of gpd_cdf on [0, 1).
double gpd_quantile(double p, const GpdParams& params);

/// Log-likelihood of the excesses. Returns -inf when an excess lies outside
/// the support of `params`.
double gpd_loglik(std::span<const double> excesses, const GpdParams& params);

/// Inverse-transform draws through gpd_quantile; deterministic in `seed`.
std::vector<double> gpd_sample(const GpdParams& params, std::size_t count, std::uint64_t seed);

struct FitOptions {
  /// Reported threshold u; the fit itself only sees excesses.
  double threshold{0.0};
  /// Total observation count n; defaults to the number of excesses.
  std::optional<std::int64_t> n_total;
  std::size_t min_excesses{20};
  /// Pins the shape (0 gives the exponential sub-model).
  std::optional<double> fixed_shape;
  int max_iterations{5000};
};

struct ConvergenceInfo {
  int iterations{0};
  int evaluations{0};
  int restarts{0};
  /// Relative simplex diameter at termination.
  double simplex_size{0.0};
  bool converged{false};
};

struct GpdFit {
  double threshold{0.0};
  GpdParams params;
  /// Row-major covariance over (scale, shape); absent when the observed
  /// information is not positive definite.
  std::optional<std::array<double, 4>> covariance;
  std::optional<std::array<double, 2>> std_errors;
  std::int64_t n_excesses{0};
  std::int64_t n_total{0};
  double log_likelihood{0.0};
  ConvergenceInfo convergence;
};

/// Thrown when no start point converges within the iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, ConvergenceInfo info) : Error(what), info_(info) {}
  [[nodiscard]] const ConvergenceInfo& info() const noexcept { return info_; }

 private:
  ConvergenceInfo info_;
};

/// Maximum-likelihood fit of a GPD to threshold excesses.
///
/// Maximizes over (log scale, shape) with Nelder-Mead, starting from
/// (mean excess, 0.1) and falling back to a 3x3 grid of start points. The
/// covariance is the inverse of the observed information, computed by
/// central differences in (scale, shape) at the optimum.
GpdFit fit_gpd(std::span<const double> excesses, const FitOptions& options = {});

/// Observed information (negative Hessian of the log-likelihood) at `params`,
/// row-major over (scale, shape), by central differences. Entries are NaN
/// when a stencil point leaves the support.
std::array<double, 4> observed_information(std::span<const double> excesses, const GpdParams& params);

/// Model mean excess over u0 >= threshold: (scale + shape*(u0 - u)) / (1 - shape).
/// Requires shape < 1.
double model_mean_excess(const GpdFit& fit, double u0);

/// Excesses x - threshold for every x strictly above threshold, in input order.
std::vector<double> excesses_over(std::span<const double> values, double threshold);

}  // namespace potflare

#include "potflare/gpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "potflare/nelder_mead.hpp"
#include "potflare/random.hpp"

namespace potflare {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool near_zero_shape(double shape) { return std::abs(shape) < kShapeSwitchTolerance; }

// Cumulative hazard -log(1 - H) in units of the scale.
double cumulative_hazard(double z, double shape) {
  if (near_zero_shape(shape)) return z * (1.0 - shape * z / 2.0 + shape * shape * z * z / 3.0);
  return std::log1p(shape * z) / shape;
}

void check_excesses(std::span<const double> excesses) {
  for (double y : excesses) {
    if (!(y >= 0.0) || !std::isfinite(y)) throw DomainError("excesses must be finite and non-negative");
  }
}

}  // namespace

void GpdParams::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("GPD scale must be finite and positive");
  if (!std::isfinite(shape)) throw DomainError("GPD shape must be finite");
}

double GpdParams::upper_endpoint() const {
  return shape < 0.0 ? -scale / shape : kInf;
}

double gpd_cdf(double y, const GpdParams& params) {
  params.validate();
  if (std::isnan(y)) throw DomainError("gpd_cdf: y is NaN");
  if (y <= 0.0) return 0.0;
  if (y >= params.upper_endpoint()) return 1.0;
  return -std::expm1(-cumulative_hazard(y / params.scale, params.shape));
}

double gpd_quantile(double p, const GpdParams& params) {
  params.validate();
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("gpd_quantile: p must lie in [0, 1)");
  if (p == 0.0) return 0.0;
  const double hazard = -std::log1p(-p);
  const double xi = params.shape;
  if (near_zero_shape(xi)) {
    return params.scale * hazard * (1.0 + xi * hazard / 2.0 + xi * xi * hazard * hazard / 6.0);
  }
  return params.scale * std::expm1(xi * hazard) / xi;
}

double gpd_loglik(std::span<const double> excesses, const GpdParams& params) {
  params.validate();
  if (excesses.empty()) throw InsufficientDataError("gpd_loglik: no excesses");
  check_excesses(excesses);

  const double xi = params.shape;
  const double inv_scale = 1.0 / params.scale;
  double acc = 0.0;
  if (near_zero_shape(xi)) {
    // (1 + 1/xi) log1p(xi z) expanded to second order in xi.
    for (double y : excesses) {
      const double z = y * inv_scale;
      acc += z + xi * (z - z * z / 2.0) + xi * xi * (z * z * z / 3.0 - z * z / 2.0);
    }
  } else {
    const double power = 1.0 + 1.0 / xi;
    for (double y : excesses) {
      const double w = xi * y * inv_scale;
      if (!(w > -1.0)) return -kInf;
      acc += power * std::log1p(w);
    }
  }
  return -static_cast<double>(excesses.size()) * std::log(params.scale) - acc;
}

std::vector<double> gpd_sample(const GpdParams& params, std::size_t count, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(gpd_quantile(rng.uniform(), params));
  return out;
}

std::array<double, 4> observed_information(std::span<const double> excesses, const GpdParams& params) {
  const std::array<double, 2> theta{params.scale, params.shape};
  const std::array<double, 2> h{1e-5 * params.scale, 1e-5 * std::max(std::abs(params.shape), 1.0)};
  auto ll = [&](double ds, double dx) {
    const GpdParams p{theta[0] + ds, theta[1] + dx};
    if (!(p.scale > 0.0)) return -kInf;
    return gpd_loglik(excesses, p);
  };
  auto shift = [&](int i, double d) { return i == 0 ? std::array<double, 2>{d, 0.0} : std::array<double, 2>{0.0, d}; };

  const double center = ll(0.0, 0.0);
  std::array<double, 4> info{};
  for (int i = 0; i < 2; ++i) {
    const auto up = shift(i, h[i]);
    const auto down = shift(i, -h[i]);
    const double d2 = (ll(up[0], up[1]) - 2.0 * center + ll(down[0], down[1])) / (h[i] * h[i]);
    info[i * 3] = -d2;
  }
  const double mixed = (ll(h[0], h[1]) - ll(h[0], -h[1]) - ll(-h[0], h[1]) + ll(-h[0], -h[1])) / (4.0 * h[0] * h[1]);
  info[1] = info[2] = -mixed;
  for (double& v : info) {
    if (!std::isfinite(v)) v = std::numeric_limits<double>::quiet_NaN();
  }
  return info;
}

GpdFit fit_gpd(std::span<const double> excesses, const FitOptions& options) {
  if (excesses.size() < options.min_excesses || excesses.empty()) {
    throw InsufficientDataError("fit_gpd: need at least " + std::to_string(std::max<std::size_t>(options.min_excesses, 1)) +
                                " excesses, got " + std::to_string(excesses.size()));
  }
  check_excesses(excesses);
  const double k = static_cast<double>(excesses.size());
  const double mean = std::accumulate(excesses.begin(), excesses.end(), 0.0) / k;
  if (!(mean > 0.0)) throw InsufficientDataError("fit_gpd: all excesses are zero");
  const std::int64_t n_total = options.n_total.value_or(static_cast<std::int64_t>(excesses.size()));
  if (n_total < static_cast<std::int64_t>(excesses.size())) throw DomainError("fit_gpd: n_total is smaller than the excess count");

  const bool pinned = options.fixed_shape.has_value();
  // Shapes at or below -1 make the likelihood unbounded near the endpoint.
  auto negative_ll = [&](const std::vector<double>& v) {
    const double shape = pinned ? *options.fixed_shape : v[1];
    if (shape <= -1.0) return kInf;
    return -gpd_loglik(excesses, GpdParams{std::exp(v[0]), shape});
  };

  NelderMeadOptions nm;
  nm.max_iterations = options.max_iterations;

  std::vector<std::array<double, 2>> starts{{mean, 0.1}};
  for (double s : {0.5, 1.0, 2.0}) {
    for (double xi : {-0.2, 0.1, 0.5}) starts.push_back({mean * s, xi});
  }

  std::optional<NelderMeadResult> best;
  ConvergenceInfo last;
  int attempts = 0;
  for (const auto& [s0, xi0] : starts) {
    ++attempts;
    const auto r = pinned ? nelder_mead(negative_ll, {std::log(s0)}, {0.1}, nm)
                          : nelder_mead(negative_ll, {std::log(s0), xi0}, {0.1, 0.1}, nm);
    last = {r.iterations, r.evaluations, r.restarts, r.simplex_size, r.converged};
    if (r.converged && std::isfinite(r.value)) {
      // The primary start wins outright; grid retries keep the best optimum.
      if (!best || r.value < best->value) best = r;
      if (attempts == 1) break;
    }
  }
  if (!best) throw ConvergenceError("fit_gpd: no start point converged", last);

  GpdFit fit;
  fit.threshold = options.threshold;
  fit.params = {std::exp(best->x[0]), pinned ? *options.fixed_shape : best->x[1]};
  fit.n_excesses = static_cast<std::int64_t>(excesses.size());
  fit.n_total = n_total;
  fit.log_likelihood = -best->value;
  fit.convergence = {best->iterations, best->evaluations, best->restarts, best->simplex_size, true};

  const auto info = observed_information(excesses, fit.params);
  if (pinned) {
    if (info[0] > 0.0) {
      fit.covariance = std::array<double, 4>{1.0 / info[0], 0.0, 0.0, 0.0};
    }
  } else {
    const double det = info[0] * info[3] - info[1] * info[2];
    if (info[0] > 0.0 && det > 0.0) {
      fit.covariance = std::array<double, 4>{info[3] / det, -info[1] / det, -info[2] / det, info[0] / det};
    }
  }
  if (fit.covariance) {
    const auto& c = *fit.covariance;
    fit.std_errors = std::array<double, 2>{std::sqrt(c[0]), std::sqrt(c[3])};
  }
  return fit;
}

double model_mean_excess(const GpdFit& fit, double u0) {
  if (!(fit.params.shape < 1.0)) throw DomainError("model_mean_excess: mean excess is infinite for shape >= 1");
  if (u0 < fit.threshold) throw DomainError("model_mean_excess: u0 below the fit threshold");
  return (fit.params.scale + fit.params.shape * (u0 - fit.threshold)) / (1.0 - fit.params.shape);
}

std::vector<double> excesses_over(std::span<const double> values, double threshold) {
  std::vector<double> out;
  for (double x : values) {
    if (x > threshold) out.push_back(x - threshold);
  }
  return out;
}

}  // namespace potflare

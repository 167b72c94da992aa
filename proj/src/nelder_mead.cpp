#include "potflare/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "potflare/errors.hpp"

namespace potflare {
namespace {

// Standard coefficients: reflection, expansion, contraction, shrink.
constexpr double kAlpha = 1.0;
constexpr double kGamma = 2.0;
constexpr double kRho = 0.5;
constexpr double kSigma = 0.5;

struct Vertex {
  std::vector<double> x;
  double f;
};

double relative_size(const std::vector<Vertex>& simplex) {
  const auto& best = simplex.front().x;
  double scale = 1.0;
  for (double v : best) scale = std::max(scale, std::abs(v));
  double size = 0.0;
  for (std::size_t i = 1; i < simplex.size(); ++i) {
    for (std::size_t j = 0; j < best.size(); ++j) {
      size = std::max(size, std::abs(simplex[i].x[j] - best[j]));
    }
  }
  return size / scale;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, const std::vector<double>& steps,
                             const NelderMeadOptions& options) {
  const std::size_t n = start.size();
  if (n == 0 || steps.size() != n) throw DomainError("nelder_mead: start and steps must have equal nonzero size");

  NelderMeadResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<Vertex> simplex;
  auto build = [&](std::vector<double> origin, double step_scale) {
    simplex.clear();
    simplex.push_back({origin, eval(origin)});
    for (std::size_t i = 0; i < n; ++i) {
      auto x = origin;
      x[i] += steps[i] * step_scale;
      simplex.push_back({x, eval(x)});
    }
  };
  build(start, 1.0);

  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
  std::vector<double> centroid(n), trial(n);
  auto along = [&](double t) {
    const auto& worst = simplex.back().x;
    for (std::size_t j = 0; j < n; ++j) trial[j] = centroid[j] + t * (worst[j] - centroid[j]);
    return trial;
  };

  double previous_best = std::numeric_limits<double>::infinity();
  for (;;) {
    std::sort(simplex.begin(), simplex.end(), by_value);
    result.simplex_size = relative_size(simplex);

    if (result.simplex_size < options.tolerance && std::isfinite(simplex.front().f)) {
      // A restart that does not improve the optimum confirms convergence.
      const bool settled = !(simplex.front().f < previous_best);
      if (settled || result.restarts >= options.max_restarts) {
        result.converged = true;
        break;
      }
      previous_best = simplex.front().f;
      ++result.restarts;
      build(simplex.front().x, 1e-3);
      continue;
    }
    if (result.iterations >= options.max_iterations) break;
    ++result.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i].x[j] / static_cast<double>(n);
    }

    Vertex& worst = simplex.back();
    const double best_f = simplex.front().f;
    const double second_worst_f = simplex[n - 1].f;

    const auto reflected = along(-kAlpha);
    const double fr = eval(reflected);
    if (fr < best_f) {
      const auto expanded = along(-kAlpha * kGamma);
      const double fe = eval(expanded);
      worst = fe < fr ? Vertex{expanded, fe} : Vertex{reflected, fr};
      continue;
    }
    if (fr < second_worst_f) {
      worst = {reflected, fr};
      continue;
    }
    // Contract toward the better of the worst vertex and its reflection.
    const bool outside = fr < worst.f;
    const auto contracted = outside ? along(-kAlpha * kRho) : along(kRho);
    const double fc = eval(contracted);
    if (fc < std::min(fr, worst.f)) {
      worst = {contracted, fc};
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        simplex[i].x[j] = simplex[0].x[j] + kSigma * (simplex[i].x[j] - simplex[0].x[j]);
      }
      simplex[i].f = eval(simplex[i].x);
    }
  }

  result.x = simplex.front().x;
  result.value = simplex.front().f;
  return result;
}

}  // namespace potflare

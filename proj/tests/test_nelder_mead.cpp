#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "potflare/nelder_mead.hpp"

namespace potflare {
namespace {

TEST(NelderMead, Quadratic) {
  const auto r = nelder_mead([](const std::vector<double>& x) { return (x[0] - 3) * (x[0] - 3) + 2 * (x[1] + 1) * (x[1] + 1); },
                             {0.0, 0.0}, {1.0, 1.0});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 3.0, 1e-6);
  EXPECT_NEAR(r.x[1], -1.0, 1e-6);
  EXPECT_GE(r.restarts, 1);
}

TEST(NelderMead, Rosenbrock) {
  const auto r = nelder_mead(
      [](const std::vector<double>& x) {
        const double a = 1 - x[0], b = x[1] - x[0] * x[0];
        return a * a + 100 * b * b;
      },
      {-1.2, 1.0}, {0.5, 0.5});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
  EXPECT_NEAR(r.x[1], 1.0, 1e-5);
}

TEST(NelderMead, InfiniteValuesActAsBarrier) {
  // Minimum of (x-2)^2 restricted to x <= 1.
  const auto f = [](const std::vector<double>& x) {
    if (x[0] > 1.0) return std::numeric_limits<double>::infinity();
    return (x[0] - 2) * (x[0] - 2) + x[1] * x[1];
  };
  const auto r = nelder_mead(f, {0.0, 0.5}, {0.3, 0.3});
  EXPECT_LE(r.x[0], 1.0);
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], 0.0, 1e-6);
}

TEST(NelderMead, NanTreatedAsInfinite) {
  const auto f = [](const std::vector<double>& x) { return x[0] < -1.0 ? std::nan("") : (x[0] + 0.5) * (x[0] + 0.5); };
  const auto r = nelder_mead(f, {2.0}, {1.0});
  EXPECT_NEAR(r.x[0], -0.5, 1e-6);
}

TEST(NelderMead, IterationCapReportsNonConvergence) {
  NelderMeadOptions opts;
  opts.max_iterations = 3;
  const auto r = nelder_mead([](const std::vector<double>& x) { return x[0] * x[0] + x[1] * x[1]; }, {5.0, 5.0},
                             {1.0, 1.0}, opts);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.iterations, 3);
}

}  // namespace
}  // namespace potflare

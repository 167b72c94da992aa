#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "potflare/decluster.hpp"
#include "potflare/errors.hpp"
#include "potflare/random.hpp"

namespace potflare {
namespace {

constexpr double kNaN = FluxSample::kMissing;

TEST(Decluster, TwoClustersFromHandTrace) {
  const auto s = oracle::minute_series({0.5, 1.2, 1.5, 0.8, 0.9, 0.7, 2.0, 0.5});
  const auto c = decluster(s, 1.0, 2);
  ASSERT_EQ(c.events.size(), 2u);
  EXPECT_EQ(c.events[0].peak_flux, 1.5);
  EXPECT_EQ(c.events[1].peak_flux, 2.0);
  EXPECT_EQ(c.events[0].cluster_start, s.samples()[1].time);
  EXPECT_EQ(c.events[0].cluster_end, s.samples()[2].time);
  EXPECT_EQ(c.events[0].cluster_sample_count, 2);
  // Still open at the end of the series, closed there.
  EXPECT_EQ(c.events[1].cluster_end, s.samples()[6].time);
}

TEST(Decluster, ExceedanceInsideWindowResetsCounter) {
  const auto c = decluster(oracle::minute_series({1.2, 0.8, 1.3}), 1.0, 2);
  ASSERT_EQ(c.events.size(), 1u);
  EXPECT_EQ(c.events[0].peak_flux, 1.3);
  EXPECT_EQ(c.events[0].cluster_sample_count, 2);
}

TEST(Decluster, NoExceedancesAndEmptySeries) {
  EXPECT_TRUE(decluster(oracle::minute_series({0.1, 0.2, 0.3}), 1.0, 2).events.empty());
  const auto empty = decluster(FluxSeries{}, 1.0, 15);
  EXPECT_TRUE(empty.events.empty());
  EXPECT_EQ(empty.n_total_observations, 0);
}

TEST(Decluster, DomainErrors) {
  const auto s = oracle::minute_series({1.0});
  EXPECT_THROW(decluster(s, 1.0, 0), DomainError);
  EXPECT_THROW(decluster(s, 0.0, 15), DomainError);
}

TEST(Decluster, MissingMinutesCountAsQuiet) {
  // Two missing minutes close a gap-2 cluster just like sub-threshold values.
  const auto c = decluster(oracle::minute_series({1.5, kNaN, kNaN, 1.7}), 1.0, 2);
  EXPECT_EQ(c.events.size(), 2u);
  // Calendar holes behave the same way.
  const auto t0 = make_utc_minute(2003, 10, 28);
  const FluxSeries holes({{t0, 1.5}, {t0 + 3, 1.7}});
  EXPECT_EQ(decluster(holes, 1.0, 2).events.size(), 2u);
  EXPECT_EQ(decluster(holes, 1.0, 3).events.size(), 1u);
}

TEST(Decluster, CatalogMetadata) {
  const auto s = oracle::minute_series({0.5, kNaN, 1.2, 0.1});
  const auto c = decluster(s, 1.0, 15);
  EXPECT_EQ(c.n_total_observations, 3);
  EXPECT_EQ(c.gap_minutes, 15);
  EXPECT_EQ(c.decluster_threshold, 1.0);
  EXPECT_DOUBLE_EQ(c.span_years, 4.0 / kMinutesPerYear);
  EXPECT_EQ(c.missing_policy, kMissingPolicy);
}

// Random series with holes and missing values, lengths up to 200 minutes.
FluxSeries random_series(Rng& rng) {
  const int len = 1 + static_cast<int>(rng.uniform() * 200.0);
  std::vector<FluxSample> samples;
  auto t = make_utc_minute(2000, 1, 1);
  for (int i = 0; i < len; ++i) {
    if (rng.bernoulli(0.05)) t = t + static_cast<std::int64_t>(1 + rng.uniform() * 5.0);
    double flux = std::floor(rng.uniform() * 20.0) / 10.0;  // coarse values produce ties
    if (rng.bernoulli(0.05)) flux = kNaN;
    samples.push_back({t, flux});
    t = t + 1;
  }
  return FluxSeries(std::move(samples));
}

TEST(Decluster, MatchesBruteForceOracle) {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto s = random_series(rng);
    const double threshold = 0.2 + rng.uniform() * 1.6;
    const int gap = 1 + static_cast<int>(rng.uniform() * 20.0);
    const auto got = decluster(s, threshold, gap).events;
    const auto want = oracle::brute_force_decluster(s, threshold, gap);
    ASSERT_EQ(got, want) << "trial " << trial << " threshold " << threshold << " gap " << gap;
  }
}

TEST(Decluster, EventCountNonIncreasingInGap) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_series(rng);
    std::size_t previous = SIZE_MAX;
    for (int gap = 1; gap <= 25; ++gap) {
      const auto n = decluster(s, 1.0, gap).events.size();
      ASSERT_LE(n, previous);
      previous = n;
    }
  }
}

TEST(Decluster, EveryExceedanceInExactlyOneCluster) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_series(rng);
    const auto c = decluster(s, 1.0, 3);
    for (const auto& x : s.samples()) {
      if (x.missing() || x.flux < 1.0) continue;
      int hits = 0;
      for (const auto& e : c.events) hits += e.cluster_start <= x.time && x.time <= e.cluster_end;
      ASSERT_EQ(hits, 1);
    }
    for (const auto& e : c.events) {
      ASSERT_LE(e.cluster_start, e.peak_time);
      ASSERT_LE(e.peak_time, e.cluster_end);
      ASSERT_GE(e.peak_flux, 1.0);
    }
  }
}

TEST(Lag1Autocorrelation, HandValues) {
  const std::vector<double> ramp{1, 2, 3, 4, 5};
  EXPECT_NEAR(lag1_autocorrelation(ramp), 0.4, 1e-15);
  const std::vector<double> alt{1, -1, 1, -1};
  EXPECT_NEAR(lag1_autocorrelation(alt), -0.75, 1e-15);
}

TEST(Lag1Autocorrelation, Errors) {
  const std::vector<double> flat{2, 2, 2};
  EXPECT_THROW(lag1_autocorrelation(flat), ZeroVarianceError);
  const std::vector<double> short_list{1, 2};
  EXPECT_THROW(lag1_autocorrelation(short_list), InsufficientDataError);
}

TEST(Lag1Autocorrelation, AffineInvariantAndBounded) {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> x(3 + static_cast<std::size_t>(rng.uniform() * 50.0));
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    const double a = rng.uniform(0.01, 100.0), b = rng.uniform(-100.0, 100.0);
    std::vector<double> y;
    for (double v : x) y.push_back(a * v + b);
    const double r = lag1_autocorrelation(x);
    EXPECT_NEAR(lag1_autocorrelation(y), r, 1e-12);
    EXPECT_LE(std::abs(r), 1.0);
  }
}

TEST(GapSweep, IsolatedExceedances) {
  const auto s = oracle::minute_series({0.1, 1.5, 0.1, 0.1, 2.5, 0.1, 0.1, 1.1, 0.1, 0.1, 3.0, 0.1});
  const std::vector<int> gaps{1};
  const auto curve = gap_sweep(s, 1.0, gaps);
  ASSERT_EQ(curve.points.size(), 1u);
  EXPECT_EQ(curve.points[0].event_count, 4);
  const std::vector<double> peaks{1.5, 2.5, 1.1, 3.0};
  ASSERT_TRUE(curve.points[0].lag1_autocorrelation);
  EXPECT_DOUBLE_EQ(*curve.points[0].lag1_autocorrelation, lag1_autocorrelation(peaks));
}

TEST(GapSweep, SparsePointsUnavailable) {
  const auto s = oracle::minute_series({1.5, 0.1, 2.5});
  const std::vector<int> gaps{1, 5};
  const auto curve = gap_sweep(s, 1.0, gaps);
  EXPECT_FALSE(curve.points[0].lag1_autocorrelation);
  EXPECT_EQ(curve.points[1].event_count, 1);
}

TEST(GapSweep, RejectsBadGapLists) {
  const auto s = oracle::minute_series({1.5});
  const std::vector<int> none, unordered{3, 2}, zero{0};
  EXPECT_THROW(gap_sweep(s, 1.0, none), DomainError);
  EXPECT_THROW(gap_sweep(s, 1.0, unordered), DomainError);
  EXPECT_THROW(gap_sweep(s, 1.0, zero), DomainError);
}

TEST(GapSweep, ClusteringRaisesShortGapAutocorrelation) {
  SynthParams p;
  p.duration_years = 4.0;
  p.event_rate = 100.0;
  p.seed = 21;
  const auto s = synth_clustered_series(p);
  const std::vector<int> gaps{1, 15};
  const auto curve = gap_sweep(s, p.activity_floor, gaps);
  ASSERT_TRUE(curve.points[0].lag1_autocorrelation && curve.points[1].lag1_autocorrelation);
  EXPECT_LT(*curve.points[1].lag1_autocorrelation, *curve.points[0].lag1_autocorrelation);
  EXPECT_GT(curve.points[0].event_count, curve.points[1].event_count);
}

}  // namespace
}  // namespace potflare

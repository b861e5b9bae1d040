#include <gtest/gtest.h>

#include <cmath>

#include "wcp/estimate.hpp"

namespace wcp {
namespace {

SimulationConfig config(int n, double horizon, int depth, WeightDistribution dist) {
  SimulationConfig c;
  c.n = n;
  c.horizon = horizon;
  c.depth = depth;
  c.dist = std::move(dist);
  return c;
}

TEST(Survival, ZeroRateDiesOut) {
  const auto cfg = config(4, 50.0, 20, WeightDistribution::constant(1.0));
  const auto [a, e] = survival_point(cfg, 0.0, 2000, 1, 0);
  EXPECT_EQ(a.p_hat, 0.0);
  EXPECT_EQ(e.p_hat, 0.0);
  EXPECT_EQ(a.reps, 2000u);
}

TEST(Survival, StronglySupercriticalSurvives) {
  auto cfg = config(10, 30.0, 60, WeightDistribution::constant(1.0));
  cfg.max_active = 2000;  // saturated runs count as surviving
  const auto [a, e] = survival_point(cfg, 1.0, 1000, 2, 0);
  EXPECT_GE(a.p_hat, 0.5);
  EXPECT_GE(e.p_hat, a.p_hat);
}

TEST(Survival, EscapeDominatesAbsorbingPerLambda) {
  const auto cfg = config(3, 6.0, 6, WeightDistribution::uniform(0.0, 2.0));
  for (double l : {0.2, 0.5, 1.0}) {
    const auto [a, e] = survival_point(cfg, l, 500, 3, 0);
    EXPECT_LE(a.survivors, e.survivors) << l;
  }
}

TEST(Survival, ThreadCountDoesNotChangeResults) {
  const auto cfg = config(3, 5.0, 8, WeightDistribution::bernoulli(0.7));
  const auto one = survival_curve(cfg, {0.3, 0.6}, 400, false, 9, 1);
  const auto three = survival_curve(cfg, {0.3, 0.6}, 400, false, 9, 3);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(one.absorbing[i].survivors, three.absorbing[i].survivors);
    EXPECT_EQ(one.escape[i].survivors, three.escape[i].survivors);
  }
}

TEST(Survival, CrnOutcomesMonotoneInLambda) {
  const auto cfg = config(3, 8.0, 10, WeightDistribution::uniform(0.0, 1.0));
  const auto c = survival_curve(cfg, {0.2, 0.4, 0.6, 0.8, 1.0}, 300, true, 4);
  EXPECT_EQ(c.containment_violations, 0u);
  for (const auto* table : {&c.outcomes_absorbing, &c.outcomes_escape})
    for (const auto& row : *table)
      for (std::size_t k = 0; k + 1 < row.size(); ++k) EXPECT_LE(row[k], row[k + 1]);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_LE(c.absorbing[k].survivors, c.escape[k].survivors);
}

TEST(Survival, RejectsBadGrid) {
  const auto cfg = config(2, 1.0, 3, WeightDistribution::constant(1.0));
  EXPECT_THROW(survival_curve(cfg, {}, 10, false, 1), ValidationError);
  EXPECT_THROW(survival_curve(cfg, {0.5, 0.2}, 10, false, 1), ValidationError);
  EXPECT_THROW(survival_curve(cfg, {0.5}, 0, false, 1), ValidationError);
}

TEST(Decay, ZeroRateGivesUnitSlope) {
  const auto cfg = config(4, 1.0, 8, WeightDistribution::constant(1.0));
  const auto r = estimate_decay_rate(cfg, 0.0, {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}, 20'000, 5);
  ASSERT_TRUE(r.sufficient);
  EXPECT_NEAR(r.slope, -1.0, 4.0 * r.slope_se);
  EXPECT_LT(r.slope_se, 0.05);
  EXPECT_FALSE(r.above_lower_bound);
}

TEST(Decay, InsufficientSignal) {
  const auto cfg = config(4, 1.0, 8, WeightDistribution::constant(1.0));
  const auto r = estimate_decay_rate(cfg, 0.0, {20.0, 40.0, 60.0}, 100, 6);
  EXPECT_FALSE(r.sufficient);
  EXPECT_TRUE(std::isnan(r.slope));
}

TEST(Decay, Reproducible) {
  const auto cfg = config(3, 1.0, 6, WeightDistribution::bernoulli(0.5));
  const auto a = estimate_decay_rate(cfg, 0.2, {1.0, 2.0, 3.0}, 2000, 7, 1);
  const auto b = estimate_decay_rate(cfg, 0.2, {1.0, 2.0, 3.0}, 2000, 7, 2);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) EXPECT_EQ(a.points[i].p_hat, b.points[i].p_hat);
}

TEST(Critical, InfiniteWhenFewOpenChildren) {
  const auto cfg = config(2, 10.0, 20, WeightDistribution::bernoulli(0.5));
  const auto est = estimate_lambda_c(cfg, 0.01, 100, 0.02, 1);
  EXPECT_EQ(est.verdict, Verdict::infinite);
  EXPECT_TRUE(est.certified);
  EXPECT_TRUE(est.probes.empty());
}

TEST(Critical, QuenchedFiniteClusterIsInfinite) {
  auto cfg = config(3, 10.0, 25, WeightDistribution::bernoulli(0.6));
  cfg.mode = Mode::quenched;
  std::uint64_t seed = 0;
  while (open_path_to_depth(WeightField(seed, cfg.dist, cfg.n), cfg.depth)) ++seed;
  cfg.master_seed = seed;
  const auto est = estimate_lambda_c(cfg, 0.01, 100, 0.02, 1);
  EXPECT_EQ(est.verdict, Verdict::infinite);
  EXPECT_TRUE(est.certified);
}

TEST(Critical, BisectionStaysInsideAnalyticRange) {
  auto cfg = config(3, 6.0, 12, WeightDistribution::constant(1.0));
  cfg.max_active = 2000;
  const auto est = estimate_lambda_c(cfg, 0.05, 300, 0.05, 8);
  ASSERT_NE(est.verdict, Verdict::infinite);
  EXPECT_GE(est.interval.lo, est.analytic.lo);
  EXPECT_LE(est.interval.hi, 2.0 * est.analytic.hi);
  EXPECT_FALSE(est.probes.empty());
  if (est.verdict == Verdict::finite) EXPECT_LE(est.interval.width(), 0.05);
  for (const auto& p : est.probes) {
    if (p.cls == ProbeClass::supercritical) EXPECT_GE(p.lambda, est.interval.hi);
    if (p.cls == ProbeClass::subcritical) EXPECT_LE(p.lambda, est.interval.lo);
  }
}

}  // namespace
}  // namespace wcp

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "support/oracles.hpp"
#include "wcp/contact.hpp"
#include "wcp/io.hpp"

namespace wcp {
namespace {

SimulationConfig make_config(int n, double lambda, double horizon, int depth,
                             WeightDistribution dist = WeightDistribution::constant(1.0),
                             Boundary boundary = Boundary::absorbing) {
  SimulationConfig c;
  c.n = n;
  c.lambda = lambda;
  c.horizon = horizon;
  c.depth = depth;
  c.boundary = boundary;
  c.dist = std::move(dist);
  return c;
}

Eigen::MatrixXd adjacency_of(const WeightField& f, int depth) {
  const auto t = truncate(f.n(), depth);
  return oracle::weighted_adjacency(f.n(), depth, [&](std::size_t v) { return f.edge_weight(t.address(v)); });
}

TEST(Contact, NoInfectionRateGivesExponentialLifetime) {
  const auto cfg = make_config(3, 0.0, 1e9, 5);
  const WeightField f(1, cfg.dist, 3);
  EventEngine<ContactRule> engine;
  constexpr int reps = 100'000;
  double sum = 0.0;
  for (int i = 0; i < reps; ++i) {
    Stream s(make_key(11, {static_cast<std::uint64_t>(i)}));
    const auto o = engine.run(cfg, f, s);
    ASSERT_EQ(o.status, Status::extinct);
    ASSERT_EQ(o.max_infected, 1u);
    sum += o.time;
  }
  EXPECT_NEAR(sum / reps, 1.0, 4.0 * std::pow(10.0, -2.5));
}

TEST(Contact, ZeroWeightsNeverSpread) {
  const auto cfg = make_config(3, 5.0, 100.0, 6, WeightDistribution::bernoulli(0.0));
  const WeightField f(2, cfg.dist, 3);
  for (int i = 0; i < 200; ++i) {
    Stream s(make_key(3, {static_cast<std::uint64_t>(i)}));
    const auto o = simulate_contact(cfg, f, Init::root_only, s);
    EXPECT_EQ(o.max_infected, 1u);
    EXPECT_EQ(o.ever_infected, 1u);
  }
}

TEST(Contact, SubcriticalPathDiesOut) {
  const auto cfg = make_config(1, 0.1, 50.0, 200);
  const WeightField f(4, cfg.dist, 1);
  EventEngine<ContactRule> engine;
  int extinct = 0;
  for (int i = 0; i < 10'000; ++i) {
    Stream s(make_key(5, {static_cast<std::uint64_t>(i)}));
    extinct += engine.run(cfg, f, s).status == Status::extinct;
  }
  EXPECT_GT(extinct / 10'000.0, 0.99);
}

TEST(Contact, DeterministicReplay) {
  const auto cfg = make_config(3, 0.6, 5.0, 8, WeightDistribution::uniform(0.2, 1.4));
  const WeightField f(99, cfg.dist, 3);
  std::vector<EventLogEntry> log1, log2;
  Stream s1(make_key(1234)), s2(make_key(1234));
  const auto a = simulate_contact(cfg, f, Init::root_only, s1, &log1);
  const auto b = simulate_contact(cfg, f, Init::root_only, s2, &log2);
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.time, b.time);
  EXPECT_EQ(a.event_count, b.event_count);
  ASSERT_EQ(log1.size(), log2.size());
  for (std::size_t i = 0; i < log1.size(); ++i) {
    EXPECT_EQ(log1[i].time, log2[i].time);
    EXPECT_EQ(log1[i].vertex, log2[i].vertex);
    EXPECT_EQ(log1[i].event, log2[i].event);
  }
  std::ostringstream os;
  write_event_log(os, log1);
  EXPECT_EQ(os.str().rfind("time,vertex,event\n", 0), 0u);
  EXPECT_NE(os.str().find(",\"O\",infect"), std::string::npos);
}

TEST(Contact, TwoVertexInfectionBeforeRecovery) {
  // One edge of weight 1.5: the root infects its son before recovering with
  // probability lambda rho / (1 + lambda rho).
  const double lambda = 0.4, rho = 1.5;
  const auto cfg = make_config(1, lambda, 1e9, 1, WeightDistribution::constant(rho), Boundary::escape);
  const WeightField f(0, cfg.dist, 1);
  EventEngine<ContactRule> engine;
  constexpr int reps = 100'000;
  int hits = 0;
  for (int i = 0; i < reps; ++i) {
    Stream s(make_key(21, {static_cast<std::uint64_t>(i)}));
    hits += engine.run(cfg, f, s).status == Status::escaped;
  }
  const double p = lambda * rho / (1 + lambda * rho);
  EXPECT_NEAR(hits / double(reps), p, 3.0 * std::sqrt(p * (1 - p) / reps));
}

TEST(Contact, OutcomeStatusInvariants) {
  const auto esc = make_config(2, 0.9, 4.0, 5, WeightDistribution::constant(1.0), Boundary::escape);
  const auto abs = make_config(2, 0.9, 4.0, 5);
  const WeightField f(8, esc.dist, 2);
  EventEngine<ContactRule> engine;
  int escapes = 0;
  for (int i = 0; i < 500; ++i) {
    Stream s1(make_key(7, {static_cast<std::uint64_t>(i)}));
    const auto a = engine.run(abs, f, s1);
    EXPECT_NE(a.status, Status::escaped);
    if (a.status == Status::extinct) EXPECT_LE(a.time, abs.horizon);
    Stream s2(make_key(7, {static_cast<std::uint64_t>(i)}));
    const auto e = engine.run(esc, f, s2);
    escapes += e.status == Status::escaped;
    if (e.status == Status::escaped) EXPECT_EQ(e.deepest, 5);
    // shared stream: the escape run can only survive longer
    EXPECT_GE(e.survived(), a.survived());
  }
  EXPECT_GT(escapes, 0);
}

TEST(Contact, CapacityExceededIsReported) {
  auto cfg = make_config(5, 3.0, 50.0, 30);
  cfg.max_active = 50;
  const WeightField f(8, cfg.dist, 5);
  Stream s(make_key(1));
  const auto o = simulate_contact(cfg, f, Init::root_only, s);
  EXPECT_EQ(o.status, Status::capacity_exceeded);
  EXPECT_TRUE(o.survived());

  cfg.max_active = 1'000'000;
  cfg.max_vertices = 100;
  Stream s2(make_key(1));
  EXPECT_EQ(simulate_contact(cfg, f, Init::root_only, s2).status, Status::capacity_exceeded);
}

TEST(Contact, AllInfectedStartRequiresAbsorbingContact) {
  const auto cfg = make_config(2, 0.3, 1.0, 2, WeightDistribution::constant(1.0), Boundary::escape);
  const WeightField f(1, cfg.dist, 2);
  Stream s(make_key(1));
  EXPECT_THROW(simulate_contact(cfg, f, Init::all_infected, s), ValidationError);
}

// --- binary contact path process ---------------------------------------------

TEST(Bcpp, InitialRootValueIsOne) {
  const auto cfg = make_config(2, 0.3, 1.0, 2);
  const WeightField f(1, cfg.dist, 2);
  Stream s(make_key(3));
  const auto r = simulate_bcpp(cfg, f, s, {0.0, 0.5});
  ASSERT_EQ(r.root_samples.size(), 2u);
  EXPECT_EQ(r.root_samples[0], 1u);
}

TEST(Bcpp, ZeroWeightsGiveScalarDeathProcess) {
  const auto cfg = make_config(2, 0.7, 1.0, 2, WeightDistribution::bernoulli(0.0));
  const WeightField f(1, cfg.dist, 2);
  constexpr int reps = 100'000;
  int alive = 0;
  for (int i = 0; i < reps; ++i) {
    Stream s(make_key(17, {static_cast<std::uint64_t>(i)}));
    alive += simulate_bcpp(cfg, f, s, {1.0}).root_samples[0] >= 1;
  }
  const double p = std::exp(-1.0);
  EXPECT_NEAR(alive / double(reps), p, 4.0 * std::sqrt(p * (1 - p) / reps));
}

TEST(Bcpp, IndicatorMatchesContactFromAllInfected) {
  const auto cfg = make_config(2, 0.3, 2.0, 2);
  const WeightField f(1, cfg.dist, 2);
  constexpr int reps = 100'000;
  EventEngine<ContactRule> engine;
  RunOptions all;
  all.init = Init::all_infected;
  int bcpp_alive = 0, contact_alive = 0;
  for (int i = 0; i < reps; ++i) {
    Stream s1(make_key(31, {static_cast<std::uint64_t>(i)}));
    bcpp_alive += simulate_bcpp(cfg, f, s1, {2.0}).root_samples[0] >= 1;
    Stream s2(make_key(32, {static_cast<std::uint64_t>(i)}));
    contact_alive += engine.run(cfg, f, s2, all).root_infected;
  }
  const double p1 = bcpp_alive / double(reps), p2 = contact_alive / double(reps);
  const double se = std::sqrt(p1 * (1 - p1) / reps + p2 * (1 - p2) / reps);
  EXPECT_LE(std::abs(p1 - p2), 3.0 * se);
}

TEST(Bcpp, OverflowIsFlagged) {
  const auto cfg = make_config(3, 60.0, 10.0, 3);
  const WeightField f(1, cfg.dist, 3);
  Stream s(make_key(5));
  const auto r = simulate_bcpp(cfg, f, s);
  EXPECT_TRUE(r.overflow);
  for (auto v : r.values) EXPECT_LE(v, kBcppLimit);
}

TEST(BcppExpectation, BoundaryValues) {
  const auto cfg = make_config(3, 0.5, 1.0, 0);
  const WeightField f(1, cfg.dist, 3);
  EXPECT_EQ(bcpp_expectation(cfg, f, 0.0, 1e-12), 1.0);
  for (double t : {0.5, 1.0, 3.0}) EXPECT_NEAR(bcpp_expectation(cfg, f, t, 1e-14), std::exp(-t), 1e-14);
  EXPECT_THROW(bcpp_expectation(cfg, f, 1.0, 0.0), ValidationError);
}

TEST(BcppExpectation, MatchesDenseMatrixExponential) {
  {
    const auto cfg = make_config(2, 0.3, 2.0, 2);
    const WeightField f(1, cfg.dist, 2);
    const double dense = oracle::dense_bcpp_expectation(adjacency_of(f, 2), 0.3, 2.0);
    EXPECT_NEAR(bcpp_expectation(cfg, f, 2.0, 1e-12), dense, 1e-8);
  }
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const auto cfg = make_config(3, 0.45, 1.0, 3, WeightDistribution::uniform(0.0, 2.0));
    const WeightField f(seed, cfg.dist, 3);
    for (double t : {0.5, 3.0, 7.0}) {
      const double dense = oracle::dense_bcpp_expectation(adjacency_of(f, 3), 0.45, t);
      EXPECT_NEAR(bcpp_expectation(cfg, f, t, 1e-12), dense, 1e-8 * std::max(1.0, dense));
    }
  }
}

TEST(BcppExpectation, MonteCarloMeanAgrees) {
  const auto cfg = make_config(2, 0.3, 2.0, 2, WeightDistribution::bernoulli(0.7, 1.3));
  const WeightField f(12, cfg.dist, 2);
  const double expected = bcpp_expectation(cfg, f, 2.0, 1e-12);
  constexpr int reps = 100'000;
  double sum = 0.0, sumsq = 0.0;
  int used = 0;
  for (int i = 0; i < reps; ++i) {
    Stream s(make_key(41, {static_cast<std::uint64_t>(i)}));
    const auto r = simulate_bcpp(cfg, f, s, {2.0});
    if (r.overflow) continue;
    const double z = static_cast<double>(r.root_samples[0]);
    sum += z;
    sumsq += z * z;
    ++used;
  }
  const double mean = sum / used;
  const double se = std::sqrt((sumsq / used - mean * mean) / used);
  EXPECT_LE(std::abs(mean - expected), 3.0 * se);
}

TEST(BcppExpectation, DominatesSurvivalProbability) {
  const auto cfg = make_config(3, 0.25, 3.0, 3, WeightDistribution::uniform(0.2, 1.0));
  const WeightField f(9, cfg.dist, 3);
  EventEngine<ContactRule> engine;
  constexpr int reps = 20'000;
  int alive = 0;
  for (int i = 0; i < reps; ++i) {
    Stream s(make_key(43, {static_cast<std::uint64_t>(i)}));
    alive += engine.run(cfg, f, s).survived_to(3.0);
  }
  const double p = alive / double(reps);
  EXPECT_LE(p, bcpp_expectation(cfg, f, 3.0, 1e-12) + 3.0 * std::sqrt(p * (1 - p) / reps));
}

// --- duality -------------------------------------------------------------------

TEST(Duality, TimeZeroIsCertain) {
  const auto cfg = make_config(2, 0.3, 1.0, 2);
  const WeightField f(1, cfg.dist, 2);
  const auto r = duality_check(cfg, f, 0.0, 100, 5);
  EXPECT_EQ(r.p_forward, 1.0);
  EXPECT_EQ(r.p_dual, 1.0);
  EXPECT_EQ(r.z_score, 0.0);
}

TEST(Duality, NoInfectionBothSidesDecayLikeExp) {
  const auto cfg = make_config(2, 0.0, 1.0, 2);
  const WeightField f(1, cfg.dist, 2);
  const auto r = duality_check(cfg, f, 1.0, 100'000, 6);
  const double p = std::exp(-1.0), se = std::sqrt(p * (1 - p) / 1e5);
  EXPECT_NEAR(r.p_forward, p, 4 * se);
  EXPECT_NEAR(r.p_dual, p, 4 * se);
  EXPECT_LE(r.z_score, 3.0);
}

TEST(Duality, SevenVertexTruncation) {
  const auto cfg = make_config(2, 0.3, 2.0, 2);
  const WeightField f(1, cfg.dist, 2);
  const auto r = duality_check(cfg, f, 2.0, 100'000, 7);
  EXPECT_LE(r.z_score, 3.0);
  const auto exact = oracle::exact_contact_duality(adjacency_of(f, 2), 0.3, 2.0);
  EXPECT_NEAR(exact.p_forward, exact.p_dual, 1e-10);
  EXPECT_NEAR(r.p_forward, exact.p_forward, 4 * std::sqrt(exact.p_forward * (1 - exact.p_forward) / 1e5));
  EXPECT_NEAR(r.p_dual, exact.p_dual, 4 * std::sqrt(exact.p_dual * (1 - exact.p_dual) / 1e5));
}

TEST(Duality, TwoVertexExactGenerator) {
  const auto cfg = make_config(1, 0.8, 1.5, 1, WeightDistribution::constant(1.7));
  const WeightField f(1, cfg.dist, 1);
  const auto exact = oracle::exact_contact_duality(adjacency_of(f, 1), 0.8, 1.5);
  EXPECT_NEAR(exact.p_forward, exact.p_dual, 1e-6);
  const auto r = duality_check(cfg, f, 1.5, 100'000, 8);
  EXPECT_NEAR(r.p_forward, exact.p_forward, 4 * std::sqrt(exact.p_forward * (1 - exact.p_forward) / 1e5));
  EXPECT_NEAR(r.p_dual, exact.p_dual, 4 * std::sqrt(exact.p_dual * (1 - exact.p_dual) / 1e5));
}

TEST(Duality, ThreadCountDoesNotChangeResult) {
  const auto cfg = make_config(2, 0.3, 2.0, 2);
  const WeightField f(1, cfg.dist, 2);
  const auto a = duality_check(cfg, f, 2.0, 3000, 9, 1);
  const auto b = duality_check(cfg, f, 2.0, 3000, 9, 3);
  EXPECT_EQ(a.p_forward, b.p_forward);
  EXPECT_EQ(a.p_dual, b.p_dual);
}

}  // namespace
}  // namespace wcp

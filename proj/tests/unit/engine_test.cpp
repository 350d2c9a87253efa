#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include "mshare/engine.hpp"
#include "mshare/oracle.hpp"
#include "mshare/summary.hpp"
#include "test_support.hpp"

using namespace mshare;
using mshare::test::single;

namespace {

EngineConfig small_config(std::uint64_t seed = 1) {
  EngineConfig cfg;
  cfg.name = "small";
  cfg.n = 10;
  cfg.iterations = 2000;
  cfg.seed = seed;
  cfg.markets = {{"a", InitSpec::competitive(3)}, {"b", InitSpec::monopoly(0.5)}};
  cfg.params = ParameterSet::homogeneous(2, 1.0, 0.5, BetaBase{1.0, 1.0});
  return cfg;
}

}  // namespace

TEST(Initialize, Monopoly) {
  Rng rng = Rng::stream(1, 0);
  const auto c = initialize(InitSpec::monopoly(0.5), 4, rng, BetaBase{1.0, 1.0});
  EXPECT_EQ(c, MarketConfiguration::from_values(std::vector{0.5, 0.5, 0.5, 0.5}));
}

TEST(Initialize, CompetitiveEqualShares) {
  Rng rng = Rng::stream(2, 0);
  const auto c = initialize(InitSpec::competitive(5), 500, rng, BetaBase{1.0, 1.0});
  ASSERT_EQ(c.firm_count(), 5u);
  for (const auto& cl : c.clusters()) EXPECT_EQ(cl.count, 100u);
}

TEST(Initialize, CompetitiveRoundRobinRemainder) {
  Rng rng = Rng::stream(3, 0);
  const auto c = initialize(InitSpec::competitive(3), 10, rng, BetaBase{1.0, 1.0});
  std::vector<std::size_t> counts;
  for (const auto& cl : c.clusters()) counts.push_back(cl.count);
  std::sort(counts.rbegin(), counts.rend());
  EXPECT_EQ(counts, (std::vector<std::size_t>{4, 3, 3}));
}

TEST(Initialize, Errors) {
  Rng rng = Rng::stream(4, 0);
  EXPECT_THROW(initialize(InitSpec::competitive(11), 10, rng, BetaBase{1.0, 1.0}), ValidationError);
  EXPECT_THROW(initialize(InitSpec::custom({0.1, 0.2}), 3, rng, BetaBase{1.0, 1.0}), ValidationError);
  EXPECT_THROW(initialize(InitSpec::competitive(3), 10, rng, DiscreteBase{{0.1, 0.2}, {0.5, 0.5}}), ValidationError);
}

TEST(GibbsStep, MonopolyWithThetaZeroNeverMoves) {
  auto s = single(std::vector<double>(50, 0.3));
  const auto before = s.markets[0];
  const auto p = ParameterSet::homogeneous(1, 0.0, 1.0, BetaBase{1.0, 1.0});
  Rng rng = Rng::stream(5, 0);
  for (int k = 0; k < 5000; ++k) gibbs_step(s, p, rng);
  EXPECT_EQ(s.markets[0], before);
  EXPECT_EQ(s.iteration, 5000u);
}

TEST(GibbsStep, ChangesAtMostOneUnitAndIsDeterministic) {
  auto p = ParameterSet::homogeneous(2, 3.0, 0.5, BetaBase{1.0, 1.0});
  p.removal = {RemovalPolicy::Kind::proportional};
  auto s1 = test::pair({0.1, 0.2, 0.2, 0.5}, {0.7, 0.7, 0.8, 0.9});
  auto s2 = s1;
  Rng r1 = Rng::stream(6, 1), r2 = Rng::stream(6, 1);
  for (int k = 0; k < 2000; ++k) {
    const auto before = s1;
    const auto rec = gibbs_step(s1, p, r1);
    gibbs_step(s2, p, r2);
    ASSERT_EQ(s1.markets, s2.markets);
    std::size_t changed = 0;
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t i = 0; i < 4; ++i) changed += before.markets[r].unit(i) != s1.markets[r].unit(i);
    }
    ASSERT_LE(changed, 1u);
    ASSERT_EQ(s1.markets[rec.target.market].unit(rec.target.unit), rec.outcome.label);
    ASSERT_TRUE(s1.markets[0].index_consistent() && s1.markets[1].index_consistent());
  }
}

TEST(GibbsStep, EmpiricalKernelMatchesExactTransitionMatrix) {
  auto inst = oracle::FiniteInstance::uniform(3, 3, 1.0);
  const auto t = oracle::transition_matrix(inst);
  const auto p = ParameterSet::homogeneous(1, 1.0, 1.0, DiscreteBase{inst.atoms, inst.weights});
  auto s = single({inst.atoms[0], inst.atoms[1], inst.atoms[2]});
  auto index_of = [&](const MarketConfiguration& c) {
    std::vector<std::size_t> x;
    for (FirmLabel l : c.units()) x.push_back(static_cast<std::size_t>(l.value() * 3.0));
    return oracle::encode(inst, x);
  };
  std::vector<std::vector<double>> counts(t.dim, std::vector<double>(t.dim, 0.0));
  Rng rng = Rng::stream(7, 1);
  std::size_t from = index_of(s.markets[0]);
  for (int k = 0; k < 1000000; ++k) {
    gibbs_step(s, p, rng);
    const std::size_t to = index_of(s.markets[0]);
    counts[from][to] += 1.0;
    from = to;
  }
  double stat = 0.0, dof = 0.0;
  for (std::size_t x = 0; x < t.dim; ++x) {
    double row = 0.0;
    for (double c : counts[x]) row += c;
    ASSERT_GT(row, 0.0);
    double cells = 0.0;
    for (std::size_t y = 0; y < t.dim; ++y) {
      if (t(x, y) == 0.0) {
        ASSERT_EQ(counts[x][y], 0.0);
        continue;
      }
      const double e = row * t(x, y);
      stat += (counts[x][y] - e) * (counts[x][y] - e) / e;
      cells += 1.0;
    }
    dof += cells - 1.0;
  }
  const boost::math::chi_squared dist(dof);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, stat)), 0.001);
}

TEST(Run, SingleIterationSingleRecord) {
  EngineConfig cfg = small_config();
  cfg.iterations = 1;
  cfg.retention.points = {1};
  const Trace trace = run(cfg);
  ASSERT_EQ(trace.records.size(), 1u);
  EXPECT_EQ(trace.records[0].iteration, 1u);
  EXPECT_EQ(trace.records[0].events.total(), 1u);
}

TEST(Run, RecordsAreOrderedAndConsistent) {
  const Trace trace = run(small_config());
  ASSERT_FALSE(trace.records.empty());
  EXPECT_EQ(trace.records.back().iteration, 2000u);
  EXPECT_EQ(trace.records.back().events.total(), 2000u);
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const auto& rec = trace.records[k];
    if (k > 0) {
      EXPECT_GT(rec.iteration, trace.records[k - 1].iteration);
    }
    for (std::size_t r = 0; r < 2; ++r) {
      EXPECT_EQ(rec.histograms[r].total(), 10u);
      EXPECT_GE(rec.herfindahl[r], 0.1 - 1e-12);
      EXPECT_LE(rec.herfindahl[r], 1.0);
      EXPECT_EQ(rec.firms[r] == 1, rec.herfindahl[r] == 1.0);
    }
  }
}

TEST(Run, SameSeedSameTraceDifferentSeedDifferent) {
  EXPECT_EQ(run(small_config(3)), run(small_config(3)));
  EXPECT_NE(run(small_config(3)), run(small_config(4)));
}

TEST(Run, ScheduleBeyondIterationsRejected) {
  EngineConfig cfg = small_config();
  ParameterPatch patch;
  patch.theta[0] = 5.0;
  cfg.schedule.entries = {{5000, patch}};
  EXPECT_THROW(run(cfg), ValidationError);
}

TEST(Run, SchedulePatchAppliesAtTrigger) {
  EngineConfig cfg = small_config();
  cfg.markets = {{"a", InitSpec::monopoly(0.5)}, {"b", InitSpec::monopoly(0.5)}};
  cfg.params = ParameterSet::homogeneous(2, 0.0, 1.0, BetaBase{1.0, 1.0});
  ParameterPatch patch;
  patch.theta = {{0, 1000.0}, {1, 1000.0}};
  cfg.schedule.entries = {{101, patch}};
  cfg.retention.points = {100, 101};
  cfg.iterations = 101;
  const Trace trace = run(cfg);
  ASSERT_EQ(trace.records.size(), 2u);
  EXPECT_EQ(trace.records[0].events.new_firm, 0u);
  EXPECT_EQ(trace.records[0].events.within, 100u);
  // theta = 1000 with n = 10 makes the 101st update a new firm with probability ~0.99
  EXPECT_EQ(trace.records[1].events.total(), 101u);
}

TEST(Engine, ThetaZeroSchedulePreventsEntry) {
  EngineConfig cfg = small_config();
  ParameterPatch patch;
  patch.theta = {{0, 0.0}, {1, 0.0}};
  cfg.schedule.entries = {{1, patch}};
  const Trace trace = run(cfg);
  EXPECT_EQ(trace.records.back().events.new_firm, 0u);
  EXPECT_EQ(trace.records.back().events.cross, 0u);
}

TEST(ContinuousRun, EmbeddedChainMatchesDiscreteRun) {
  EngineConfig cfg = small_config(9);
  Engine discrete(cfg);
  cfg.mode = TimeMode::continuous;
  Engine continuous(cfg);
  for (int k = 0; k < 2000; ++k) {
    discrete.step();
    continuous.step();
    ASSERT_EQ(discrete.state().markets, continuous.state().markets);
  }
  EXPECT_EQ(discrete.state().clock, 0.0);
  EXPECT_GT(continuous.state().clock, 0.0);
}

TEST(ContinuousRun, MeanWaitingTime) {
  EngineConfig cfg = small_config(10);
  cfg.iterations = 100000;
  const Trace trace = continuous_run(cfg);
  EXPECT_NEAR(trace.records.back().clock / 100000.0, 1.0 / 200.0, 0.02 / 200.0);
  for (std::size_t k = 1; k < trace.records.size(); ++k) EXPECT_GT(trace.records[k].clock, trace.records[k - 1].clock);
}

TEST(Retention, GeometricPointsEndAtIterations) {
  const auto pts = geometric_points(500000, 150);
  EXPECT_EQ(pts.front(), 1u);
  EXPECT_EQ(pts.back(), 500000u);
  EXPECT_GE(pts.size(), 120u);
  EXPECT_LE(pts.size(), 150u);
  EXPECT_TRUE(std::is_sorted(pts.begin(), pts.end()));
  EXPECT_THROW(retention_points({150, {0}}, 10), ValidationError);
  EXPECT_EQ(retention_points({150, {5, 3}}, 10), (std::vector<std::uint64_t>{3, 5, 10}));
}

TEST(Summary, Herfindahl) {
  EXPECT_DOUBLE_EQ(herfindahl(MarketConfiguration::from_values(std::vector(7, 0.2))), 1.0);
  EXPECT_DOUBLE_EQ(herfindahl(MarketConfiguration::from_values(std::vector{0.1, 0.2, 0.3, 0.4})), 0.25);
  EXPECT_DOUBLE_EQ(herfindahl(MarketConfiguration::from_values(std::vector{0.1, 0.1, 0.2, 0.3})), 0.375);
  EXPECT_DOUBLE_EQ(max_share(MarketConfiguration::from_values(std::vector{0.1, 0.1, 0.2, 0.3})), 0.5);
}

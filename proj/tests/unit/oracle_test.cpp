#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "mshare/oracle.hpp"

using namespace mshare;
using namespace mshare::oracle;

TEST(ExactJoint, SingleUnitIsBaseWeights) {
  FiniteInstance inst{{0.1, 0.5, 0.9}, {0.2, 0.3, 0.5}, 1.5, 1, {}};
  const auto p = exact_joint(inst);
  EXPECT_NEAR(p[0], 0.2, 1e-15);
  EXPECT_NEAR(p[1], 0.3, 1e-15);
  EXPECT_NEAR(p[2], 0.5, 1e-15);
}

TEST(ExactJoint, TwoAtomsByHand) {
  const auto p = exact_joint(FiniteInstance::uniform(2, 2, 1.0));
  EXPECT_NEAR(p[encode(FiniteInstance::uniform(2, 2, 1.0), {0, 0})], 0.375, 1e-12);
  EXPECT_NEAR(p[encode(FiniteInstance::uniform(2, 2, 1.0), {1, 1})], 0.375, 1e-12);
  EXPECT_NEAR(p[encode(FiniteInstance::uniform(2, 2, 1.0), {0, 1})], 0.125, 1e-12);
  EXPECT_NEAR(p[encode(FiniteInstance::uniform(2, 2, 1.0), {1, 0})], 0.125, 1e-12);
}

TEST(ExactJoint, ExchangeableAndNormalized) {
  for (auto beta : {std::vector<double>{}, std::vector<double>{2.0, 0.5, 1.0}}) {
    FiniteInstance inst{{0.1, 0.5, 0.9}, {0.2, 0.3, 0.5}, 0.7, 4, beta};
    const auto p = exact_joint(inst);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    for (std::size_t s = 0; s < p.size(); ++s) {
      auto x = decode(inst, s);
      std::sort(x.begin(), x.end());
      do {
        ASSERT_NEAR(p[encode(inst, x)], p[s], 1e-15);
      } while (std::next_permutation(x.begin(), x.end()));
    }
  }
}

TEST(ExactJoint, CapacityError) {
  EXPECT_THROW(exact_joint(FiniteInstance::uniform(5, 5, 1.0), 1000), CapacityError);
}

TEST(Lemma1, Examples) {
  EXPECT_LE(check_lemma1(FiniteInstance::uniform(2, 2, 1.0)), 1e-12);
  EXPECT_LE(check_lemma1(FiniteInstance::uniform(3, 3, 0.5)), 1e-12);
  EXPECT_LE(check_lemma1(FiniteInstance::uniform(2, 3, 1e6)), 1e-12);
  EXPECT_THROW(check_lemma1(FiniteInstance::uniform(3, 3, 1.0), 100), CapacityError);
}

TEST(TransitionMatrix, StationaryAndReversible) {
  for (auto beta : {std::vector<double>{}, std::vector<double>{2.0, 1.0, 1.0}}) {
    auto inst = FiniteInstance::uniform(3, 3, 1.0);
    inst.beta = beta;
    const auto t = transition_matrix(inst);
    const auto pi = exact_joint(inst);
    EXPECT_LE(row_sum_error(t), 1e-12);
    EXPECT_LE(stationarity_error(pi, t), 1e-10);
    EXPECT_LE(detailed_balance_error(pi, t), 1e-10);
  }
}

TEST(TransitionMatrix, OtherRemovalPoliciesStillStochastic) {
  auto inst = FiniteInstance::uniform(3, 3, 1.0);
  for (auto kind : {RemovalPolicy::Kind::neutral, RemovalPolicy::Kind::proportional}) {
    EXPECT_LE(row_sum_error(transition_matrix(inst, {kind})), 1e-12);
  }
}

TEST(TransitionMatrix, ThetaZeroMonopolyAbsorbs) {
  const auto inst = FiniteInstance::uniform(3, 3, 0.0);
  const auto t = transition_matrix(inst);
  const std::size_t mono = encode(inst, {2, 2, 2});
  EXPECT_EQ(t(mono, mono), 1.0);
}

TEST(Drift, ClosedFormAgreesAndPullsTowardBase) {
  for (double theta : {0.0, 1.0, 3.0}) {
    const auto rep = one_step_drift_check(FiniteInstance::uniform(2, 3, theta), {true, false});
    EXPECT_LE(rep.max_discrepancy, 1e-12);
    EXPECT_TRUE(rep.sign_consistent);
  }
  const auto inst = FiniteInstance::uniform(2, 3, 0.0);
  const auto rep = one_step_drift_check(inst, {true, false});
  EXPECT_EQ(rep.drift[encode(inst, {0, 0, 0})], 0.0);
}

TEST(Drift, RejectsWeightedInstances) {
  auto inst = FiniteInstance::uniform(2, 3, 1.0);
  inst.beta = {2.0, 1.0};
  EXPECT_THROW(one_step_drift_check(inst, {true, false}), ValidationError);
}

TEST(MomentCheck, BetaBinomialMoments) {
  const auto rep = stationary_moment_check(MomentCheckConfig{});
  EXPECT_LT(std::abs(rep.mean - 0.3), 0.01);
  EXPECT_LT(std::abs(rep.variance - 0.0728) / 0.0728, 0.10);
  EXPECT_NEAR(rep.target_variance, 0.0728, 1e-12);
}

TEST(MomentCheck, ErrorsShrinkWithBudget) {
  // averaged over seeds so the comparison is about expectation, not luck
  double small = 0.0, large = 0.0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    MomentCheckConfig cfg;
    cfg.seed = seed;
    cfg.steps = 50000;
    small += std::abs(stationary_moment_check(cfg).variance - 0.0728);
    cfg.steps = 1000000;
    large += std::abs(stationary_moment_check(cfg).variance - 0.0728);
  }
  EXPECT_LT(large, small);
}

TEST(MomentCheck, WarnsWhenBudgetTooSmall) {
  MomentCheckConfig cfg;
  cfg.steps = 10000;
  cfg.burn_in = 1000;
  EXPECT_FALSE(stationary_moment_check(cfg).warning.empty());
}

TEST(MomentCheck, FrozenChainsSpreadAcrossSeeds) {
  // theta -> 0 from a monopoly: each run sits on one atom, so across seeds the
  // B-fraction is 0 or 1 and its variance approaches p(1 - p).
  double sum = 0.0, sum_sq = 0.0;
  const int seeds = 400;
  for (int seed = 0; seed < seeds; ++seed) {
    MomentCheckConfig cfg;
    cfg.theta = 1e-9;
    cfg.steps = 200;
    cfg.burn_in = 0;
    cfg.seed = static_cast<std::uint64_t>(seed);
    Rng rng = Rng::stream(static_cast<std::uint64_t>(seed), 99);
    cfg.init = InitSpec::monopoly(rng.uniform());
    const double m = stationary_moment_check(cfg).mean;
    sum += m;
    sum_sq += m * m;
  }
  const double mean = sum / seeds;
  EXPECT_NEAR(sum_sq / seeds - mean * mean, 0.21, 0.04);
}

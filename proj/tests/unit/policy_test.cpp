#include <gtest/gtest.h>

#include <numeric>

#include "mshare/policy.hpp"

using namespace mshare;
using Kind = RemovalPolicy::Kind;

namespace {

std::vector<double> weights(RemovalPolicy p, std::vector<std::size_t> counts) {
  const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  return removal_weights(p, counts, n);
}

}  // namespace

TEST(RemovalWeights, Neutral) {
  const auto w = weights({Kind::neutral}, {5, 1, 2});
  for (double x : w) EXPECT_DOUBLE_EQ(x, 1.0 / 3.0);
}

TEST(RemovalWeights, Proportional) {
  EXPECT_EQ(weights({Kind::proportional}, {2, 1, 1}), (std::vector{0.5, 0.25, 0.25}));
}

TEST(RemovalWeights, Inverse) {
  EXPECT_EQ(weights({Kind::inverse}, {2, 1, 1}), (std::vector{0.25, 0.375, 0.375}));
}

TEST(RemovalWeights, InverseUndefinedForMonopoly) {
  EXPECT_THROW(weights({Kind::inverse}, {4}), UndefinedPolicyError);
}

TEST(RemovalWeights, AntitrustHitsOverThresholdFirm) {
  EXPECT_EQ(weights(RemovalPolicy::antitrust_with(0.3, Kind::neutral), {200, 150, 150}), (std::vector{1.0, 0.0, 0.0}));
}

TEST(RemovalWeights, AntitrustBelowThresholdIsInnerPolicy) {
  for (Kind inner : {Kind::neutral, Kind::proportional, Kind::inverse, Kind::uniform_unit}) {
    EXPECT_EQ(weights(RemovalPolicy::antitrust_with(0.5, inner), {3, 2, 5}), weights({inner}, {3, 2, 5}));
  }
}

TEST(RemovalWeights, AntitrustSplitsOverSeveralLargeFirms) {
  EXPECT_EQ(weights(RemovalPolicy::antitrust_with(0.2, Kind::neutral), {4, 4, 1, 1}), (std::vector{0.5, 0.5, 0.0, 0.0}));
}

TEST(RemovalWeights, SumToOneAndSymmetric) {
  for (Kind k : {Kind::neutral, Kind::proportional, Kind::inverse, Kind::uniform_unit}) {
    const auto w = weights({k}, {3, 1, 3, 5});
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
    EXPECT_EQ(w[0], w[2]);
  }
}

TEST(RemovalPolicy, ValidationAndNames) {
  EXPECT_THROW(RemovalPolicy::antitrust_with(0.0, Kind::neutral).validate(), ValidationError);
  EXPECT_THROW(RemovalPolicy::antitrust_with(0.5, Kind::antitrust).validate(), ValidationError);
  for (Kind k : {Kind::uniform_unit, Kind::neutral, Kind::proportional, Kind::inverse, Kind::antitrust}) {
    EXPECT_EQ(removal_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(removal_kind_from_string("random"), ValidationError);
}

TEST(MigrationKernel, Validation) {
  EXPECT_NO_THROW(MigrationKernel::uniform(3).validate(3));
  EXPECT_NO_THROW(MigrationKernel{}.validate(1));
  EXPECT_THROW((MigrationKernel{{{0.5, 0.5}, {1.0, 0.0}}}).validate(2), ValidationError);
  EXPECT_THROW((MigrationKernel{{{0.0, 0.9}, {1.0, 0.0}}}).validate(2), ValidationError);
  EXPECT_THROW(MigrationKernel{}.validate(2), ValidationError);
  EXPECT_EQ(MigrationKernel{}(0, 0), 0.0);
}

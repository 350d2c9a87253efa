#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "mshare/measures.hpp"
#include "mshare/selection.hpp"

using namespace mshare;

namespace {

double sample_mean(const BaseMeasure& m, std::size_t draws, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0);
  double acc = 0.0;
  for (std::size_t k = 0; k < draws; ++k) acc += sample_base(m, rng).value();
  return acc / static_cast<double>(draws);
}

double ks_statistic(double a, double b, std::size_t draws, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0);
  std::vector<double> xs(draws);
  for (double& x : xs) x = sample_base(BetaBase{a, b}, rng).value();
  std::sort(xs.begin(), xs.end());
  boost::math::beta_distribution<double> dist(a, b);
  double d = 0.0;
  const double n = static_cast<double>(draws);
  for (std::size_t k = 0; k < draws; ++k) {
    const double f = boost::math::cdf(dist, xs[k]);
    d = std::max({d, f - static_cast<double>(k) / n, static_cast<double>(k + 1) / n - f});
  }
  return d;
}

}  // namespace

TEST(BaseMeasure, ValidationRejectsBadParameters) {
  EXPECT_THROW(validate(BaseMeasure(BetaBase{0.0, 1.0})), ValidationError);
  EXPECT_THROW(validate(BaseMeasure(DiscreteBase{{0.2, 0.2}, {0.5, 0.5}})), ValidationError);
  EXPECT_THROW(validate(BaseMeasure(DiscreteBase{{0.2, 0.3}, {0.5, 0.6}})), ValidationError);
  EXPECT_THROW(validate(BaseMeasure(DiscreteBase{{1.2}, {1.0}})), ValidationError);
  EXPECT_NO_THROW(validate(BaseMeasure(DiscreteBase{{0.2, 0.3}, {0.25, 0.75}})));
}

TEST(SampleBase, UniformMean) { EXPECT_NEAR(sample_mean(BetaBase{1.0, 1.0}, 100000, 1), 0.5, 0.01); }

TEST(SampleBase, Beta24Mean) { EXPECT_NEAR(sample_mean(BetaBase{2.0, 4.0}, 100000, 2), 1.0 / 3.0, 0.01); }

TEST(SampleBase, PointMass) {
  Rng rng = Rng::stream(3, 0);
  for (int k = 0; k < 1000; ++k) EXPECT_EQ(sample_base(DiscreteBase{{0.7}, {1.0}}, rng), FirmLabel(0.7));
}

TEST(SampleBase, KolmogorovSmirnovAgainstBetaCdf) {
  EXPECT_LT(ks_statistic(1.0, 1.0, 100000, 4), 0.01);
  EXPECT_LT(ks_statistic(2.0, 4.0, 100000, 5), 0.01);
  EXPECT_LT(ks_statistic(4.0, 2.0, 100000, 6), 0.01);
  EXPECT_LT(ks_statistic(0.5, 0.5, 100000, 7), 0.01);
}

TEST(BaseMean, ClosedForms) {
  EXPECT_DOUBLE_EQ(base_mean(BetaBase{1.0, 1.0}), 0.5);
  EXPECT_DOUBLE_EQ(base_mean(BetaBase{4.0, 2.0}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(base_mean(DiscreteBase{{0.2, 0.8}, {0.5, 0.5}}), 0.5);
}

TEST(Histogram, MonopolyFillsOneBin) {
  const auto h = histogram(MarketConfiguration::from_values(std::vector<double>(500, 0.4)), 15);
  ASSERT_EQ(h.bin_count(), 15u);
  EXPECT_EQ(h.counts[6], 500u);
  EXPECT_EQ(h.total(), 500u);
}

TEST(Histogram, MidpointsGiveOnePerBin) {
  std::vector<double> v;
  for (int k = 0; k < 15; ++k) v.push_back((k + 0.5) / 15.0);
  const auto h = histogram(MarketConfiguration::from_values(v), 15);
  for (std::size_t c : h.counts) EXPECT_EQ(c, 1u);
}

TEST(Histogram, EdgesGoRightAndOneGoesLast) {
  for (std::size_t b : {1u, 3u, 7u, 10u, 15u}) {
    for (std::size_t k = 0; k < b; ++k) EXPECT_EQ(bin_index(static_cast<double>(k) / static_cast<double>(b), b), k);
    EXPECT_EQ(bin_index(1.0, b), b - 1);
  }
}

TEST(Histogram, MatchesBruteForceBinning) {
  Rng rng = Rng::stream(8, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t bins = 1 + rng.index(20);
    std::vector<double> v(1 + rng.index(300));
    for (double& x : v) x = rng.uniform() < 0.2 ? static_cast<double>(rng.index(bins + 1)) / bins : rng.uniform();
    const auto h = histogram(MarketConfiguration::from_values(v), bins);
    std::vector<std::size_t> expect(bins, 0);
    for (double x : v) {
      std::size_t k = bins - 1;
      for (std::size_t j = 0; j < bins; ++j) {
        if (x >= static_cast<double>(j) / bins && x < static_cast<double>(j + 1) / bins) {
          k = j;
          break;
        }
      }
      ++expect[k];
    }
    EXPECT_EQ(h.counts, expect);
    EXPECT_EQ(h.total(), v.size());
  }
}

TEST(Histogram, ZeroBinsRejected) {
  EXPECT_THROW(histogram(MarketConfiguration::from_values(std::vector{0.5}), 0), ValidationError);
}

TEST(EmpiricalView, ExcludesOneUnit) {
  const auto c = MarketConfiguration::from_values(std::vector{0.2, 0.4, 0.4});
  const EmpiricalView all(c);
  const EmpiricalView rest(c, 1);
  EXPECT_EQ(all.size(), 3u);
  EXPECT_EQ(rest.size(), 2u);
  EXPECT_EQ(rest.multiplicity(FirmLabel(0.4)), 1u);
  EXPECT_DOUBLE_EQ(rest.mass(FirmLabel(0.2)), 0.5);
  EXPECT_DOUBLE_EQ(all.mass(FirmLabel(0.4)), 2.0 / 3.0);
}

TEST(WeightedEmpiricalTotal, UnitWeightGivesN) {
  const auto c = MarketConfiguration::from_values(std::vector{0.2, 0.4, 0.4, 0.9, 0.1});
  EXPECT_EQ(weighted_empirical_total(c, UnitSelection{}), 5.0);
  EXPECT_EQ(weighted_empirical_total(c, SigmaSelection{{0.0}}), 5.0);
}

TEST(WeightedEmpiricalTotal, IdentitySumsLabels) {
  const auto c = MarketConfiguration::from_values(std::vector{0.2, 0.4, 0.4});
  EXPECT_NEAR(weighted_empirical_total(c, IdentitySelection{}), 1.0, 1e-15);
}

TEST(WeightedEmpiricalTotal, InverseClusterCountsFirms) {
  Rng rng = Rng::stream(9, 0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + rng.index(60));
    for (double& x : v) x = static_cast<double>(rng.index(9)) / 8.0;
    const auto c = MarketConfiguration::from_values(v);
    EXPECT_NEAR(weighted_empirical_total(c, InverseClusterSelection{}), static_cast<double>(c.firm_count()), 1e-12);
  }
}

TEST(WeightedEmpiricalTotal, PerClusterEqualsPerUnit) {
  Rng rng = Rng::stream(10, 0);
  const SigmaSelection sigma{{0.3, -1.2, 2.0}};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + rng.index(60));
    for (double& x : v) x = static_cast<double>(rng.index(13)) / 12.0;
    const auto c = MarketConfiguration::from_values(v);
    double brute = 0.0;
    for (double x : v) brute += 1.0 + (0.3 - 1.2 * x + 2.0 * x * x) / static_cast<double>(v.size());
    EXPECT_NEAR(weighted_empirical_total(c, sigma), brute, 1e-12);
  }
}

TEST(WeightedEmpiricalTotal, NegativeWeightRejected) {
  const auto c = MarketConfiguration::from_values(std::vector{0.2, 0.4});
  EXPECT_THROW(weighted_empirical_total(c, SigmaSelection{{-5.0}}), ValidationError);
  CustomSelection bad{[](FirmLabel, const EmpiricalView&) { return -1.0; }, 1.0, "neg"};
  EXPECT_THROW(weighted_empirical_total(c, bad), ValidationError);
}

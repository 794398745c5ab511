#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ldc/density.hpp"
#include "ldc/divergence.hpp"
#include "oracles.hpp"

using namespace ldc;

namespace {

std::vector<Density> family_zoo() {
  return {
      Density::gaussian(0.0, 1.0),
      Density::gaussian(3.0, 2.0),
      Density::gaussian(-40.0, 0.01),
      Density::exponential(1.0),
      Density::exponential(7.5),
      Density::laplace(0.5, 2.0),
      Density::uniform(0.0, 1.0),
      Density::uniform(-3.0, 5.0),
      Density::mixture({0.5, 0.5}, {Density::gaussian(-1, 1), Density::gaussian(1, 1)}),
      Density::mixture({0.2, 0.3, 0.5}, {Density::exponential(2.0), Density::uniform(0.0, 3.0), Density::laplace(1, 0.3)}),
  };
}

}  // namespace

TEST(LogDensity, ClosedFormPoints) {
  EXPECT_EQ(Density::uniform(0, 1).log_pdf(0.5), 0.0);
  EXPECT_NEAR(Density::gaussian(0, 1).log_pdf(0.0), -0.9189385332046727, 1e-15);
  EXPECT_EQ(Density::uniform(0, 1).log_pdf(1.5), kNegInf);
  EXPECT_EQ(Density::exponential(2).log_pdf(-1e-300), kNegInf);
  EXPECT_NEAR(Density::exponential(2).log_pdf(0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(Density::laplace(1, 2).log_pdf(3), -std::log(4.0) - 1.0, 1e-15);
}

TEST(LogDensity, FiniteInsideNegInfOutsideNeverNan) {
  oracle::Gen gen(7);
  for (const auto& d : family_zoo()) {
    const auto s = d.support();
    for (int i = 0; i < 2000; ++i) {
      const double x = gen.real(-60.0, 60.0);
      const double v = d.log_pdf(x);
      ASSERT_FALSE(std::isnan(v)) << d.describe();
      if (s.contains(x)) {
        // far Gaussian tails are finite in log space even though pdf underflows
        ASSERT_TRUE(std::isfinite(v)) << d.describe() << " at " << x;
      } else {
        ASSERT_EQ(v, kNegInf) << d.describe() << " at " << x;
      }
    }
    EXPECT_EQ(d.log_pdf(std::nan("")), kNegInf);
  }
}

TEST(LogDensity, MixtureMatchesDirectSum) {
  auto m = Density::mixture({0.25, 0.75}, {Density::gaussian(-1, 0.5), Density::laplace(2, 1)});
  for (double x : {-3.0, -1.0, 0.0, 0.7, 2.0, 9.0}) {
    const double direct = 0.25 * oracle::normal_pdf(x, -1, 0.5) + 0.75 * 0.5 * std::exp(-std::abs(x - 2));
    EXPECT_NEAR(m.log_pdf(x), std::log(direct), 1e-13);
  }
}

TEST(DensityConstruction, RejectsInvalidParameters) {
  EXPECT_THROW(Density::gaussian(0, 0), InvalidInput);
  EXPECT_THROW(Density::gaussian(0, -1), InvalidInput);
  EXPECT_THROW(Density::gaussian(kInf, 1), InvalidInput);
  EXPECT_THROW(Density::exponential(0), InvalidInput);
  EXPECT_THROW(Density::laplace(0, 0), InvalidInput);
  EXPECT_THROW(Density::uniform(1, 1), InvalidInput);
  EXPECT_THROW(Density::uniform(2, 1), InvalidInput);
  EXPECT_THROW(Density::mixture({0.5, 0.4}, {Density::gaussian(0, 1), Density::gaussian(1, 1)}), InvalidInput);
  EXPECT_THROW(Density::mixture({1.5, -0.5}, {Density::gaussian(0, 1), Density::gaussian(1, 1)}), InvalidInput);
  EXPECT_THROW(Density::mixture({1.0}, {Density::gaussian(0, 1), Density::gaussian(1, 1)}), InvalidInput);
  // gap between [0,1] and [2,3]
  EXPECT_THROW(Density::mixture({0.5, 0.5}, {Density::uniform(0, 1), Density::uniform(2, 3)}), InvalidInput);
  auto inner = Density::mixture({1.0}, {Density::gaussian(0, 1)});
  EXPECT_THROW(Density::mixture({1.0}, {inner}), InvalidInput);
}

TEST(DensityConstruction, MixtureSupportIsHull) {
  auto m = Density::mixture({0.5, 0.5}, {Density::uniform(0, 2), Density::exponential(1)});
  EXPECT_EQ(m.support(), (Interval{0.0, kInf}));
  auto u = Density::mixture({0.5, 0.5}, {Density::uniform(0, 2), Density::uniform(1, 3)});
  EXPECT_EQ(u.support(), (Interval{0.0, 3.0}));
}

TEST(NormalizationDefect, Examples) {
  EXPECT_LE(normalization_defect(Density::uniform(0, 1)), 1e-12);
  EXPECT_LE(normalization_defect(Density::gaussian(3, 2)), 1e-8);
  EXPECT_LE(normalization_defect(Density::mixture({0.5, 0.5}, {Density::gaussian(-1, 1), Density::gaussian(1, 1)})),
            1e-8);
}

TEST(NormalizationDefect, EveryFamilyIntegratesToOne) {
  for (const auto& d : family_zoo()) EXPECT_LE(normalization_defect(d), 1e-8) << d.describe();
}

TEST(Sampling, SupportContainmentAndDeterminism) {
  auto u = Density::uniform(0, 1);
  auto s = sample(u, 123, 1000);
  for (double x : s.values) ASSERT_TRUE(x >= 0.0 && x <= 1.0);
  for (const auto& d : family_zoo()) {
    auto a = sample(d, 99, 500, 3);
    auto b = sample(d, 99, 500, 3);
    EXPECT_EQ(a.values, b.values);
    for (double x : a.values) ASSERT_TRUE(d.support().contains(x)) << d.describe();
  }
  EXPECT_THROW(sample(u, 1, 0), InvalidInput);
}

TEST(Sampling, GaussianMeanWithinClt) {
  const std::size_t n = 100000;
  auto s = sample(Density::gaussian(0, 1), 2024, n);
  double mean = 0.0;
  for (double x : s.values) mean += x;
  mean /= n;
  EXPECT_LE(std::abs(mean), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Sampling, StreamsAreDistinctAndPrefixStable) {
  auto d = Density::gaussian(0, 1);
  auto a = sample(d, 5, 100, 0);
  auto b = sample(d, 5, 100, 1);
  EXPECT_NE(a.values, b.values);
  // Drawing in two ranges reproduces a single long draw.
  std::vector<double> split(100);
  CounterRng rng(5, 0);
  sample_into(d, rng, 0, std::span(split).first(37));
  sample_into(d, rng, 37, std::span(split).subspan(37));
  EXPECT_EQ(split, a.values);
}

TEST(Sampling, StreamsAreUncorrelated) {
  auto d = Density::gaussian(0, 1);
  const std::size_t n = 50000;
  auto a = sample(d, 11, n, 0);
  auto b = sample(d, 11, n, 1);
  double c = 0.0;
  for (std::size_t i = 0; i < n; ++i) c += a.values[i] * b.values[i];
  EXPECT_LE(std::abs(c / n), 5.0 / std::sqrt(static_cast<double>(n)));
}

// Empirical mean and variance of 1e5 draws within 5 standard errors of the
// closed-form moments.
TEST(Sampling, MomentsMatchClosedForm) {
  const std::size_t n = 100000;
  for (const auto& d : family_zoo()) {
    auto s = sample(d, 77, n);
    double mean = 0.0;
    for (double x : s.values) mean += x;
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : s.values) {
      const double c = x - d.mean();
      m2 += c * c;
      m4 += c * c * c * c;
    }
    m2 /= n;
    m4 /= n;
    const double se_mean = std::sqrt(d.variance() / n);
    const double se_var = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
    EXPECT_LE(std::abs(mean - d.mean()), 5.0 * se_mean) << d.describe();
    EXPECT_LE(std::abs(m2 - d.variance()), 5.0 * se_var) << d.describe();
  }
}

TEST(Sampling, UniformBitsAreOpenInterval) {
  CounterRng rng(0, 0);
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double u = rng.uniform(i);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Describe, RoundTripsThroughMiniSyntaxShape) {
  EXPECT_EQ(Density::gaussian(0, 1).describe(), "gaussian:0,1");
  EXPECT_EQ(Density::mixture({0.5, 0.5}, {Density::gaussian(-1, 1), Density::exponential(2)}).describe(),
            "mixture:0.5*gaussian:-1,1|0.5*exponential:2");
}

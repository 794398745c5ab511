#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ldc/posterior.hpp"
#include "oracles.hpp"

using namespace ldc;

namespace {

ModelSet two_uniforms() { return ModelSet::uniform({Density::uniform(0, 1), Density::uniform(0, 2)}); }

double total_mass(const PosteriorState& s) {
  auto m = s.masses();
  return std::accumulate(m.begin(), m.end(), 0.0);
}

IndexSet all_of(const PosteriorState& s) {
  IndexSet out(s.size());
  std::iota(out.begin(), out.end(), 0);
  return out;
}

}  // namespace

TEST(Init, PosteriorEqualsPrior) {
  auto s = PosteriorState::init(two_uniforms());
  EXPECT_EQ(s.n(), 0u);
  EXPECT_NEAR(s.masses()[0], 0.5, 1e-15);
  EXPECT_NEAR(s.masses()[1], 0.5, 1e-15);
  auto t = PosteriorState::init(ModelSet({Density::gaussian(0, 1), Density::gaussian(1, 1)}, {0.3, 0.7}));
  EXPECT_NEAR(t.masses()[0], 0.3, 1e-15);
  EXPECT_NEAR(t.masses()[1], 0.7, 1e-15);
  for (double ll : t.log_likelihood()) EXPECT_EQ(ll, 0.0);
}

TEST(Init, ZeroPriorRejected) {
  EXPECT_THROW(
      PosteriorState::init(ModelSet({Density::gaussian(0, 1), Density::gaussian(1, 1), Density::gaussian(2, 1)},
                                    {0.3, 0.7, 0.0})),
      InvalidInput);
}

TEST(Update, HandExample) {
  auto s0 = PosteriorState::init(two_uniforms());
  const double half[] = {0.5};
  auto s1 = s0.update(half);
  EXPECT_NEAR(s1.masses()[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(s1.masses()[1], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(subset_mass(s1, {0}), 2.0 / 3.0, 1e-12);
  const double out[] = {1.5};
  auto s2 = s1.update(out);
  EXPECT_EQ(s2.masses()[0], 0.0);
  EXPECT_EQ(s2.masses()[1], 1.0);
  EXPECT_EQ(s2.log_likelihood()[0], kNegInf);
  // eliminated model stays eliminated
  const double back[] = {0.5, 0.25};
  auto s3 = s2.update(back);
  EXPECT_EQ(s3.log_likelihood()[0], kNegInf);
  EXPECT_EQ(s3.masses()[1], 1.0);
  EXPECT_EQ(s0.n(), 0u);  // update returns a new state
  EXPECT_EQ(s3.n(), 4u);
}

TEST(Update, IdenticalModelsKeepPrior) {
  auto d = Density::gaussian(0.3, 1.2);
  auto s = PosteriorState::init(ModelSet({d, d}, {0.3, 0.7}));
  auto smp = sample(Density::gaussian(0, 1), 8, 1000);
  s.absorb(smp.values);
  EXPECT_NEAR(s.masses()[0], 0.3, 1e-12);
  EXPECT_NEAR(s.masses()[1], 0.7, 1e-12);
}

TEST(SubsetMass, FullAndEmpty) {
  auto s = PosteriorState::init(two_uniforms());
  const double x[] = {0.2, 0.9};
  s.absorb(x);
  EXPECT_NEAR(subset_mass(s, all_of(s)), 1.0, 1e-15);
  EXPECT_EQ(subset_mass(s, {}), 0.0);
  EXPECT_THROW(subset_mass(s, {5}), InvalidInput);
}

TEST(RateStatistic, Basics) {
  auto s = PosteriorState::init(two_uniforms());
  EXPECT_THROW(rate_statistic(s, {0}), InvalidInput);
  const double x[] = {0.5, 1.5};
  s.absorb(x);
  EXPECT_NEAR(rate_statistic(s, all_of(s)), 0.0, 1e-15);
  EXPECT_EQ(rate_statistic(s, {0}), kNegInf);
}

TEST(RateStatistic, MeasurableBeyondUnderflow) {
  auto m = ModelSet::uniform({Density::gaussian(1, 1), Density::gaussian(2, 1)});
  auto s = PosteriorState::init(m);
  auto smp = sample(Density::gaussian(0, 1), 3, 10000);
  s.absorb(smp.values);
  EXPECT_EQ(subset_mass(s, {1}), 0.0);  // underflows in linear space
  const double rate = rate_statistic(s, {1});
  EXPECT_TRUE(std::isfinite(rate));
  EXPECT_NEAR(rate, -1.5, 0.05);
}

TEST(Sandwich, ExamplesAtZeroObservations) {
  const std::size_t k = 5;
  std::vector<Density> ds;
  for (std::size_t i = 0; i < k; ++i) ds.push_back(Density::gaussian(static_cast<double>(i), 1));
  auto s = PosteriorState::init(ModelSet::uniform(ds));
  auto b = sandwich_bounds(s, {2});
  EXPECT_NEAR(b.lower, 1.0 / k, 1e-15);
  EXPECT_EQ(b.upper, 1.0);

  auto single = PosteriorState::init(ModelSet::uniform({Density::gaussian(0, 1)}));
  const double x[] = {0.1, -0.4};
  single.absorb(x);
  auto sb = sandwich_bounds(single, {0});
  EXPECT_EQ(sb.lower, 1.0);
  EXPECT_EQ(sb.upper, 1.0);
}

TEST(Sandwich, EliminatedSubset) {
  auto s = PosteriorState::init(two_uniforms());
  const double x[] = {1.5};
  s.absorb(x);
  auto b = sandwich_bounds(s, {0});
  EXPECT_EQ(b.lower, 0.0);
  EXPECT_EQ(b.upper, 0.0);
  EXPECT_EQ(subset_mass(s, {0}), 0.0);
}

TEST(Properties, NormalizationAndExactDecomposition) {
  oracle::Gen gen(51);
  std::vector<Density> ds;
  for (int i = 0; i < 8; ++i) ds.push_back(Density::gaussian(gen.real(-2, 2), gen.real(0.5, 2)));
  std::vector<double> w;
  for (int i = 0; i < 8; ++i) w.push_back(gen.real(0.01, 1));
  auto s = PosteriorState::init(ModelSet::from_weights(ds, w));
  auto smp = sample(Density::laplace(0, 1), 4, 2000);
  for (std::size_t off = 0; off < smp.values.size(); off += 100) {
    s.absorb(std::span<const double>(smp.values).subspan(off, 100));
    EXPECT_NEAR(total_mass(s), 1.0, 1e-12);
    for (std::size_t i = 0; i < s.size(); ++i)
      EXPECT_EQ(s.log_posterior()[i], s.log_prior()[i] + s.log_likelihood()[i] - s.log_normalizer());
  }
}

TEST(Properties, BatchInvarianceIsExact) {
  auto m = ModelSet::uniform({Density::gaussian(-1, 1), Density::laplace(0.5, 2), Density::uniform(-3, 3)});
  auto smp = sample(Density::gaussian(0, 1), 17, 777);
  std::span<const double> all(smp.values);
  auto whole = PosteriorState::init(m).update(all);
  auto parts = PosteriorState::init(m).update(all.first(300)).update(all.subspan(300));
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_EQ(whole.log_likelihood()[i], parts.log_likelihood()[i]);
    EXPECT_EQ(whole.log_posterior()[i], parts.log_posterior()[i]);
  }
}

TEST(Properties, ScalingPriorWeightsLeavesPosteriorUnchanged) {
  std::vector<Density> ds{Density::gaussian(-1, 1), Density::gaussian(0.5, 1), Density::gaussian(2, 1)};
  auto a = PosteriorState::init(ModelSet::from_weights(ds, {1, 2, 3}));
  auto b = PosteriorState::init(ModelSet::from_weights(ds, {2, 4, 6}));
  auto smp = sample(Density::gaussian(0, 1), 1, 300);
  a.absorb(smp.values);
  b.absorb(smp.values);
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_NEAR(a.masses()[i], b.masses()[i], 1e-14);
}

// The displayed inequality of the consistency proof, checked directly on
// random scenarios, checkpoints and subsets.
TEST(Properties, SandwichHoldsEverywhere) {
  oracle::Gen gen(61);
  for (int sc = 0; sc < 20; ++sc) {
    const std::size_t k = 2 + gen.index(6);
    std::vector<Density> ds;
    std::vector<double> w;
    for (std::size_t i = 0; i < k; ++i) {
      ds.push_back(gen.coin() ? Density::gaussian(gen.real(-2, 2), gen.real(0.5, 2))
                              : Density::laplace(gen.real(-2, 2), gen.real(0.5, 2)));
      w.push_back(gen.real(0.01, 1));
    }
    auto s = PosteriorState::init(ModelSet::from_weights(ds, w));
    auto smp = sample(Density::gaussian(gen.real(-1, 1), 1), sc, 500);
    for (std::size_t off = 0; off < 500; off += 50) {
      s.absorb(std::span<const double>(smp.values).subspan(off, 50));
      for (int t = 0; t < 10; ++t) {
        IndexSet idx;
        for (std::size_t i = 0; i < k; ++i)
          if (gen.coin()) idx.push_back(i);
        if (idx.empty()) idx.push_back(gen.index(k));
        const double mass = subset_mass(s, idx);
        auto b = sandwich_bounds(s, idx);
        EXPECT_LE(b.lower, mass * (1 + 1e-12));
        EXPECT_GE(b.upper * (1 + 1e-12), mass);
        const double lm = log_subset_mass(s, idx);
        EXPECT_LE(b.log_lower, lm + 1e-12);
        EXPECT_GE(b.log_upper + 1e-12, lm);
      }
    }
  }
}

TEST(Properties, ComplementOfProjectionDecays) {
  auto m = ModelSet::uniform({Density::gaussian(1, 1), Density::gaussian(2, 1), Density::gaussian(-1.5, 1)});
  auto s = PosteriorState::init(m);
  auto smp = sample(Density::gaussian(0, 1), 99, 5000);
  s.absorb(smp.values);
  EXPECT_LE(rate_statistic(s, {1, 2}), 0.0);
  EXPECT_LT(rate_statistic(s, {1, 2}), -0.1);
}

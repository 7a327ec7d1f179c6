#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "icp/front_chain.hpp"
#include "icp/rng.hpp"
#include "icp/stats.hpp"
#include "oracles.hpp"

namespace icp {
namespace {

FrontChain homogeneous_front(double lambda) {
  return FrontChain::from_params({lambda, RateProfile::homogeneous(0.5, 1.0), 0});
}

TEST(FrontChain, RatesFollowProfile) {
  const auto chain = FrontChain::from_params({3.0, RateProfile::power(1, 0, 1, 1), 0});
  EXPECT_EQ(chain.birth(0), 3.0);
  EXPECT_DOUBLE_EQ(chain.birth(2), 1.0);
  EXPECT_EQ(chain.death(2), 1.0);
}

TEST(FrontChain, RejectsNonPositiveRates) {
  EXPECT_THROW(FrontChain::from_params({0.0, RateProfile::one_sided(), 0}), std::invalid_argument);
  EXPECT_THROW(FrontChain::constant(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(FrontChain::constant(1.0, -1.0), std::invalid_argument);
}

TEST(SeriesTest, SubcriticalRatioDiverges) {
  const auto r = series_test(homogeneous_front(1.0), 1000);
  EXPECT_EQ(r.verdict, SeriesVerdict::Diverges);
  EXPECT_DOUBLE_EQ(r.tail_ratio, 2.0);
  EXPECT_FALSE(r.by_partial_sums);
}

TEST(SeriesTest, GeometricSeriesConverges) {
  const auto r = series_test(homogeneous_front(4.0), 1000);
  EXPECT_EQ(r.verdict, SeriesVerdict::Converges);
  EXPECT_DOUBLE_EQ(r.tail_ratio, 0.5);
  // sum_{i>=1} 2^-i over 1000 terms.
  EXPECT_NEAR(std::exp(r.log_partial_sum), 1.0, 1e-12);
}

TEST(SeriesTest, UnitRatioDivergesThroughPartialSums) {
  const Site terms = 1000;
  const auto r = series_test(homogeneous_front(2.0), terms);
  EXPECT_EQ(r.verdict, SeriesVerdict::Diverges);
  EXPECT_TRUE(r.by_partial_sums);
  // Every term is exactly 1, so the partial sum is the term count.
  EXPECT_NEAR(std::exp(r.log_partial_sum), double(terms), 1e-6);
}

TEST(SeriesTest, RatioTendingToOneFromBelowIsInconclusive) {
  // Ratios sit within 1e-6 of 1 without reaching it.
  const FrontChain chain([](Site n) { return 1.0 + 1e-7 / (n + 1.0); }, [](Site) { return 1.0; });
  EXPECT_EQ(series_test(chain, 2000).verdict, SeriesVerdict::Inconclusive);
}

TEST(SeriesTest, TailRatioMatchesInverseOfLambdaEll) {
  struct Case {
    RateProfile profile;
    double lambda;
  };
  const Case cases[] = {{RateProfile::homogeneous(0.5, 1.0), 3.0},
                        {RateProfile::homogeneous(0.25, 2.0), 5.0},
                        {RateProfile::one_sided(), 1.7},
                        {RateProfile::power(1, 1, 1, 1), 5.0},
                        {RateProfile::power(0.5, 0.5, 0.4, 2.0), 2.0}};
  for (const auto& c : cases) {
    const double ell = *c.profile.declared_limit();
    const auto r = series_test(FrontChain::from_params({c.lambda, c.profile, 0}), 10000);
    EXPECT_LT(std::abs(r.tail_ratio - 1.0 / (c.lambda * ell)), 1e-6) << to_string(c.profile.kind());
  }
}

TEST(SeriesTest, LimitZeroAlwaysDiverges) {
  for (double lambda : {0.1, 5.0, 20.0, 1000.0}) {
    EXPECT_EQ(series_test(FrontChain::from_params({lambda, RateProfile::power(1, 0, 1, 1), 0}), 10000).verdict,
              SeriesVerdict::Diverges);
  }
}

TEST(SeriesTest, RejectsTooFewTerms) {
  EXPECT_THROW(series_test(homogeneous_front(1.0), 1), std::invalid_argument);
}

TEST(AbsorptionProbability, SupercriticalConstantChain) {
  // b = 2, d = 1 from front site 0: g_i = 2^-i, absorption = 1/2.
  const auto chain = FrontChain::constant(2.0, 1.0);
  const auto br = absorption_probability(chain, 0, 64);
  EXPECT_LE(br.lower, 0.5);
  EXPECT_GE(br.upper, 0.5);
  EXPECT_LT(br.width(), 1e-9);
  EXPECT_EQ(br.truncation, 64u);

  // From front site 1 two net downward steps are needed.
  const auto br1 = absorption_probability(chain, 1, 64);
  EXPECT_NEAR(br1.midpoint(), 0.25, 1e-12);
}

TEST(AbsorptionProbability, LowerBoundEqualsDenseSolve) {
  const std::vector<FrontChain> chains = {
      FrontChain::constant(2.0, 1.0),
      FrontChain::constant(1.0, 1.0),
      FrontChain::constant(1.0, 3.0),
      FrontChain::from_params({2.5, RateProfile::power(0.5, 0.5, 1.0, 1.0), 0}),
      FrontChain::from_params({0.5, RateProfile::power(0, 1, 0.5, 1), 0}),
  };
  for (const auto& chain : chains) {
    for (Site m : {8u, 30u, 60u}) {
      const auto h = oracle::absorption_before([&](std::size_t n) { return chain.birth(n); },
                                               [&](std::size_t n) { return chain.death(n); }, m);
      for (Site start : {Site(0), Site(3), m - 2}) {
        EXPECT_NEAR(absorption_probability(chain, start, m).lower, h[start], 1e-10)
            << "m=" << m << " start=" << start;
      }
    }
  }
}

TEST(AbsorptionProbability, NegativeDriftIsCertain) {
  const auto br = absorption_probability(FrontChain::constant(1.0, 2.0), 3, 64);
  EXPECT_GE(br.lower, 1.0 - 1e-12);
  EXPECT_EQ(br.upper, 1.0);
}

TEST(AbsorptionProbability, CriticalChainApproachesOneWithTruncation) {
  const auto chain = FrontChain::constant(1.0, 1.0);
  double prev = 0.0;
  for (Site m : {10u, 100u, 1000u, 10000u}) {
    const auto br = absorption_probability(chain, 2, m);
    EXPECT_EQ(br.upper, 1.0);
    // Gambler's ruin with absorbing barriers at -1 and m: (m - start) / (m + 1).
    EXPECT_NEAR(br.lower, double(m - 2) / double(m + 1), 1e-12);
    EXPECT_GT(br.lower, prev);
    prev = br.lower;
  }
}

TEST(AbsorptionProbability, BracketShrinksWithTruncation) {
  const auto chain = FrontChain::from_params({3.0, RateProfile::homogeneous(0.5, 1.0), 0});  // ratio 2/3
  double prev = 2.0;
  for (Site m : {8u, 16u, 32u, 64u}) {
    const auto br = absorption_probability(chain, 1, m);
    EXPECT_LE(br.lower, br.upper);
    EXPECT_LT(br.width(), prev);
    prev = br.width();
  }
  EXPECT_LT(prev, 1e-9);
}

TEST(AbsorptionProbability, DivergentSeriesForcesUpperToOne) {
  const auto chain = homogeneous_front(1.5);
  ASSERT_EQ(series_test(chain, 1000).verdict, SeriesVerdict::Diverges);
  const auto br = absorption_probability(chain, 0, 200);
  EXPECT_EQ(br.upper, 1.0);
  EXPECT_GE(br.lower, 1.0 - 1e-9);
}

TEST(AbsorptionProbability, RejectsSmallTruncation) {
  EXPECT_THROW(absorption_probability(FrontChain::constant(2, 1), 5, 6), std::invalid_argument);
}

TEST(SimulateFront, DeterministicGivenSeed) {
  const auto chain = FrontChain::constant(2.0, 1.0);
  const StopRule stop{100.0, Site(50)};
  EXPECT_EQ(simulate_front(chain, 0, stop, 77), simulate_front(chain, 0, stop, 77));
}

TEST(SimulateFront, AbsorptionFrequencyMatchesBracket) {
  const auto chain = FrontChain::constant(2.0, 1.0);
  const StopRule stop{1000.0, Site(200)};
  const std::uint64_t n = 20000;
  std::uint64_t absorbed = 0;
  for (std::uint64_t k = 0; k < n; ++k) absorbed += !simulate_front(chain, 0, stop, derive_seed(3, k)).survived();
  const auto ci = wilson_interval(absorbed, n, 0.997);
  EXPECT_TRUE(ci.contains(absorption_probability(chain, 0, 64).midpoint())) << absorbed;
}

TEST(SimulateFront, JumpFrequenciesMatchRates) {
  const auto chain = FrontChain::from_params({2.0, RateProfile::power(0.5, 0.5, 1.0, 1.0), 0});
  std::map<Site, std::pair<std::uint64_t, std::uint64_t>> counts;  // site -> (up, total)
  for (std::uint64_t k = 0; k < 4000; ++k) {
    Site n = 0;
    const TraceSink sink = [&](const TraceEvent& e) {
      auto& c = counts[n];
      ++c.second;
      if (e.kind == EventKind::Birth) {
        ++c.first;
        n = e.site;
      } else {
        n = e.site == 0 ? 0 : e.site - 1;
      }
    };
    simulate_front(chain, 0, {50.0, Site(40)}, derive_seed(11, k), &sink);
  }
  for (Site s = 0; s < 5; ++s) {
    const auto [up, total] = counts[s];
    ASSERT_GT(total, 500u);
    const double expected = chain.birth(s) / (chain.birth(s) + chain.death(s));
    EXPECT_TRUE(wilson_interval(up, total, 0.99).contains(expected)) << "site " << s;
  }
}

}  // namespace
}  // namespace icp

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "icp/coupling.hpp"
#include "icp/experiments.hpp"
#include "icp/rng.hpp"

namespace icp {
namespace {

TEST(Wilson, KnownValues) {
  // 95%: z = 1.959964; 5/10 -> [0.2366, 0.7634].
  const auto ci = wilson_interval(5, 10, 0.95);
  EXPECT_NEAR(ci.lo, 0.236593, 1e-6);
  EXPECT_NEAR(ci.hi, 0.763407, 1e-6);
  EXPECT_NEAR(normal_two_sided_z(0.95), 1.959964, 1e-6);
  EXPECT_NEAR(normal_two_sided_z(0.997), 2.967738, 1e-6);
}

TEST(Wilson, ExtremesAreWellFormed) {
  for (std::uint64_t n : {1u, 2u, 10u, 10000u}) {
    for (std::uint64_t k : {std::uint64_t(0), n / 2, n}) {
      const auto ci = wilson_interval(k, n);
      const double p = double(k) / double(n);
      EXPECT_LE(0.0, ci.lo);
      EXPECT_LE(ci.lo, p);
      EXPECT_LE(p, ci.hi);
      EXPECT_LE(ci.hi, 1.0);
    }
  }
  EXPECT_EQ(wilson_interval(0, 10).lo, 0.0);
  EXPECT_EQ(wilson_interval(10, 10).hi, 1.0);
  EXPECT_THROW(wilson_interval(0, 0), std::invalid_argument);
  EXPECT_THROW(wilson_interval(3, 2), std::invalid_argument);
}

TEST(EstimateSurvival, SingleRunGivesZeroOrOne) {
  const auto e = estimate_survival({3.0, RateProfile::one_sided(), 0}, {50.0, std::nullopt}, 1, 9);
  EXPECT_TRUE(e.p_hat == 0.0 || e.p_hat == 1.0);
  EXPECT_LE(0.0, e.wilson_lo);
  EXPECT_LE(e.wilson_lo, e.p_hat);
  EXPECT_LE(e.p_hat, e.wilson_hi);
  EXPECT_LE(e.wilson_hi, 1.0);
  EXPECT_THROW(estimate_survival({3.0, RateProfile::one_sided(), 0}, {50.0, std::nullopt}, 0, 9),
               std::invalid_argument);
}

TEST(EstimateSurvival, SubcriticalHomogeneousDiesOut) {
  const auto e = estimate_survival({0.5, RateProfile::homogeneous(0.5, 1.0), 0}, {500.0, Site(1000)}, 10000, 1);
  EXPECT_LE(e.p_hat, 0.005);
}

TEST(EstimateSurvival, SupercriticalOneSidedSurvives) {
  const auto e = estimate_survival({6.0, RateProfile::one_sided(), 0}, {200.0, Site(400)}, 10000, 2);
  EXPECT_GT(e.p_hat, 0.1);
}

TEST(EstimateSurvival, DeterministicAndIndependentOfThreadCount) {
  const ModelParams params{3.4, RateProfile::homogeneous(0.5, 1.0), 0};
  const StopRule stop{40.0, Site(80)};
  const auto a = estimate_survival(params, stop, 400, 77, 0.95, 1);
  const auto b = estimate_survival(params, stop, 400, 77, 0.95, 4);
  EXPECT_EQ(a, b);
}

TEST(EstimateSurvival, AggregationIgnoresReplicaOrder) {
  const ModelParams params{3.4, RateProfile::homogeneous(0.5, 1.0), 0};
  const StopRule stop{40.0, Site(80)};
  std::vector<std::uint64_t> order(300);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(5);
  std::shuffle(order.begin(), order.end(), shuffle_rng);
  std::uint64_t alive = 0;
  for (auto k : order) alive += simulate_run(params, stop, derive_seed(123, k)).survived();
  EXPECT_EQ(estimate_survival(params, stop, 300, 123).alive, alive);
}

TEST(Sweep, EmptyGridGivesEmptyResult) {
  EXPECT_TRUE(sweep(RateProfile::one_sided(), 0, {}, {10.0, std::nullopt}, 10, 1).estimates.empty());
}

TEST(Sweep, RejectsUnsortedGrid) {
  const double grid[] = {2.0, 1.0};
  EXPECT_THROW(sweep(RateProfile::one_sided(), 0, grid, {10.0, std::nullopt}, 10, 1), std::invalid_argument);
}

TEST(Sweep, SharedRandomnessIsExactlyMonotone) {
  const double grid[] = {0.5, 1.0, 2.0, 4.0, 8.0};
  const auto res = sweep(RateProfile::homogeneous(0.5, 1.0), 0, grid, {100.0, Site(200)}, 400, 3, true, 0.95, true);
  ASSERT_EQ(res.estimates.size(), 5u);
  EXPECT_EQ(res.monotonicity_exceptions, 0u);
  EXPECT_EQ(res.containment_violations, 0u);
  for (std::size_t i = 1; i < 5; ++i) EXPECT_LE(res.estimates[i - 1].alive, res.estimates[i].alive);
}

TEST(Sweep, EndpointsFollowTheRegimeBounds) {
  const double grid[] = {0.5, 1.0, 2.0, 4.0, 8.0};
  const auto res = sweep(RateProfile::homogeneous(0.5, 1.0), 0, grid, {200.0, Site(400)}, 1000, 4, true);
  EXPECT_LT(res.estimates.front().p_hat, 0.01);
  EXPECT_GT(res.estimates.back().p_hat, 0.2);
}

TEST(EstimateLambdaC, NeverSurvivesWhenEllIsZero) {
  CriticalSearchOptions opt;
  opt.runs_per_probe = 200;
  opt.max_runs = 200;
  opt.max_horizon = 100.0;
  opt.lambda_lo = 0.5;
  opt.lambda_hi = 1.0;
  opt.lambda_max = 4.0;
  const auto br = estimate_lambda_c(RateProfile::power(1, 0, 1, 1), 0, {100.0, Site(200)}, opt, 1);
  EXPECT_EQ(br.status, CriticalStatus::NeverSurvives);
  EXPECT_FALSE(br.resolved());
  for (const auto& p : br.probes) EXPECT_EQ(p.decision, ProbeDecision::DiesOut);
}

TEST(EstimateLambdaC, AlwaysSurvivesIsFlagged) {
  // lambda * p/delta grows without bound, so every start far enough right survives.
  CriticalSearchOptions opt;
  opt.runs_per_probe = 200;
  opt.max_runs = 200;
  opt.max_horizon = 50.0;
  opt.lambda_lo = 0.5;
  opt.lambda_hi = 1.0;
  opt.lambda_min = 0.1;
  const auto br = estimate_lambda_c(RateProfile::power(0, 1, 0.5, 1), 400, {50.0, Site(800)}, opt, 2);
  EXPECT_EQ(br.status, CriticalStatus::AlwaysSurvives);
}

TEST(EstimateLambdaC, BisectionBracketsOneSidedThreshold) {
  CriticalSearchOptions opt;
  opt.runs_per_probe = 400;
  opt.max_runs = 1600;
  opt.max_horizon = 200.0;
  opt.tol = 0.5;
  opt.lambda_lo = 2.0;
  opt.lambda_hi = 5.0;
  const auto br = estimate_lambda_c(RateProfile::one_sided(), 0, {100.0, Site(200)}, opt, 3);
  ASSERT_TRUE(br.resolved()) << to_string(br.status);
  EXPECT_LE(br.width(), 0.5);
  EXPECT_GT(br.lo, 2.0);
  EXPECT_LT(br.hi, 4.0);
  // Probe decisions are consistent with the bracket.
  for (const auto& p : br.probes) {
    if (p.decision == ProbeDecision::Survives) EXPECT_GE(p.estimate.lambda, br.hi);
    if (p.decision == ProbeDecision::DiesOut) EXPECT_LE(p.estimate.lambda, br.lo);
  }
}

TEST(Verdict, EllZeroDiesOutForAllLambda) {
  const auto v = regime_verdict(RateProfile::power(1, 0, 1, 1), 100.0, {3.0, 3.5});
  EXPECT_EQ(v.regime, Regime::DiesOutAllLambda);
  EXPECT_EQ(v.ell, 0.0);
  EXPECT_TRUE(v.below_window);
  EXPECT_EQ(v.series, SeriesVerdict::Diverges);
  EXPECT_TRUE(v.coherent);
}

TEST(Verdict, EllInfiniteSurvivesForAllLambda) {
  const auto v = regime_verdict(RateProfile::power(0, 1, 0.5, 1), 0.01, {3.0, 3.5});
  EXPECT_EQ(v.regime, Regime::SurvivesAllLambda);
  EXPECT_TRUE(v.above_window);
  EXPECT_FALSE(v.below_window);
}

TEST(Verdict, FiniteEllGivesWindow) {
  const Interval lc{3.1, 3.4};
  for (double lambda : {0.5, 1.5, 3.0, 7.0, 20.0}) {
    const auto v = regime_verdict(RateProfile::homogeneous(0.5, 1.0), lambda, lc);
    EXPECT_EQ(v.regime, Regime::PhaseTransition);
    EXPECT_EQ(v.window_lo, 2.0);
    EXPECT_EQ(v.window_hi, 2.0 * lc.hi);
    EXPECT_EQ(v.below_window, lambda < 2.0);
    EXPECT_EQ(v.above_window, lambda > 6.8);
    EXPECT_EQ(v.inside_window, lambda >= 2.0 && lambda <= 6.8);
    EXPECT_TRUE(v.coherent);
  }
}

TEST(Verdict, InconclusiveEllIsUnclassifiable) {
  std::vector<double> ps{1.0};
  for (int i = 0; i < 200000; ++i) ps.push_back(i % 2 ? 0.6 : 0.4);
  const auto tab = RateProfile::tabulated(ps, std::vector<double>(ps.size(), 1.0));
  const auto v = regime_verdict(tab, 2.0, {3.0, 3.5});
  EXPECT_EQ(v.regime, Regime::Unclassifiable);
  EXPECT_FALSE(v.ell.has_value());
}

TEST(Verdict, AboveWindowImpliesEmbeddedChainFromFoundN) {
  const Interval lc{3.1, 3.4};
  const auto prof = RateProfile::homogeneous(0.5, 1.0);
  const double lambda = 8.0;
  const auto v = regime_verdict(prof, lambda, lc);
  ASSERT_TRUE(v.above_window);
  const double lambda_prime = 0.5 * (lc.hi + lambda * *v.ell);
  const auto n = find_N(prof, lambda, lambda_prime, 10000);
  ASSERT_TRUE(n);
  EXPECT_TRUE(embedded_chain_check({lambda, prof, 0}, lambda_prime, *n, 10000).passed());
}

}  // namespace
}  // namespace icp

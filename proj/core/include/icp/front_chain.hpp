#pragma once

#include <cstdint>
#include <functional>
#include <string_view>

#include "icp/model.hpp"
#include "icp/simulator.hpp"

namespace icp {

/// Rightmost occupied site of the dominating "filled-to-the-left" process,
/// viewed as a birth-death chain on {0, 1, 2, ...}. From state n it moves to
/// n+1 at rate birth(n) and to n-1 at rate death(n); the death clock firing
/// in state 0 kills the chain (absorption).
class FrontChain {
 public:
  using RateFn = std::function<double(Site)>;

  /// birth(n) = lambda * p_up(n), death(n) = delta(n).
  static FrontChain from_params(const ModelParams& params);
  /// Constant rates; both must be positive.
  static FrontChain constant(double birth, double death);
  /// Arbitrary rate functions. Rates at 0 are checked eagerly; the rest are
  /// checked lazily when evaluated.
  FrontChain(RateFn birth, RateFn death);

  double birth(Site n) const;
  double death(Site n) const;
  /// death(n) / birth(n); the term ratio of the absorption series.
  double ratio(Site n) const { return death(n) / birth(n); }

 private:
  RateFn birth_;
  RateFn death_;
};

enum class SeriesVerdict { Diverges, Converges, Inconclusive };
std::string_view to_string(SeriesVerdict v);

struct SeriesTestResult {
  SeriesVerdict verdict = SeriesVerdict::Inconclusive;
  /// Term ratio death(i)/birth(i) at the last inspected index.
  double tail_ratio = 0.0;
  double tail_ratio_min = 0.0;
  double tail_ratio_max = 0.0;
  /// log of the partial sum of the first max_terms terms.
  double log_partial_sum = 0.0;
  /// Diverges was reached through the partial-sum threshold, not the ratio test.
  bool by_partial_sums = false;
};

inline constexpr double kSeriesEpsilon = 1e-6;
inline constexpr double kDivergenceThreshold = 1e12;
/// Number of further terms over which a non-decreasing tail is extrapolated
/// when comparing against kDivergenceThreshold.
inline constexpr double kExtrapolationTerms = 1e15;

/// Ratio test on sum_{i>=1} prod_{j=1..i} death(j)/birth(j), whose divergence
/// is equivalent to certain absorption of the chain.
///
/// Ratios are inspected over i in [max_terms/2, max_terms]. Diverges when the
/// smallest tail ratio exceeds 1+eps, or when every tail ratio is >= 1 (terms
/// non-decreasing) and the partial sum, extrapolated with the smallest tail
/// term, passes kDivergenceThreshold. Converges when the largest tail ratio
/// is below 1-eps. Inconclusive otherwise.
SeriesTestResult series_test(const FrontChain& chain, Site max_terms);

struct AbsorptionBracket {
  double lower = 0.0;
  double upper = 1.0;
  Site truncation = 0;

  double width() const noexcept { return upper - lower; }
  double midpoint() const noexcept { return 0.5 * (lower + upper); }
};

/// Enclosure of P(chain started at `start` is eventually absorbed).
///
/// Writing g_0 = 1, g_i = prod_{k<i} death(k)/birth(k), the absorption
/// probability is sum_{i>start} g_i / sum_{i>=0} g_i. The lower bound stops
/// at i = truncation (the chain is treated as surviving once it reaches the
/// truncation site); it equals the gambler's-ruin probability of dying before
/// hitting that site. The upper bound adds a geometric bound on the tail
/// sum_{i>truncation} g_i using the largest ratio on [truncation,
/// 2*truncation], valid when ratios do not increase beyond the truncation; if
/// that ratio is >= 1 or the series test reports divergence the upper bound
/// is 1. All products are accumulated in log space.
AbsorptionBracket absorption_probability(const FrontChain& chain, Site start, Site truncation);

/// Exact trajectory of the chain. Births are reported at the new front site,
/// deaths at the site the front leaves.
RunResult simulate_front(const FrontChain& chain, Site start, const StopRule& stop, std::uint64_t seed,
                         const TraceSink* sink = nullptr);

}  // namespace icp

#include "icp/front_chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace icp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Running log(sum exp(x_i)) with a max shift.
class LogSum {
 public:
  void add(double log_term) {
    if (log_term == kNegInf) return;
    if (log_term <= max_) {
      acc_ += std::exp(log_term - max_);
    } else {
      acc_ = acc_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    }
  }
  double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(acc_); }

 private:
  double max_ = kNegInf;
  double acc_ = 0.0;
};

void check_rate(double r, const char* which, Site n) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument(std::string("front chain: ") + which + " rate must be positive at site " +
                                std::to_string(n));
  }
}

}  // namespace

std::string_view to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::Diverges: return "diverges";
    case SeriesVerdict::Converges: return "converges";
    case SeriesVerdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

FrontChain::FrontChain(RateFn birth, RateFn death) : birth_(std::move(birth)), death_(std::move(death)) {
  if (!birth_ || !death_) throw std::invalid_argument("front chain: rate functions must be set");
  check_rate(birth_(0), "birth", 0);
  check_rate(death_(0), "death", 0);
}

FrontChain FrontChain::from_params(const ModelParams& params) {
  params.validate();
  const double lambda = params.lambda;
  RateProfile profile = params.profile;
  return FrontChain([lambda, profile](Site n) { return lambda * profile.p_up(n); },
                    [profile](Site n) { return profile.delta(n); });
}

FrontChain FrontChain::constant(double birth, double death) {
  return FrontChain([birth](Site) { return birth; }, [death](Site) { return death; });
}

double FrontChain::birth(Site n) const {
  const double r = birth_(n);
  check_rate(r, "birth", n);
  return r;
}

double FrontChain::death(Site n) const {
  const double r = death_(n);
  check_rate(r, "death", n);
  return r;
}

SeriesTestResult series_test(const FrontChain& chain, Site max_terms) {
  if (max_terms < 2) throw std::invalid_argument("series_test: max_terms must be >= 2");
  SeriesTestResult res;
  const Site tail_start = std::max<Site>(1, max_terms / 2);

  LogSum partial;
  double log_term = 0.0;
  double min_tail_log_term = std::numeric_limits<double>::infinity();
  double rmin = std::numeric_limits<double>::infinity();
  double rmax = 0.0;
  for (Site i = 1; i <= max_terms; ++i) {
    const double r = chain.ratio(i);
    log_term += std::log(r);
    partial.add(log_term);
    if (i >= tail_start) {
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      min_tail_log_term = std::min(min_tail_log_term, log_term);
    }
    res.tail_ratio = r;
  }
  res.tail_ratio_min = rmin;
  res.tail_ratio_max = rmax;
  res.log_partial_sum = partial.value();

  if (rmin > 1.0 + kSeriesEpsilon) {
    res.verdict = SeriesVerdict::Diverges;
  } else if (rmax < 1.0 - kSeriesEpsilon) {
    res.verdict = SeriesVerdict::Converges;
  } else if (rmin >= 1.0) {
    LogSum projected;
    projected.add(res.log_partial_sum);
    projected.add(min_tail_log_term + std::log(kExtrapolationTerms));
    if (projected.value() > std::log(kDivergenceThreshold)) {
      res.verdict = SeriesVerdict::Diverges;
      res.by_partial_sums = true;
    }
  }
  return res;
}

AbsorptionBracket absorption_probability(const FrontChain& chain, Site start, Site truncation) {
  if (truncation <= start + 1) {
    throw std::invalid_argument("absorption_probability: truncation must exceed start + 1");
  }
  // log g_i for i = 0..truncation+1, g_{i+1} = g_i * death(i)/birth(i).
  LogSum head;   // i <= start
  LogSum total;  // i <= truncation
  double log_g = 0.0;
  for (Site i = 0; i <= truncation; ++i) {
    if (i <= start) head.add(log_g);
    total.add(log_g);
    log_g += std::log(chain.ratio(i));
  }
  const double log_g_next = log_g;  // log g_{truncation+1}

  AbsorptionBracket out;
  out.truncation = truncation;
  out.lower = 1.0 - std::exp(head.value() - total.value());

  double rho_max = 0.0;
  for (Site j = truncation + 1; j <= 2 * truncation + 1; ++j) rho_max = std::max(rho_max, chain.ratio(j));
  const bool diverges = series_test(chain, std::max<Site>(2 * truncation, 64)).verdict == SeriesVerdict::Diverges;
  if (diverges || rho_max >= 1.0) {
    out.upper = 1.0;
  } else {
    LogSum with_tail;
    with_tail.add(total.value());
    with_tail.add(log_g_next - std::log1p(-rho_max));
    out.upper = 1.0 - std::exp(head.value() - with_tail.value());
  }
  out.lower = std::clamp(out.lower, 0.0, 1.0);
  out.upper = std::clamp(out.upper, out.lower, 1.0);
  return out;
}

RunResult simulate_front(const FrontChain& chain, Site start, const StopRule& stop, std::uint64_t seed,
                         const TraceSink* sink) {
  stop.validate(start);
  Rng rng(seed);
  RunResult res;
  res.seed = seed;
  res.max_right = start;
  Site n = start;
  double t = 0.0;
  while (true) {
    const double up = chain.birth(n);
    const double down = chain.death(n);
    const double total = up + down;
    const double dt = rng.exponential(total);
    if (t + dt > stop.horizon) {
      t = stop.horizon;
      res.outcome = Outcome::AliveAtHorizon;
      break;
    }
    t += dt;
    ++res.events;
    if (rng.uniform() * total < up) {
      ++n;
      res.max_right = std::max(res.max_right, n);
      if (sink) (*sink)({t, EventKind::Birth, n});
      if (stop.right_cutoff && n >= *stop.right_cutoff) {
        res.outcome = Outcome::EscapedRight;
        break;
      }
    } else {
      if (sink) (*sink)({t, EventKind::Death, n});
      if (n == 0) {
        res.outcome = Outcome::Extinct;
        res.extinction_time = t;
        break;
      }
      --n;
    }
  }
  res.end_time = t;
  return res;
}

}  // namespace icp

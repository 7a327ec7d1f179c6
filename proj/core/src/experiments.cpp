#include "icp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "icp/rng.hpp"

namespace icp {

namespace {

/// Calls fn(k) for k in [0, n) on up to `threads` workers. Work is handed out
/// through an atomic counter; callers write results by index.
template <class Fn>
void parallel_for(std::uint64_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, n));
  if (threads <= 1) {
    for (std::uint64_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::uint64_t k; !failed && (k = next.fetch_add(1)) < n;) {
        try {
          fn(k);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

void validate_grid(std::span<const double> grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw std::invalid_argument("lambda grid must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("lambda grid must be strictly increasing");
  }
}

}  // namespace

SurvivalEstimate SurvivalEstimate::from_counts(double lambda, std::uint64_t alive, std::uint64_t runs,
                                               const StopRule& stop, double ci_level) {
  SurvivalEstimate e;
  e.lambda = lambda;
  e.runs = runs;
  e.alive = alive;
  e.p_hat = static_cast<double>(alive) / static_cast<double>(runs);
  const Interval ci = wilson_interval(alive, runs, ci_level);
  e.wilson_lo = ci.lo;
  e.wilson_hi = ci.hi;
  e.horizon = stop.horizon;
  e.right_cutoff = stop.right_cutoff;
  e.ci_level = ci_level;
  return e;
}

SurvivalEstimate estimate_survival(const ModelParams& params, const StopRule& stop, std::uint64_t runs,
                                   std::uint64_t master_seed, double ci_level, unsigned threads) {
  if (runs == 0) throw std::invalid_argument("estimate_survival: runs must be >= 1");
  params.validate();
  stop.validate(params.initial_site);
  std::vector<std::uint8_t> alive(runs, 0);
  parallel_for(runs, threads, [&](std::uint64_t k) {
    alive[k] = simulate_run(params, stop, derive_seed(master_seed, k)).survived();
  });
  std::uint64_t count = 0;
  for (auto a : alive) count += a;
  return SurvivalEstimate::from_counts(params.lambda, count, runs, stop, ci_level);
}

SweepResult sweep(const RateProfile& profile, Site start, std::span<const double> lambda_grid,
                  const StopRule& stop, std::uint64_t runs, std::uint64_t master_seed, bool shared,
                  double ci_level, bool check_containment) {
  validate_grid(lambda_grid);
  SweepResult out;
  if (lambda_grid.empty()) return out;
  if (runs == 0) throw std::invalid_argument("sweep: runs must be >= 1");

  if (!shared) {
    for (double lambda : lambda_grid) {
      out.estimates.push_back(estimate_survival({lambda, profile, start}, stop, runs, master_seed, ci_level));
    }
    return out;
  }

  stop.validate(start);
  std::vector<LambdaCoupledResult> replicas(runs);
  parallel_for(runs, 0, [&](std::uint64_t k) {
    replicas[k] = simulate_lambda_coupled(profile, start, lambda_grid, stop, derive_seed(master_seed, k),
                                          check_containment);
  });
  const std::size_t g = lambda_grid.size();
  std::vector<std::uint64_t> counts(g, 0);
  out.alive.assign(runs, std::vector<bool>(g, false));
  for (std::uint64_t k = 0; k < runs; ++k) {
    bool monotone = true;
    for (std::size_t i = 0; i < g; ++i) {
      const bool a = replicas[k].runs[i].survived();
      out.alive[k][i] = a;
      counts[i] += a;
      if (i > 0 && out.alive[k][i - 1] && !a) monotone = false;
    }
    out.monotonicity_exceptions += !monotone;
    out.containment_violations += replicas[k].containment_violations;
  }
  for (std::size_t i = 0; i < g; ++i) {
    out.estimates.push_back(SurvivalEstimate::from_counts(lambda_grid[i], counts[i], runs, stop, ci_level));
  }
  return out;
}

std::string_view to_string(ProbeDecision d) {
  switch (d) {
    case ProbeDecision::Survives: return "survives";
    case ProbeDecision::DiesOut: return "dies_out";
    case ProbeDecision::Undecided: return "undecided";
  }
  return "unknown";
}

std::string_view to_string(CriticalStatus s) {
  switch (s) {
    case CriticalStatus::Resolved: return "resolved";
    case CriticalStatus::Unresolved: return "unresolved";
    case CriticalStatus::NeverSurvives: return "never_survives";
    case CriticalStatus::AlwaysSurvives: return "always_survives";
  }
  return "unknown";
}

CriticalBracket estimate_lambda_c(const RateProfile& profile, Site start, const StopRule& stop,
                                  const CriticalSearchOptions& opt, std::uint64_t master_seed) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("estimate_lambda_c: tol must be positive");
  if (!(opt.p_floor > 0.0 && opt.p_floor < 1.0)) throw std::invalid_argument("estimate_lambda_c: p_floor must lie in (0, 1)");
  if (!(opt.lambda_lo > 0.0 && opt.lambda_lo < opt.lambda_hi)) {
    throw std::invalid_argument("estimate_lambda_c: need 0 < lambda_lo < lambda_hi");
  }
  if (opt.runs_per_probe == 0) throw std::invalid_argument("estimate_lambda_c: runs_per_probe must be >= 1");
  stop.validate(start);

  CriticalBracket br;
  auto decide = [&](double lambda) {
    std::uint64_t runs = opt.runs_per_probe;
    StopRule rule = stop;
    while (true) {
      const std::uint64_t seed = derive_seed(master_seed, br.probes.size());
      Probe p{estimate_survival({lambda, profile, start}, rule, runs, seed, opt.ci_level, opt.threads),
              ProbeDecision::Undecided};
      if (p.estimate.wilson_lo > opt.p_floor) {
        p.decision = ProbeDecision::Survives;
      } else if (p.estimate.wilson_hi < opt.p_floor) {
        p.decision = ProbeDecision::DiesOut;
      }
      br.probes.push_back(p);
      if (p.decision != ProbeDecision::Undecided || br.probes.size() >= opt.max_probes) return p.decision;
      if (runs * 2 <= opt.max_runs) {
        runs *= 2;
      } else if (rule.horizon * 2 <= opt.max_horizon) {
        rule.horizon *= 2;
        if (rule.right_cutoff) rule.right_cutoff = *rule.right_cutoff * 2;
      } else {
        return ProbeDecision::Undecided;
      }
    }
  };
  auto out_of_budget = [&] { return br.probes.size() >= opt.max_probes; };

  double lo = opt.lambda_lo;
  double hi = opt.lambda_hi;

  // Grow hi until it survives.
  for (;;) {
    const ProbeDecision d = decide(hi);
    if (d == ProbeDecision::Survives) break;
    if (d == ProbeDecision::DiesOut) lo = std::max(lo, hi);
    if (hi * 2 > opt.lambda_max || out_of_budget()) {
      br.lo = lo;
      br.hi = hi;
      br.status = d == ProbeDecision::DiesOut ? CriticalStatus::NeverSurvives : CriticalStatus::Unresolved;
      return br;
    }
    hi *= 2;
  }
  // Shrink lo until it dies.
  if (lo >= hi) lo = hi / 2;
  for (;;) {
    const ProbeDecision d = decide(lo);
    if (d == ProbeDecision::DiesOut) break;
    if (d == ProbeDecision::Survives) hi = lo;
    if (lo / 2 < opt.lambda_min || out_of_budget()) {
      br.lo = lo;
      br.hi = hi;
      br.status = d == ProbeDecision::Survives ? CriticalStatus::AlwaysSurvives : CriticalStatus::Unresolved;
      return br;
    }
    lo /= 2;
  }

  br.status = CriticalStatus::Resolved;
  while (hi - lo > opt.tol) {
    if (out_of_budget()) {
      br.status = CriticalStatus::Unresolved;
      break;
    }
    const double mid = 0.5 * (lo + hi);
    const ProbeDecision d = decide(mid);
    if (d == ProbeDecision::Survives) {
      hi = mid;
    } else if (d == ProbeDecision::DiesOut) {
      lo = mid;
    } else {
      br.status = CriticalStatus::Unresolved;
      break;
    }
  }
  br.lo = lo;
  br.hi = hi;
  return br;
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::DiesOutAllLambda: return "dies_out_all_lambda";
    case Regime::PhaseTransition: return "phase_transition";
    case Regime::SurvivesAllLambda: return "survives_all_lambda";
    case Regime::Unclassifiable: return "unclassifiable";
  }
  return "unknown";
}

Verdict regime_verdict(const RateProfile& profile, double lambda, Interval lambda_c) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("regime_verdict: lambda must be positive");
  Verdict v;
  v.ell = limit_ell(profile, kEllHorizon, kEllTol);
  v.series = series_test(FrontChain::from_params({lambda, profile, 0}), kSeriesTerms).verdict;
  if (!v.ell) return v;

  const double ell = *v.ell;
  const double scaled = lambda * ell;
  v.below_window = scaled < 1.0;
  v.above_window = scaled > lambda_c.hi;
  if (ell == 0.0) {
    v.regime = Regime::DiesOutAllLambda;
  } else if (std::isinf(ell)) {
    v.regime = Regime::SurvivesAllLambda;
  } else {
    v.regime = Regime::PhaseTransition;
    v.window_lo = 1.0 / ell;
    v.window_hi = lambda_c.hi / ell;
    v.inside_window = !v.below_window && !v.above_window;
  }
  v.coherent = !v.below_window || v.series == SeriesVerdict::Diverges;
  return v;
}

}  // namespace icp

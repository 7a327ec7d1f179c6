#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "icp/front_chain.hpp"
#include "icp/model.hpp"
#include "icp/simulator.hpp"
#include "icp/stats.hpp"

namespace icp {

inline constexpr double kDefaultPFloor = 0.02;
inline constexpr double kDefaultHorizon = 500.0;
inline constexpr double kDefaultCiLevel = 0.95;

/// Finite-sample survival estimate at one lambda.
struct SurvivalEstimate {
  double lambda = 0.0;
  std::uint64_t runs = 0;
  std::uint64_t alive = 0;
  double p_hat = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 1.0;
  double horizon = 0.0;
  std::optional<Site> right_cutoff;
  double ci_level = kDefaultCiLevel;

  static SurvivalEstimate from_counts(double lambda, std::uint64_t alive, std::uint64_t runs,
                                      const StopRule& stop, double ci_level);
  friend bool operator==(const SurvivalEstimate&, const SurvivalEstimate&) = default;
};

/// Runs `runs` independent replicas, replica k seeded with
/// derive_seed(master_seed, k). Alive means AliveAtHorizon or EscapedRight.
/// `threads` == 0 picks the hardware concurrency; the result does not depend
/// on it.
SurvivalEstimate estimate_survival(const ModelParams& params, const StopRule& stop, std::uint64_t runs,
                                   std::uint64_t master_seed, double ci_level = kDefaultCiLevel,
                                   unsigned threads = 0);

struct SweepResult {
  std::vector<SurvivalEstimate> estimates;
  /// Shared-randomness sweeps only: replicas whose alive indicator decreased
  /// somewhere along the grid, and nesting failures seen by the coupling.
  std::uint64_t monotonicity_exceptions = 0;
  std::uint64_t containment_violations = 0;
  /// alive[k][i]: replica k survived at grid point i (shared sweeps only).
  std::vector<std::vector<bool>> alive;
};

/// Survival estimates along a strictly increasing lambda grid. With `shared`
/// set, each replica runs every lambda at once on the monotone coupling, so
/// the alive indicator of each replica is non-decreasing in lambda.
SweepResult sweep(const RateProfile& profile, Site start, std::span<const double> lambda_grid,
                  const StopRule& stop, std::uint64_t runs, std::uint64_t master_seed, bool shared = false,
                  double ci_level = kDefaultCiLevel, bool check_containment = false);

enum class ProbeDecision { Survives, DiesOut, Undecided };
std::string_view to_string(ProbeDecision d);

struct Probe {
  SurvivalEstimate estimate;
  ProbeDecision decision = ProbeDecision::Undecided;
};

struct CriticalSearchOptions {
  std::uint64_t runs_per_probe = 2000;
  double tol = 0.2;
  double p_floor = kDefaultPFloor;
  double ci_level = kDefaultCiLevel;
  /// Initial guesses for a dying and a surviving lambda.
  double lambda_lo = 1.0;
  double lambda_hi = 8.0;
  /// The bracket search gives up past these.
  double lambda_min = 1.0 / 64.0;
  double lambda_max = 64.0;
  /// Undecided probes first double their runs up to max_runs, then their
  /// horizon (and right cutoff) up to max_horizon.
  std::uint64_t max_runs = 8000;
  double max_horizon = 2000.0;
  std::size_t max_probes = 40;
  unsigned threads = 0;
};

enum class CriticalStatus {
  Resolved,            // bracket narrower than tol
  Unresolved,          // an undecided probe or the probe budget stopped bisection
  NeverSurvives,       // no surviving lambda up to lambda_max
  AlwaysSurvives,      // no dying lambda down to lambda_min
};
std::string_view to_string(CriticalStatus s);

struct CriticalBracket {
  double lo = 0.0;
  double hi = 0.0;
  CriticalStatus status = CriticalStatus::Unresolved;
  std::vector<Probe> probes;

  bool resolved() const noexcept { return status == CriticalStatus::Resolved; }
  double width() const noexcept { return hi - lo; }
};

/// Brackets the lambda at which the censored survival probability crosses
/// p_floor, by bisection. A probe counts as surviving when the Wilson lower
/// bound exceeds p_floor and as dying when the upper bound is below it.
CriticalBracket estimate_lambda_c(const RateProfile& profile, Site start, const StopRule& stop,
                                  const CriticalSearchOptions& options, std::uint64_t master_seed);

enum class Regime { DiesOutAllLambda, PhaseTransition, SurvivesAllLambda, Unclassifiable };
std::string_view to_string(Regime r);

struct Verdict {
  Regime regime = Regime::Unclassifiable;
  std::optional<double> ell;
  double window_lo = 0.0;  // 1/ell, PhaseTransition only
  double window_hi = 0.0;  // lambda_c.hi/ell, PhaseTransition only
  bool below_window = false;   // lambda * ell < 1
  bool above_window = false;   // lambda * ell > lambda_c.hi
  bool inside_window = false;   // neither bound decides this lambda
  SeriesVerdict series = SeriesVerdict::Inconclusive;
  /// below_window implies the front-chain series diverges.
  bool coherent = true;
};

inline constexpr Site kEllHorizon = 100000;
inline constexpr double kEllTol = 1e-6;
inline constexpr Site kSeriesTerms = 10000;

/// Classifies (profile, lambda) by the three regimes in ell, using
/// `lambda_c` as the critical value of the one-sided process.
Verdict regime_verdict(const RateProfile& profile, double lambda, Interval lambda_c);

}  // namespace icp

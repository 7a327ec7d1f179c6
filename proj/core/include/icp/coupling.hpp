#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "icp/model.hpp"
#include "icp/simulator.hpp"

namespace icp {

enum class CoupledProcess { Eta, Xi };

struct CoupledEvent {
  double time;
  CoupledProcess process;
  EventKind kind;
  Site site;
};

using CoupledSink = std::function<void(const CoupledEvent&)>;

/// Snapshot of the coupled pair after an event.
struct CoupledState {
  Configuration eta;
  std::optional<Site> xi_front;  // nullopt once the front process has died
  double time = 0.0;

  /// eta is contained in {0..xi_front}, and empty when xi is dead.
  bool dominated() const;
};

struct CoupledRunResult {
  RunResult eta;
  RunResult xi;
  std::uint64_t violations = 0;
  std::uint64_t events = 0;
};

/// Runs the contact process eta and the filled-to-the-left front process xi
/// on one event stream.
///
/// Clocks are keyed by (site, event type). Every enabled eta transition is a
/// key; xi owns the keys (front, death) and (front, right birth), and when the
/// front is occupied in eta those keys coincide with eta's and share one
/// clock. A fired key is applied to each process for which it is enabled.
/// Domination is checked after every event and failures are counted.
CoupledRunResult coupled_run(const ModelParams& params, const StopRule& stop, std::uint64_t seed,
                             const CoupledSink* sink = nullptr);

struct EmbeddedChainReport {
  Site first = 0;
  Site last = 0;
  std::uint64_t birth_holds = 0;  // sites where the birth-probability inequality held
  std::uint64_t death_holds = 0;  // sites where the death-probability inequality held
  /// Smallest N0 >= first such that both inequalities hold on [N0, last].
  std::optional<Site> holds_from;
  /// Both inequalities agreed at every site.
  bool consistent = true;

  bool passed() const noexcept { return holds_from && *holds_from == first; }
};

/// For n in [start, start + depth] compares the jump probabilities of the
/// embedded discrete chains:
///   lambda p(n) / (lambda p(n) + delta(n))  >  lambda' / (lambda' + 1)
///   delta(n)    / (lambda p(n) + delta(n))  <  1 / (lambda' + 1)
/// Both sides are evaluated in exact rational arithmetic from the double
/// inputs.
EmbeddedChainReport embedded_chain_check(const ModelParams& params, double lambda_prime, Site start,
                                         Site depth);

/// lambda p(n)/delta(n) > lambda', evaluated exactly.
bool rate_ratio_exceeds(const RateProfile& profile, double lambda, double lambda_prime, Site n);

/// Smallest N <= search_cap such that lambda p(n)/delta(n) > lambda' for all n
/// in [N, search_cap]. When the profile declares its limit, also requires
/// lambda * ell > lambda' so the inequality persists past the cap.
std::optional<Site> find_N(const RateProfile& profile, double lambda, double lambda_prime, Site search_cap);

}  // namespace icp

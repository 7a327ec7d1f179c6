#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "icp/model.hpp"
#include "icp/rng.hpp"

namespace icp {

/// Finite set of occupied sites, kept sorted.
class Configuration {
 public:
  Configuration() = default;
  Configuration(std::initializer_list<Site> sites);

  bool contains(Site n) const;
  /// Returns false if the site was already occupied.
  bool insert(Site n);
  /// Returns false if the site was empty.
  bool erase(Site n);

  bool empty() const noexcept { return sites_.empty(); }
  std::size_t size() const noexcept { return sites_.size(); }
  std::span<const Site> sites() const noexcept { return sites_; }
  Site rightmost() const { return sites_.back(); }

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::vector<Site> sites_;
};

enum class EventKind { Birth, Death };
std::string_view to_string(EventKind kind);

/// One enabled transition. For a birth `site` is the newborn's site and
/// `source` the parent's; for a death both equal the dying site.
struct Transition {
  EventKind kind;
  Site site;
  Site source;
  double rate;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Every enabled transition out of `config`, ordered by source site, with
/// death, left birth, right birth per source. Throws on an empty configuration.
std::vector<Transition> step_rates(const Configuration& config, const ModelParams& params);

enum class Outcome { Extinct, AliveAtHorizon, EscapedRight };
std::string_view to_string(Outcome outcome);

struct RunResult {
  Outcome outcome = Outcome::AliveAtHorizon;
  std::optional<double> extinction_time;
  double end_time = 0.0;
  Site max_right = 0;
  std::uint64_t events = 0;
  std::uint64_t seed = 0;

  /// Censored survival: alive at the horizon or escaped past the cutoff.
  bool survived() const noexcept { return outcome != Outcome::Extinct; }

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

struct StopRule {
  double horizon = 500.0;
  std::optional<Site> right_cutoff;

  void validate(Site initial_site) const;
};

struct TraceEvent {
  double time;
  EventKind kind;
  Site site;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using TraceSink = std::function<void(const TraceEvent&)>;

/// Exact event-by-event realization of the contact process.
///
/// Per-site total rates live in a sum tree whose internal nodes are always
/// recomputed from their children, so sampling carries no accumulated
/// floating-point drift and a given seed replays bit-for-bit.
class ContactSimulation {
 public:
  ContactSimulation(const ModelParams& params, std::uint64_t seed);

  double time() const noexcept { return time_; }
  double total_rate() const noexcept { return tree_[1]; }
  bool extinct() const noexcept { return occupied_count_ == 0; }
  Site max_right() const noexcept { return max_right_; }
  std::uint64_t events() const noexcept { return events_; }
  Configuration configuration() const;

  /// Fires the next event if it happens no later than `horizon`. Otherwise
  /// advances the clock to `horizon` and returns nullopt.
  std::optional<TraceEvent> step(double horizon);

 private:
  void ensure_capacity(Site n);
  double site_rate(Site n) const;
  void refresh(Site n);
  void refresh_around(Site n);
  Site select_leaf(double& u) const;
  bool occupied(Site n) const { return n < occ_.size() && occ_[n] != 0; }

  ModelParams params_;
  Rng rng_;
  double time_ = 0.0;
  std::uint64_t events_ = 0;
  Site max_right_ = 0;
  std::size_t occupied_count_ = 0;
  std::size_t capacity_ = 0;
  std::vector<std::uint8_t> occ_;
  std::vector<double> death_;
  std::vector<double> birth_right_;
  std::vector<double> birth_left_;
  std::vector<double> tree_;
};

RunResult simulate_run(const ModelParams& params, const StopRule& stop, std::uint64_t seed);

/// As simulate_run, additionally reporting every event to `sink`. Exceptions
/// thrown by the sink abort the run and propagate.
RunResult simulate_trace(const ModelParams& params, const StopRule& stop, std::uint64_t seed,
                         const TraceSink& sink);

/// Outcome of running one copy of the process per lambda on a shared
/// Harris-style construction (see simulate_lambda_coupled).
struct LambdaCoupledResult {
  std::vector<RunResult> runs;  // one per lambda, same order as the grid
  std::uint64_t containment_violations = 0;
  std::uint64_t proposals = 0;
};

/// Runs the process simultaneously for every lambda in the strictly
/// increasing `lambdas` grid. Proposals are generated from the largest
/// still-running copy: a death clock at rate delta(n) and a birth arrow at
/// rate lambda_top per occupied site, each arrow carrying a uniform mark u;
/// copy k accepts the arrow iff u < lambda_k / lambda_top. Each copy is then
/// marginally the process at its own lambda and the copies are nested. When
/// `check_containment` is set, nesting is verified at every touched site.
LambdaCoupledResult simulate_lambda_coupled(const RateProfile& profile, Site initial_site,
                                            std::span<const double> lambdas, const StopRule& stop,
                                            std::uint64_t seed, bool check_containment = false);

}  // namespace icp

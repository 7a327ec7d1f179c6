#include "icp/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace icp {

Configuration::Configuration(std::initializer_list<Site> sites) : sites_(sites) {
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
}

bool Configuration::contains(Site n) const {
  return std::binary_search(sites_.begin(), sites_.end(), n);
}

bool Configuration::insert(Site n) {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), n);
  if (it != sites_.end() && *it == n) return false;
  sites_.insert(it, n);
  return true;
}

bool Configuration::erase(Site n) {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), n);
  if (it == sites_.end() || *it != n) return false;
  sites_.erase(it);
  return true;
}

std::string_view to_string(EventKind kind) {
  return kind == EventKind::Birth ? "birth" : "death";
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Extinct: return "extinct";
    case Outcome::AliveAtHorizon: return "alive_at_horizon";
    case Outcome::EscapedRight: return "escaped_right";
  }
  return "unknown";
}

std::vector<Transition> step_rates(const Configuration& config, const ModelParams& params) {
  if (config.empty()) throw std::invalid_argument("step_rates: configuration is empty (process is dead)");
  const RateProfile& prof = params.profile;
  std::vector<Transition> out;
  out.reserve(3 * config.size());
  for (Site n : config.sites()) {
    out.push_back({EventKind::Death, n, n, prof.delta(n)});
    const double up = prof.p_up(n);
    if (n >= 1 && up < 1.0 && !config.contains(n - 1)) {
      out.push_back({EventKind::Birth, n - 1, n, params.lambda * (1.0 - up)});
    }
    if (!config.contains(n + 1)) {
      out.push_back({EventKind::Birth, n + 1, n, params.lambda * up});
    }
  }
  return out;
}

void StopRule::validate(Site initial_site) const {
  if (!(horizon > 0.0) || std::isnan(horizon)) throw std::invalid_argument("stop rule: horizon must be positive");
  if (right_cutoff && *right_cutoff <= initial_site) {
    throw std::invalid_argument("stop rule: right cutoff must exceed the initial site");
  }
}

// ---------------------------------------------------------------------------
// ContactSimulation

ContactSimulation::ContactSimulation(const ModelParams& params, std::uint64_t seed)
    : params_(params), rng_(seed), max_right_(params.initial_site) {
  params_.validate();
  ensure_capacity(params_.initial_site + 2);
  occ_[params_.initial_site] = 1;
  occupied_count_ = 1;
  refresh_around(params_.initial_site);
}

Configuration ContactSimulation::configuration() const {
  Configuration c;
  for (Site n = 0; n < occ_.size(); ++n) {
    if (occ_[n]) c.insert(n);
  }
  return c;
}

void ContactSimulation::ensure_capacity(Site n) {
  if (n < capacity_) return;
  const std::size_t old = capacity_;
  capacity_ = std::bit_ceil(std::max<std::size_t>(n + 1, 64));
  occ_.resize(capacity_, 0);
  death_.resize(capacity_);
  birth_right_.resize(capacity_);
  birth_left_.resize(capacity_);
  const RateProfile& prof = params_.profile;
  for (Site k = old; k < capacity_; ++k) {
    const double up = prof.p_up(k);
    death_[k] = prof.delta(k);
    birth_right_[k] = params_.lambda * up;
    birth_left_[k] = (k >= 1 && up < 1.0) ? params_.lambda * (1.0 - up) : 0.0;
  }
  tree_.assign(2 * capacity_, 0.0);
  for (Site k = 0; k < capacity_; ++k) tree_[capacity_ + k] = site_rate(k);
  for (std::size_t i = capacity_ - 1; i >= 1; --i) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
}

double ContactSimulation::site_rate(Site n) const {
  if (!occupied(n)) return 0.0;
  double r = death_[n];
  if (!occupied(n + 1)) r += birth_right_[n];
  if (n >= 1 && !occupied(n - 1)) r += birth_left_[n];
  return r;
}

void ContactSimulation::refresh(Site n) {
  std::size_t i = capacity_ + n;
  tree_[i] = site_rate(n);
  for (i >>= 1; i >= 1; i >>= 1) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
}

void ContactSimulation::refresh_around(Site n) {
  if (n >= 1) refresh(n - 1);
  refresh(n);
  if (n + 1 < capacity_) refresh(n + 1);
}

Site ContactSimulation::select_leaf(double& u) const {
  std::size_t i = 1;
  while (i < capacity_) {
    const double left = tree_[2 * i];
    const double right = tree_[2 * i + 1];
    if (u < left || right <= 0.0) {
      i = 2 * i;
    } else {
      u -= left;
      i = 2 * i + 1;
    }
  }
  return i - capacity_;
}

std::optional<TraceEvent> ContactSimulation::step(double horizon) {
  const double total = total_rate();
  if (occupied_count_ == 0 || !(total > 0.0)) return std::nullopt;
  const double dt = rng_.exponential(total);
  if (time_ + dt > horizon) {
    time_ = horizon;
    return std::nullopt;
  }
  time_ += dt;

  double u = rng_.uniform() * total;
  const Site n = select_leaf(u);

  const double die = death_[n];
  const double right = occupied(n + 1) ? 0.0 : birth_right_[n];
  const double left = (n >= 1 && !occupied(n - 1)) ? birth_left_[n] : 0.0;

  TraceEvent ev{time_, EventKind::Death, n};
  if (u < die || (right <= 0.0 && left <= 0.0)) {
    occ_[n] = 0;
    --occupied_count_;
    refresh_around(n);
  } else {
    u -= die;
    const Site target = (right > 0.0 && (u < right || left <= 0.0)) ? n + 1 : n - 1;
    ensure_capacity(target + 2);
    occ_[target] = 1;
    ++occupied_count_;
    max_right_ = std::max(max_right_, target);
    refresh_around(target);
    ev = {time_, EventKind::Birth, target};
  }
  ++events_;
  return ev;
}

// ---------------------------------------------------------------------------

namespace {

RunResult run_contact(const ModelParams& params, const StopRule& stop, std::uint64_t seed,
                      const TraceSink* sink) {
  params.validate();
  stop.validate(params.initial_site);
  ContactSimulation sim(params, seed);
  RunResult res;
  res.seed = seed;
  res.max_right = params.initial_site;

  if (stop.right_cutoff && sim.max_right() >= *stop.right_cutoff) {
    res.outcome = Outcome::EscapedRight;
  } else {
    while (true) {
      const auto ev = sim.step(stop.horizon);
      if (!ev) {
        res.outcome = sim.extinct() ? Outcome::Extinct : Outcome::AliveAtHorizon;
        break;
      }
      if (sink) (*sink)(*ev);
      if (sim.extinct()) {
        res.outcome = Outcome::Extinct;
        res.extinction_time = sim.time();
        break;
      }
      if (stop.right_cutoff && sim.max_right() >= *stop.right_cutoff) {
        res.outcome = Outcome::EscapedRight;
        break;
      }
    }
  }
  res.end_time = sim.time();
  res.max_right = sim.max_right();
  res.events = sim.events();
  return res;
}

}  // namespace

RunResult simulate_run(const ModelParams& params, const StopRule& stop, std::uint64_t seed) {
  return run_contact(params, stop, seed, nullptr);
}

RunResult simulate_trace(const ModelParams& params, const StopRule& stop, std::uint64_t seed,
                         const TraceSink& sink) {
  return run_contact(params, stop, seed, &sink);
}

// ---------------------------------------------------------------------------
// Monotone coupling across lambda

namespace {

class LambdaCoupling {
 public:
  LambdaCoupling(const RateProfile& profile, Site initial, std::span<const double> lambdas,
                 const StopRule& stop, std::uint64_t seed, bool check)
      : profile_(profile), lambdas_(lambdas.begin(), lambdas.end()), stop_(stop), rng_(seed),
        check_(check) {
    const std::size_t g = lambdas_.size();
    occ_.assign(g, {});
    count_.assign(g, 1);
    max_right_.assign(g, initial);
    result_.runs.assign(g, RunResult{});
    resolved_.assign(g, false);
    for (std::size_t k = 0; k < g; ++k) {
      result_.runs[k].seed = seed;
      result_.runs[k].max_right = initial;
    }
    grow(initial + 2);
    for (auto& o : occ_) o[initial] = 1;
    if (stop_.right_cutoff && initial >= *stop_.right_cutoff) {
      for (std::size_t k = 0; k < g; ++k) resolve(k, Outcome::EscapedRight);
    }
    driver_ = g;
    pick_driver();
  }

  LambdaCoupledResult run() {
    while (driver_ < lambdas_.size()) {
      const double total = tree_[1];
      const double dt = rng_.exponential(total);
      if (time_ + dt > stop_.horizon) {
        time_ = stop_.horizon;
        for (std::size_t k = 0; k < lambdas_.size(); ++k) {
          if (!resolved_[k]) resolve(k, Outcome::AliveAtHorizon);
        }
        break;
      }
      time_ += dt;
      ++result_.proposals;
      fire();
      if (resolved_[driver_]) pick_driver();
    }
    return std::move(result_);
  }

 private:
  void grow(Site n) {
    if (n < capacity_) return;
    const std::size_t old = capacity_;
    capacity_ = std::bit_ceil(std::max<std::size_t>(n + 1, 64));
    for (auto& o : occ_) o.resize(capacity_, 0);
    delta_.resize(capacity_);
    up_.resize(capacity_);
    for (Site k = old; k < capacity_; ++k) {
      delta_[k] = profile_.delta(k);
      up_[k] = profile_.p_up(k);
    }
    rebuild();
  }

  void rebuild() {
    tree_.assign(2 * capacity_, 0.0);
    if (driver_ < lambdas_.size()) {
      for (Site k = 0; k < capacity_; ++k) tree_[capacity_ + k] = leaf_rate(k);
    }
    for (std::size_t i = capacity_ - 1; i >= 1; --i) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
  }

  double leaf_rate(Site n) const {
    return occ_[driver_][n] ? delta_[n] + lambdas_[driver_] : 0.0;
  }

  void refresh(Site n) {
    std::size_t i = capacity_ + n;
    tree_[i] = leaf_rate(n);
    for (i >>= 1; i >= 1; i >>= 1) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
  }

  void pick_driver() {
    driver_ = lambdas_.size();
    for (std::size_t k = lambdas_.size(); k-- > 0;) {
      if (!resolved_[k]) {
        driver_ = k;
        break;
      }
    }
    rebuild();
  }

  void resolve(std::size_t k, Outcome outcome) {
    resolved_[k] = true;
    RunResult& r = result_.runs[k];
    r.outcome = outcome;
    r.end_time = time_;
    r.max_right = max_right_[k];
    if (outcome == Outcome::Extinct) r.extinction_time = time_;
  }

  void fire() {
    double u = rng_.uniform() * tree_[1];
    std::size_t i = 1;
    while (i < capacity_) {
      const double left = tree_[2 * i];
      if (u < left || tree_[2 * i + 1] <= 0.0) {
        i = 2 * i;
      } else {
        u -= left;
        i = 2 * i + 1;
      }
    }
    const Site n = i - capacity_;
    const double top = lambdas_[driver_];
    const std::size_t g = lambdas_.size();

    if (u < delta_[n]) {
      for (std::size_t k = 0; k < g; ++k) {
        if (resolved_[k] || !occ_[k][n]) continue;
        occ_[k][n] = 0;
        ++result_.runs[k].events;
        if (--count_[k] == 0) resolve(k, Outcome::Extinct);
      }
      refresh(n);
      if (check_) check_sites(n, n);
      return;
    }

    u -= delta_[n];
    const bool rightward = n == 0 || u < top * up_[n];
    const Site target = rightward ? n + 1 : n - 1;
    const double mark = rng_.uniform();
    grow(target + 2);
    for (std::size_t k = 0; k < g; ++k) {
      if (resolved_[k] || !occ_[k][n] || occ_[k][target]) continue;
      if (!(mark * top < lambdas_[k])) continue;
      occ_[k][target] = 1;
      ++count_[k];
      ++result_.runs[k].events;
      max_right_[k] = std::max(max_right_[k], target);
      if (stop_.right_cutoff && max_right_[k] >= *stop_.right_cutoff) resolve(k, Outcome::EscapedRight);
    }
    refresh(target);
    if (check_) check_sites(n, target);
  }

  void check_sites(Site a, Site b) {
    // Nesting among still-running copies: occ_[k] subset of occ_[j] for k < j.
    std::size_t prev = lambdas_.size();
    for (std::size_t k = 0; k < lambdas_.size(); ++k) {
      if (resolved_[k]) continue;
      if (prev < lambdas_.size()) {
        for (Site s : {a, b}) {
          if (occ_[prev][s] && !occ_[k][s]) ++result_.containment_violations;
        }
      }
      prev = k;
    }
  }

  const RateProfile& profile_;
  std::vector<double> lambdas_;
  StopRule stop_;
  Rng rng_;
  bool check_;
  double time_ = 0.0;
  std::size_t capacity_ = 0;
  std::size_t driver_ = 0;
  std::vector<std::vector<std::uint8_t>> occ_;
  std::vector<std::size_t> count_;
  std::vector<Site> max_right_;
  std::vector<bool> resolved_;
  std::vector<double> delta_;
  std::vector<double> up_;
  std::vector<double> tree_;
  LambdaCoupledResult result_;
};

}  // namespace

LambdaCoupledResult simulate_lambda_coupled(const RateProfile& profile, Site initial_site,
                                            std::span<const double> lambdas, const StopRule& stop,
                                            std::uint64_t seed, bool check_containment) {
  stop.validate(initial_site);
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] > 0.0) || !std::isfinite(lambdas[k])) {
      throw std::invalid_argument("lambda grid must be positive");
    }
    if (k > 0 && !(lambdas[k] > lambdas[k - 1])) {
      throw std::invalid_argument("lambda grid must be strictly increasing");
    }
  }
  if (lambdas.empty()) return {};
  return LambdaCoupling(profile, initial_site, lambdas, stop, seed, check_containment).run();
}

}  // namespace icp

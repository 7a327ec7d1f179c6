#include "icp/coupling.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace icp {

namespace {

using boost::multiprecision::cpp_rational;

enum class Key { Death, Left, Right };

struct Proposal {
  Site site;
  Key key;
  double rate;
};

class CoupledEngine {
 public:
  CoupledEngine(const ModelParams& params, const StopRule& stop, std::uint64_t seed, const CoupledSink* sink)
      : params_(params), stop_(stop), rng_(seed), sink_(sink) {
    eta_.insert(params.initial_site);
    front_ = params.initial_site;
    res_.eta.seed = res_.xi.seed = seed;
    res_.eta.max_right = res_.xi.max_right = params.initial_site;
  }

  CoupledRunResult run() {
    while (!(eta_done_ && xi_done_)) {
      collect();
      double total = 0.0;
      for (const auto& p : props_) total += p.rate;
      if (props_.empty() || !(total > 0.0)) break;
      const double dt = rng_.exponential(total);
      if (time_ + dt > stop_.horizon) {
        time_ = stop_.horizon;
        break;
      }
      time_ += dt;
      double u = rng_.uniform() * total;
      std::size_t pick = props_.size() - 1;
      for (std::size_t i = 0; i < props_.size(); ++i) {
        if (u < props_[i].rate) {
          pick = i;
          break;
        }
        u -= props_[i].rate;
      }
      apply(props_[pick]);
      ++res_.events;
      if (!state().dominated()) ++res_.violations;
    }
    if (!eta_done_) finish(res_.eta, Outcome::AliveAtHorizon, eta_done_);
    if (!xi_done_) finish(res_.xi, Outcome::AliveAtHorizon, xi_done_);
    res_.eta.end_time = std::min(res_.eta.end_time, time_);
    res_.xi.end_time = std::min(res_.xi.end_time, time_);
    return res_;
  }

 private:
  CoupledState state() const { return {eta_, front_, time_}; }

  bool eta_enabled(Site n, Key k) const {
    if (!eta_.contains(n)) return false;
    switch (k) {
      case Key::Death: return true;
      case Key::Right: return !eta_.contains(n + 1);
      case Key::Left: return n >= 1 && params_.profile.p_up(n) < 1.0 && !eta_.contains(n - 1);
    }
    return false;
  }

  double rate(Site n, Key k) const {
    const RateProfile& prof = params_.profile;
    switch (k) {
      case Key::Death: return prof.delta(n);
      case Key::Right: return params_.lambda * prof.p_up(n);
      case Key::Left: return params_.lambda * (1.0 - prof.p_up(n));
    }
    return 0.0;
  }

  void collect() {
    props_.clear();
    for (Site n : eta_.sites()) {
      for (Key k : {Key::Death, Key::Left, Key::Right}) {
        if (eta_enabled(n, k)) props_.push_back({n, k, rate(n, k)});
      }
    }
    if (front_) {
      const Site r = *front_;
      if (!eta_enabled(r, Key::Death)) props_.push_back({r, Key::Death, rate(r, Key::Death)});
      if (!eta_enabled(r, Key::Right)) props_.push_back({r, Key::Right, rate(r, Key::Right)});
    }
  }

  void emit(CoupledProcess who, EventKind kind, Site site) {
    if (sink_) (*sink_)({time_, who, kind, site});
  }

  void finish(RunResult& r, Outcome o, bool& done) {
    if (done) return;
    done = true;
    r.outcome = o;
    r.end_time = time_;
    if (o == Outcome::Extinct) r.extinction_time = time_;
  }

  void apply(const Proposal& p) {
    const bool hits_eta = eta_enabled(p.site, p.key);
    const bool hits_xi = front_ && *front_ == p.site && p.key != Key::Left;

    if (hits_eta) {
      ++res_.eta.events;
      if (p.key == Key::Death) {
        eta_.erase(p.site);
        emit(CoupledProcess::Eta, EventKind::Death, p.site);
      } else {
        const Site target = p.key == Key::Right ? p.site + 1 : p.site - 1;
        eta_.insert(target);
        res_.eta.max_right = std::max(res_.eta.max_right, target);
        emit(CoupledProcess::Eta, EventKind::Birth, target);
      }
      if (eta_.empty()) finish(res_.eta, Outcome::Extinct, eta_done_);
      if (!eta_done_ && stop_.right_cutoff && res_.eta.max_right >= *stop_.right_cutoff) {
        finish(res_.eta, Outcome::EscapedRight, eta_done_);
      }
    }
    if (hits_xi) {
      ++res_.xi.events;
      const Site r = *front_;
      if (p.key == Key::Death) {
        emit(CoupledProcess::Xi, EventKind::Death, r);
        if (r == 0) {
          front_.reset();
          finish(res_.xi, Outcome::Extinct, xi_done_);
        } else {
          front_ = r - 1;
        }
      } else {
        front_ = r + 1;
        res_.xi.max_right = std::max(res_.xi.max_right, r + 1);
        emit(CoupledProcess::Xi, EventKind::Birth, r + 1);
        if (!xi_done_ && stop_.right_cutoff && res_.xi.max_right >= *stop_.right_cutoff) {
          finish(res_.xi, Outcome::EscapedRight, xi_done_);
        }
      }
    }
  }

  const ModelParams& params_;
  StopRule stop_;
  Rng rng_;
  const CoupledSink* sink_;
  Configuration eta_;
  std::optional<Site> front_;
  double time_ = 0.0;
  bool eta_done_ = false;
  bool xi_done_ = false;
  std::vector<Proposal> props_;
  CoupledRunResult res_;
};

cpp_rational exact(double x) { return cpp_rational(x); }

}  // namespace

bool CoupledState::dominated() const {
  if (!xi_front) return eta.empty();
  return eta.empty() || eta.rightmost() <= *xi_front;
}

CoupledRunResult coupled_run(const ModelParams& params, const StopRule& stop, std::uint64_t seed,
                             const CoupledSink* sink) {
  params.validate();
  stop.validate(params.initial_site);
  return CoupledEngine(params, stop, seed, sink).run();
}

EmbeddedChainReport embedded_chain_check(const ModelParams& params, double lambda_prime, Site start,
                                         Site depth) {
  params.validate();
  if (!(lambda_prime > 0.0) || !std::isfinite(lambda_prime)) {
    throw std::invalid_argument("embedded_chain_check: lambda' must be positive");
  }
  const cpp_rational lam = exact(params.lambda);
  const cpp_rational lp = exact(lambda_prime);
  const cpp_rational os_birth = lp / (lp + 1);
  const cpp_rational os_death = cpp_rational(1) / (lp + 1);

  EmbeddedChainReport rep;
  rep.first = start;
  rep.last = start + depth;
  std::optional<Site> run_start;  // start of the current run of sites where both hold
  for (Site n = start; n <= rep.last; ++n) {
    const cpp_rational birth = lam * exact(params.profile.p_up(n));
    const cpp_rational death = exact(params.profile.delta(n));
    const cpp_rational sum = birth + death;
    const bool birth_ok = birth / sum > os_birth;
    const bool death_ok = death / sum < os_death;
    rep.birth_holds += birth_ok;
    rep.death_holds += death_ok;
    if (birth_ok != death_ok) rep.consistent = false;
    if (birth_ok && death_ok) {
      if (!run_start) run_start = n;
    } else {
      run_start.reset();
    }
  }
  rep.holds_from = run_start;
  return rep;
}

bool rate_ratio_exceeds(const RateProfile& profile, double lambda, double lambda_prime, Site n) {
  return exact(lambda) * exact(profile.p_up(n)) > exact(lambda_prime) * exact(profile.delta(n));
}

std::optional<Site> find_N(const RateProfile& profile, double lambda, double lambda_prime, Site search_cap) {
  if (const auto& ell = profile.declared_limit()) {
    if (!(lambda * *ell > lambda_prime)) return std::nullopt;
  }
  if (!rate_ratio_exceeds(profile, lambda, lambda_prime, search_cap)) return std::nullopt;
  Site n = search_cap;
  while (n > 0 && rate_ratio_exceeds(profile, lambda, lambda_prime, n - 1)) --n;
  return n;
}

}  // namespace icp

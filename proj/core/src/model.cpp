#include "icp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace icp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool is_probability(double p) { return std::isfinite(p) && p > 0.0 && p <= 1.0; }
bool is_rate(double d) { return std::isfinite(d) && d > 0.0; }

}  // namespace

std::string_view to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::Homogeneous: return "homogeneous";
    case ProfileKind::OneSided: return "one_sided";
    case ProfileKind::Power: return "power";
    case ProfileKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

ProfileKind profile_kind_from_string(std::string_view name) {
  if (name == "homogeneous") return ProfileKind::Homogeneous;
  if (name == "one_sided") return ProfileKind::OneSided;
  if (name == "power") return ProfileKind::Power;
  if (name == "tabulated") return ProfileKind::Tabulated;
  throw std::invalid_argument("unknown profile kind: " + std::string(name));
}

RateProfile RateProfile::homogeneous(double p, double d) {
  require(is_probability(p), "homogeneous: p must lie in (0, 1]");
  require(is_rate(d), "homogeneous: d must be a positive finite rate");
  RateProfile r;
  r.kind_ = ProfileKind::Homogeneous;
  r.params_ = {p, d};
  r.declared_limit_ = p / d;
  return r;
}

RateProfile RateProfile::one_sided() {
  RateProfile r;
  r.kind_ = ProfileKind::OneSided;
  r.declared_limit_ = 1.0;
  return r;
}

RateProfile RateProfile::power(double a, double b, double c, double d) {
  require(std::isfinite(a) && a >= 0.0, "power: exponent a must be >= 0");
  require(std::isfinite(b) && b >= 0.0, "power: exponent b must be >= 0");
  require(is_rate(c), "power: scale c must be positive");
  require(is_rate(d), "power: scale d must be positive");
  RateProfile r;
  r.kind_ = ProfileKind::Power;
  r.params_ = {a, b, c, d};
  if (a > b) {
    r.declared_limit_ = 0.0;
  } else if (a == b) {
    r.declared_limit_ = c / d;
  } else {
    r.declared_limit_ = kInf;
  }
  return r;
}

RateProfile RateProfile::tabulated(std::vector<double> p, std::vector<double> delta) {
  require(!p.empty() && !delta.empty(), "tabulated: tables must be non-empty");
  p[0] = 1.0;
  require(std::all_of(p.begin(), p.end(), is_probability), "tabulated: p entries must lie in (0, 1]");
  require(std::all_of(delta.begin(), delta.end(), is_rate), "tabulated: delta entries must be positive");
  RateProfile r;
  r.kind_ = ProfileKind::Tabulated;
  r.p_table_ = std::move(p);
  r.delta_table_ = std::move(delta);
  return r;
}

RateProfile RateProfile::make(ProfileKind kind, std::span<const double> params) {
  auto expect = [&](std::size_t n) {
    if (params.size() != n) {
      throw std::invalid_argument(std::string(to_string(kind)) + ": expected " + std::to_string(n) +
                                  " parameters, got " + std::to_string(params.size()));
    }
  };
  switch (kind) {
    case ProfileKind::Homogeneous: expect(2); return homogeneous(params[0], params[1]);
    case ProfileKind::OneSided: expect(0); return one_sided();
    case ProfileKind::Power: expect(4); return power(params[0], params[1], params[2], params[3]);
    case ProfileKind::Tabulated:
      throw std::invalid_argument("tabulated profiles take explicit p/delta tables");
  }
  throw std::invalid_argument("unknown profile kind");
}

double RateProfile::p_up(Site n) const {
  if (n == 0) return 1.0;
  switch (kind_) {
    case ProfileKind::Homogeneous: return params_[0];
    case ProfileKind::OneSided: return 1.0;
    case ProfileKind::Power:
      return std::min(1.0, params_[2] * std::pow(static_cast<double>(n) + 1.0, -params_[0]));
    case ProfileKind::Tabulated:
      return p_table_[std::min<Site>(n, p_table_.size() - 1)];
  }
  return 1.0;
}

double RateProfile::delta(Site n) const {
  switch (kind_) {
    case ProfileKind::Homogeneous: return params_[1];
    case ProfileKind::OneSided: return 1.0;
    case ProfileKind::Power:
      return params_[3] * std::pow(static_cast<double>(n) + 1.0, -params_[1]);
    case ProfileKind::Tabulated:
      return delta_table_[std::min<Site>(n, delta_table_.size() - 1)];
  }
  return 1.0;
}

void ModelParams::validate() const {
  require(std::isfinite(lambda) && lambda > 0.0, "lambda must be positive and finite");
}

std::optional<double> limit_ell(const RateProfile& profile, Site horizon, double tol) {
  require(horizon >= 10, "limit_ell: horizon must be >= 10");
  require(std::isfinite(tol) && tol > 0.0, "limit_ell: tol must be positive");
  if (profile.declared_limit()) return profile.declared_limit();

  const Site first = horizon / 2;
  std::vector<double> tail;
  tail.reserve(horizon - first + 1);
  for (Site n = first; n <= horizon; ++n) tail.push_back(profile.ratio(n));

  const bool increasing = std::adjacent_find(tail.begin(), tail.end(), std::greater_equal<>()) == tail.end();
  const bool decreasing = std::adjacent_find(tail.begin(), tail.end(), std::less_equal<>()) == tail.end();
  if (increasing && tail.back() > 1.0 / tol) return kInf;
  if (decreasing && tail.back() < tol) return 0.0;

  const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  double sum = 0.0;
  for (double r : tail) sum += r;
  const double mean = sum / static_cast<double>(tail.size());
  if (*hi - *lo < tol * (1.0 + std::abs(mean))) return mean;
  return std::nullopt;
}

}  // namespace icp

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace icp {

using Site = std::uint64_t;

enum class ProfileKind { Homogeneous, OneSided, Power, Tabulated };

std::string_view to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(std::string_view name);

/// Site-dependent rates of the inhomogeneous contact process.
///
/// `p_up(n)` is the probability p(n,n+1) that a birth from n goes right; the
/// left probability is 1 - p_up(n). `delta(n)` is the death rate at n.
/// p_up(0) == 1 for every profile. Instances are immutable and cheap to copy.
class RateProfile {
 public:
  /// `homogeneous(p, d)`: p_up(n) = p for n >= 1, delta(n) = d.
  static RateProfile homogeneous(double p, double d);
  /// All births to the right, unit death rate.
  static RateProfile one_sided();
  /// p_up(n) = min(1, c (n+1)^-a), delta(n) = d (n+1)^-b.
  static RateProfile power(double a, double b, double c, double d);
  /// Explicit tables, extended past their end by repeating the last entry.
  /// Entry 0 of `p` is overridden to 1.
  static RateProfile tabulated(std::vector<double> p, std::vector<double> delta);

  /// Dispatch on a family tag with a flat parameter list (the config form).
  static RateProfile make(ProfileKind kind, std::span<const double> params);

  ProfileKind kind() const noexcept { return kind_; }
  double p_up(Site n) const;
  double p_down(Site n) const { return 1.0 - p_up(n); }
  double delta(Site n) const;
  double ratio(Site n) const { return p_up(n) / delta(n); }

  /// Analytic limit of p_up(n)/delta(n); +inf encodes an infinite limit.
  /// Absent for tabulated profiles.
  const std::optional<double>& declared_limit() const noexcept { return declared_limit_; }

  const std::vector<double>& params() const noexcept { return params_; }
  const std::vector<double>& p_table() const noexcept { return p_table_; }
  const std::vector<double>& delta_table() const noexcept { return delta_table_; }

  friend bool operator==(const RateProfile&, const RateProfile&) = default;

 private:
  RateProfile() = default;

  ProfileKind kind_ = ProfileKind::Homogeneous;
  std::vector<double> params_;
  std::vector<double> p_table_;
  std::vector<double> delta_table_;
  std::optional<double> declared_limit_;
};

struct ModelParams {
  double lambda = 1.0;
  RateProfile profile = RateProfile::one_sided();
  Site initial_site = 0;

  /// Throws std::invalid_argument unless lambda > 0 and finite.
  void validate() const;
};

/// Limit of p_up(n)/delta(n). Returns the declared limit when the profile has
/// one; otherwise inspects the ratio over [horizon/2, horizon]:
///   - strictly increasing with final value > 1/tol  -> +inf
///   - strictly decreasing with final value < tol    -> 0
///   - oscillation < tol (1 + |mean|)                -> tail mean
///   - anything else                                 -> nullopt (inconclusive)
std::optional<double> limit_ell(const RateProfile& profile, Site horizon, double tol);

}  // namespace icp

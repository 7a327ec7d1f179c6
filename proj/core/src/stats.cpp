#include "icp/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>

namespace icp {

double normal_two_sided_z(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + 0.5 * level);
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double level) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: trials must be >= 1");
  if (successes > trials) throw std::invalid_argument("wilson_interval: successes exceed trials");
  const double z = normal_two_sided_z(level);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  Interval ci{centre - half, centre + half};
  // The score interval always brackets p; pin the endpoints at the boundary cases
  // so rounding cannot push them past p.
  if (successes == 0) ci.lo = 0.0;
  if (successes == trials) ci.hi = 1.0;
  ci.lo = std::clamp(ci.lo, 0.0, p);
  ci.hi = std::clamp(ci.hi, p, 1.0);
  return ci;
}

}  // namespace icp

#pragma once

#include <cstdint>

namespace icp {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  double width() const noexcept { return hi - lo; }
};

/// Two-sided standard normal quantile for a central coverage `level`,
/// e.g. 1.959964 for 0.95.
double normal_two_sided_z(double level);

/// Wilson score interval for `successes` out of `trials` at coverage `level`.
/// Well-formed for every 0 <= successes <= trials, trials >= 1.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double level = 0.95);

}  // namespace icp

#pragma once

// Test-only reference computations. Nothing here calls into the library's
// analytic code paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace icp::oracle {

/// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

/// P(front chain dies before reaching site m) for every start in [0, m),
/// from the first-step equations
///   (b_n + d_n) h(n) = b_n h(n+1) + d_n h(n-1),  h(-1) = 1, h(m) = 0,
/// solved as a dense linear system.
inline std::vector<double> absorption_before(const std::function<double(std::size_t)>& birth,
                                             const std::function<double(std::size_t)>& death, std::size_t m) {
  std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
  std::vector<double> rhs(m, 0.0);
  for (std::size_t n = 0; n < m; ++n) {
    const double b = birth(n), d = death(n);
    a[n][n] = b + d;
    if (n + 1 < m) a[n][n + 1] = -b;
    if (n >= 1) {
      a[n][n - 1] = -d;
    } else {
      rhs[n] += d;
    }
  }
  return solve_dense(std::move(a), std::move(rhs));
}

/// Kolmogorov distribution survival function P(K > x).
inline double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KsResult {
  double statistic;
  double p_value;
};

/// One-sample KS test against Exp(rate), asymptotic p-value with the
/// Stephens small-sample correction.
inline KsResult ks_exponential(std::vector<double> xs, double rate) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = 1.0 - std::exp(-rate * xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)};
}

}  // namespace icp::oracle

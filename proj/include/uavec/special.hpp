#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace uavec::special {

namespace detail {

inline bool is_small_integer(double m) { return m == std::floor(m) && m >= 1.0 && m <= 64.0; }

// P(m, x) by the power series; converges fast for x < m + 1.
inline double gamma_p_series(double m, double x) {
  double term = 1.0 / m;
  double sum = term;
  for (int k = 1; k < 10000; ++k) {
    term *= x / (m + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + m * std::log(x) - std::lgamma(m));
}

// Q(m, x) by the Lentz continued fraction; for x >= m + 1.
inline double gamma_q_fraction(double m, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - m;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - m);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + m * std::log(x) - std::lgamma(m)) * h;
}

}  // namespace detail

/// Regularized lower incomplete gamma P(m, x) = gamma(m, x) / Gamma(m).
inline double gamma_p(double m, double x) {
  if (!(m > 0)) throw std::domain_error("gamma_p: shape must be > 0");
  if (x < 0) throw std::domain_error("gamma_p: argument must be >= 0");
  if (x == 0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (detail::is_small_integer(m)) {
    // 1 - e^{-x} sum_{j<m} x^j / j!
    double term = 1.0;
    double sum = 1.0;
    for (int j = 1; j < static_cast<int>(m); ++j) {
      term *= x / j;
      sum += term;
    }
    const double q = std::exp(-x) * sum;
    // Near zero the series avoids cancellation in 1 - q.
    if (q > 0.9) return detail::gamma_p_series(m, x);
    return 1.0 - q;
  }
  if (x < m + 1.0) return detail::gamma_p_series(m, x);
  return 1.0 - detail::gamma_q_fraction(m, x);
}

/// Lower incomplete gamma gamma(m, x) = int_0^x t^{m-1} e^{-t} dt.
inline double lower_incomplete_gamma(double m, double x) {
  return gamma_p(m, x) * std::tgamma(m);
}

/// Smallest x with P(m, x) >= p, by bisection.
inline double gamma_p_inverse(double m, double p) {
  if (!(p > 0 && p < 1)) throw std::domain_error("gamma_p_inverse: p must lie in (0,1)");
  double lo = 0.0;
  double hi = std::max(1.0, m);
  while (gamma_p(m, hi) < p) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gamma_p(m, mid) < p ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace uavec::special

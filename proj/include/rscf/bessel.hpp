#pragma once

#include <cmath>
#include <limits>

#include "core.hpp"

namespace rscf {

namespace detail {

// Below this argument the power series is used; above it the Hankel
// expansion. At 12 the optimally truncated Hankel series is good to ~1e-12
// and the power series loses at most ~4e3 ulp to cancellation.
inline constexpr double bessel_switch = 12.0;

inline double bessel_j0_series(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (std::abs(term) < 1e-17 * std::max(1.0, std::abs(sum))) break;
  }
  return sum;
}

inline double bessel_j0_hankel(double x) {
  // J0(x) ~ sqrt(2/(pi x)) (P cos(chi) - Q sin(chi)), chi = x - pi/4, with the
  // asymptotic series truncated at its smallest term.
  double a = 1.0;
  double p = 0.0;
  double q = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 200; ++k) {
    if (k > 0) {
      const double odd = 2.0 * k - 1.0;
      a *= -(odd * odd) / (8.0 * k * x);
    }
    if (std::abs(a) > prev) break;
    prev = std::abs(a);
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0)
      p += sign * a;
    else
      q += sign * a;
    if (std::abs(a) < 1e-17) break;
  }
  const double chi = x - 0.25 * pi;
  return std::sqrt(2.0 / (pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace detail

/// Zeroth-order Bessel function of the first kind for x >= 0.
inline double bessel_j0(double x) {
  if (std::isnan(x)) throw ConfigError("bessel_j0: NaN argument");
  if (x < 0.0) throw ConfigError("bessel_j0: negative argument");
  if (!std::isfinite(x)) return 0.0;
  return x < detail::bessel_switch ? detail::bessel_j0_series(x) : detail::bessel_j0_hankel(x);
}

}  // namespace rscf

#pragma once

// Independent reference computations used by the tests.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace oracle {

// J_n by direct power series in long double; fine for x up to ~20.
inline double bessel_series(int n, double x) {
  long double term = 1.0L, sum = 0.0L;
  const long double h = x / 2.0L;
  for (int k = 1; k <= n; ++k) term *= h / k;
  for (int k = 0; k < 200; ++k) {
    sum += term;
    term *= -h * h / ((k + 1.0L) * (k + 1.0L + n));
    if (std::fabs(static_cast<double>(term)) < 1e-30) break;
  }
  return static_cast<double>(sum);
}

// J_0 root by bisection on the series.
inline double bessel_j0_first_zero() {
  double lo = 2.0, hi = 3.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (bessel_series(0, mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240601);
  return gen;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

inline std::complex<double> complex_uniform(double r) { return {uniform(-r, r), uniform(-r, r)}; }

}  // namespace oracle

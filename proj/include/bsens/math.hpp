// Copyright 2026
// See LICENSE.txt

#pragma once
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace bsens {

inline constexpr double kLog2Pi = 1.8378770664093454836;

inline double log_normal_pdf(double x, double mean, double var) {
  const double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + r * r / var);
}

// log Beta(v | a, b) density.
inline double log_beta_pdf(double v, double a, double b) {
  return (a - 1.0) * std::log(v) + (b - 1.0) * std::log1p(-v) +
         std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
}

inline double logit(double v) { return std::log(v) - std::log1p(-v); }
inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double logsumexp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v)
    if (x > m) m = x;
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace bsens

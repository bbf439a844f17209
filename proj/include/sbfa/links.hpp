#pragma once

#include <cmath>

namespace sbfa {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) {
  if (x > 35.0) return x;
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

inline double log_sigmoid(double x) { return -softplus(-x); }

inline double std_normal_pdf(double x) {
  return 0.3989422804014326779399460599344 * std::exp(-0.5 * x * x);
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// log Phi(x); asymptotic Mills-ratio expansion in the far lower tail.
inline double log_std_normal_cdf(double x) {
  if (x > -8.0) return std::log(0.5 * std::erfc(-x * M_SQRT1_2));
  const double q = 1.0 / (x * x);
  const double series = -q * (1.0 - q * (3.0 - q * (15.0 - 105.0 * q)));
  return -0.5 * x * x - 0.91893853320467274178032973640562 - std::log(-x) + std::log1p(series);
}

}  // namespace sbfa

#pragma once

#include <cmath>

namespace retv {

// log(1 + e^v) without overflow on either side.
inline double softplus(double v) {
  return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}

// log(softplus(v)); for very negative v, softplus(v) ~ e^v so the log is ~v.
inline double log_softplus(double v) {
  return v < -37.0 ? v : std::log(softplus(v));
}

inline double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

// sigmoid(v) / softplus(v), safe where both underflow (ratio -> 1).
inline double sigmoid_over_softplus(double v) {
  if (v < -37.0) return 1.0;
  return sigmoid(v) / softplus(v);
}

inline double logit(double x) { return std::log(x) - std::log1p(-x); }

}  // namespace retv

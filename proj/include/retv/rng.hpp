#pragma once

#include <cmath>
#include <cstdint>

namespace retv {

// SplitMix64 finalizer; decent avalanche, cheap enough to run per pixel.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Deterministic seed for a sub-stream (image / realization / pixel...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0) {
  std::uint64_t s = mix64(seed + 0x9E3779B97F4A7C15ull);
  s = mix64(s ^ (0xD2B74407B1CE6E93ull * (a + 1)));
  s = mix64(s ^ (0xA24BAED4963EE407ull * (b + 1)));
  return s;
}

// Counter-based generator: the stream for pixel `index` under `seed` is a
// pure function of (seed, index), so sampling order and parallel scheduling
// cannot change the draw.  Core sequence is SplitMix64.
class PixelRng {
 public:
  PixelRng(std::uint64_t seed, std::uint64_t index)
      : state_(derive_seed(seed, index)) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  double uniform() {  // [0, 1)
    return double(next_u64() >> 11) * 0x1.0p-53;
  }

  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

  double normal() {  // Box-Muller, pairs cached
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Marsaglia-Tsang squeeze method; requires shape >= 1.
  double gamma(double shape, double rate) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v / rate;
    }
  }

  std::int64_t poisson(double rate) {
    if (rate <= 0.0) return 0;
    return rate < 30.0 ? poisson_inversion(rate) : poisson_ptrs(rate);
  }

 private:
  std::int64_t poisson_inversion(double rate) {
    const double u = uniform();
    double p = std::exp(-rate);
    double cum = p;
    std::int64_t k = 0;
    const std::int64_t cap = 200 + std::int64_t(10.0 * rate);
    while (u > cum && k < cap) {
      ++k;
      p *= rate / double(k);
      cum += p;
    }
    return k;
  }

  // Hormann's transformed rejection with squeeze (PTRS).
  std::int64_t poisson_ptrs(double rate) {
    const double slam = std::sqrt(rate);
    const double loglam = std::log(rate);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + rate + 0.43);
      if (us >= 0.07 && v <= vr) return std::int64_t(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
          kf * loglam - rate - std::lgamma(kf + 1.0))
        return std::int64_t(kf);
    }
  }

  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace retv

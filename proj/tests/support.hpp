#pragma once

// Shared test helpers: finite differences, independent TV-prox oracles, and a
// deterministic RNG for reproducible property tests.

#include <cmath>
#include <random>
#include <vector>

#include "retv/image.hpp"
#include "retv/tv.hpp"

namespace testsupport {

using retv::Image;
using retv::Index;

inline std::mt19937_64 test_rng(std::uint64_t seed = 0xC0FFEE) {
  return std::mt19937_64(seed);
}

// Central finite difference of a scalar function.
template <typename F>
double fd_derivative(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// 0.5 * ||theta - s||^2 + w * TV(theta): the prox objective both the solver
// and the oracles minimize.
inline double prox_objective(const Image& theta, const Image& s, double w) {
  return 0.5 * (theta - s).square().sum() + w * retv::tv_norm(theta);
}

// Independent reference for the TV prox: plain projected gradient ascent on
// the dual (no momentum, conservative 1/(8w) step), written from the dual
// derivation directly.  Dual fields p((m-1) x n) and q(m x (n-1)); the primal
// is x = s - w * L(p, q) with
//   [L(p,q)](i,j) = p(i,j) - p(i-1,j) + q(i,j) - q(i,j-1)   (out-of-range: 0).
// The constraint set couples interior pairs (p(i,j), q(i,j)) in a unit disc
// and leaves the last-column p / last-row q in [-1, 1].
inline Image tv_prox_oracle(const Image& s, double w, int iters) {
  const Index m = s.rows(), n = s.cols();
  if (w <= 0.0 || m * n <= 1) return s;
  Image p = Image::Zero(std::max<Index>(m - 1, 0), n);
  Image q = Image::Zero(m, std::max<Index>(n - 1, 0));
  Image x(m, n);

  auto primal = [&]() {
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) {
        double div = 0.0;
        if (i < m - 1) div += p(i, j);
        if (i > 0) div -= p(i - 1, j);
        if (j < n - 1) div += q(i, j);
        if (j > 0) div -= q(i, j - 1);
        x(i, j) = s(i, j) - w * div;
      }
  };

  const double step = 1.0 / (8.0 * w);
  for (int t = 0; t < iters; ++t) {
    primal();
    // Gradient of the dual objective wrt p, q is the forward difference of x.
    for (Index i = 0; i + 1 < m; ++i)
      for (Index j = 0; j < n; ++j) p(i, j) += step * (x(i, j) - x(i + 1, j));
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j + 1 < n; ++j) q(i, j) += step * (x(i, j) - x(i, j + 1));
    // Projection: isotropic pairs on the interior, intervals on the borders.
    for (Index i = 0; i + 1 < m; ++i)
      for (Index j = 0; j + 1 < n; ++j) {
        const double r = std::sqrt(p(i, j) * p(i, j) + q(i, j) * q(i, j));
        if (r > 1.0) {
          p(i, j) /= r;
          q(i, j) /= r;
        }
      }
    for (Index i = 0; i + 1 < m; ++i) {
      double& v = p(i, n - 1);
      v = std::clamp(v, -1.0, 1.0);
    }
    for (Index j = 0; j + 1 < n; ++j) {
      double& v = q(m - 1, j);
      v = std::clamp(v, -1.0, 1.0);
    }
  }
  primal();
  return x;
}

inline Image random_image(std::mt19937_64& rng, Index rows, Index cols,
                          double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Image img(rows, cols);
  for (Index i = 0; i < img.size(); ++i) img.data()[i] = dist(rng);
  return img;
}

}  // namespace testsupport

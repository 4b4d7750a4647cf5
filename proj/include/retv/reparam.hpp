#pragma once

#include <string>
#include <vector>

#include "retv/image.hpp"

namespace retv {

// Intensity reparameterization x = f(theta).  Each family is a bijection
// between an unconstrained (or half-line) theta-domain and the model's
// intensity domain, built so the composed negative log-likelihood is convex
// in theta with a bounded second derivative.
struct ReparamFamily {
  enum class Kind {
    Identity,
    BernoulliK,         // logistic tails glued to the identity on [k, 1-k]
    PoissonPiecewiseK,  // scaled exponential glued to the identity at 1/k
    PoissonLogExpK,     // x = k * log(1 + e^theta)
    SpeckleK,           // decreasing: exp branch for theta <= 0, 1/(k(1+theta)) above
    SpeckleInv,         // x = 1/theta on theta > 0
    SpeckleExp          // x = e^{-theta}
  };

  Kind kind = Kind::Identity;
  double k = 0.0;

  static ReparamFamily identity() { return {Kind::Identity, 0.0}; }
  static ReparamFamily bernoulli(double k);          // 0 < k <= 1/2
  static ReparamFamily poisson_piecewise(double k);  // k > 0
  static ReparamFamily poisson_logexp(double k);     // k > 0
  static ReparamFamily speckle(double k);            // k > 0
  static ReparamFamily speckle_inverse() { return {Kind::SpeckleInv, 0.0}; }
  static ReparamFamily speckle_exponential() { return {Kind::SpeckleExp, 0.0}; }
};

// Scalar maps.  forward/derivative expect theta in the family's theta-domain,
// inverse expects x in the (open) intensity domain.
double forward_value(const ReparamFamily& family, double theta);
double inverse_value(const ReparamFamily& family, double x);
double derivative_value(const ReparamFamily& family, double theta);

// Elementwise image versions; validate finiteness and domains.
Image forward(const ReparamFamily& family, const Image& theta);
Image inverse(const ReparamFamily& family, const Image& x);
Image derivative(const ReparamFamily& family, const Image& theta);

// Interior breakpoints of the piecewise definitions (empty if smooth).
std::vector<double> breakpoints(const ReparamFamily& family);

// Valid open theta-interval (most families are all of R).
void theta_domain(const ReparamFamily& family, double* lo, double* hi);

// True if x = f(theta) is decreasing in theta (the speckle families).
bool is_decreasing(const ReparamFamily& family);

std::string label(const ReparamFamily& family);  // "identity", "k=0.05", ...

}  // namespace retv

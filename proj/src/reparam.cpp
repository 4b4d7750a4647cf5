#include "retv/reparam.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "retv/mathutil.hpp"

namespace retv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Natural parameter of the Bernoulli tail branches: both are affine in theta
// and meet logit(theta) with matching value and slope at k and 1-k.
inline double bern_eta_left(double k, double theta) {
  const double c = 1.0 / (k * (1.0 - k));
  return c * (theta - k) + std::log(k / (1.0 - k));
}
inline double bern_eta_right(double k, double theta) {
  const double c = 1.0 / (k * (1.0 - k));
  return c * (theta + k - 1.0) + std::log((1.0 - k) / k);
}

}  // namespace

ReparamFamily ReparamFamily::bernoulli(double k) {
  if (!(k > 0.0 && k <= 0.5))
    throw std::invalid_argument("ReparamFamily::bernoulli: need 0 < k <= 1/2");
  return {Kind::BernoulliK, k};
}
ReparamFamily ReparamFamily::poisson_piecewise(double k) {
  if (!(k > 0.0))
    throw std::invalid_argument("ReparamFamily::poisson_piecewise: need k > 0");
  return {Kind::PoissonPiecewiseK, k};
}
ReparamFamily ReparamFamily::poisson_logexp(double k) {
  if (!(k > 0.0))
    throw std::invalid_argument("ReparamFamily::poisson_logexp: need k > 0");
  return {Kind::PoissonLogExpK, k};
}
ReparamFamily ReparamFamily::speckle(double k) {
  if (!(k > 0.0)) throw std::invalid_argument("ReparamFamily::speckle: need k > 0");
  return {Kind::SpeckleK, k};
}

double forward_value(const ReparamFamily& f, double theta) {
  const double k = f.k;
  switch (f.kind) {
    case ReparamFamily::Kind::Identity:
      return theta;
    case ReparamFamily::Kind::BernoulliK:
      if (theta <= k) return sigmoid(bern_eta_left(k, theta));
      if (theta <= 1.0 - k) return theta;
      return sigmoid(bern_eta_right(k, theta));
    case ReparamFamily::Kind::PoissonPiecewiseK:
      return theta <= 1.0 / k ? std::exp(k * theta - 1.0) / k : theta;
    case ReparamFamily::Kind::PoissonLogExpK:
      return k * softplus(theta);
    case ReparamFamily::Kind::SpeckleK:
      return theta <= 0.0 ? std::exp(-theta) / k : 1.0 / (k * (1.0 + theta));
    case ReparamFamily::Kind::SpeckleInv:
      return 1.0 / theta;
    case ReparamFamily::Kind::SpeckleExp:
      return std::exp(-theta);
  }
  return 0.0;
}

double inverse_value(const ReparamFamily& f, double x) {
  const double k = f.k;
  switch (f.kind) {
    case ReparamFamily::Kind::Identity:
      return x;
    case ReparamFamily::Kind::BernoulliK: {
      const double kk = k * (1.0 - k);
      if (x <= k)
        return kk * (1.0 / (1.0 - k) -
                     std::log((k / (1.0 - k)) * (1.0 / x - 1.0)));
      if (x <= 1.0 - k) return x;
      return kk * (1.0 / k - std::log(((1.0 - k) / k) * (1.0 / x - 1.0)));
    }
    case ReparamFamily::Kind::PoissonPiecewiseK:
      return x <= 1.0 / k ? (std::log(k * x) + 1.0) / k : x;
    case ReparamFamily::Kind::PoissonLogExpK: {
      const double u = x / k;  // theta = log(e^u - 1)
      return u > 33.0 ? u : std::log(std::expm1(u));
    }
    case ReparamFamily::Kind::SpeckleK:
      // Decreasing map: large intensities come from the exponential branch.
      return x >= 1.0 / k ? -std::log(k * x) : 1.0 / (k * x) - 1.0;
    case ReparamFamily::Kind::SpeckleInv:
      return 1.0 / x;
    case ReparamFamily::Kind::SpeckleExp:
      return -std::log(x);
  }
  return 0.0;
}

double derivative_value(const ReparamFamily& f, double theta) {
  const double k = f.k;
  switch (f.kind) {
    case ReparamFamily::Kind::Identity:
      return 1.0;
    case ReparamFamily::Kind::BernoulliK: {
      if (theta > k && theta <= 1.0 - k) return 1.0;
      const double c = 1.0 / (k * (1.0 - k));
      const double s = sigmoid(theta <= k ? bern_eta_left(k, theta)
                                          : bern_eta_right(k, theta));
      return c * s * (1.0 - s);
    }
    case ReparamFamily::Kind::PoissonPiecewiseK:
      return theta <= 1.0 / k ? std::exp(k * theta - 1.0) : 1.0;
    case ReparamFamily::Kind::PoissonLogExpK:
      return k * sigmoid(theta);
    case ReparamFamily::Kind::SpeckleK: {
      if (theta <= 0.0) return -std::exp(-theta) / k;
      const double d = 1.0 + theta;
      return -1.0 / (k * d * d);
    }
    case ReparamFamily::Kind::SpeckleInv:
      return -1.0 / (theta * theta);
    case ReparamFamily::Kind::SpeckleExp:
      return -std::exp(-theta);
  }
  return 0.0;
}

void theta_domain(const ReparamFamily& f, double* lo, double* hi) {
  *lo = -kInf;
  *hi = kInf;
  if (f.kind == ReparamFamily::Kind::SpeckleInv) *lo = 0.0;
}

static void intensity_domain(const ReparamFamily& f, double* lo, double* hi) {
  *lo = 0.0;
  *hi = kInf;
  switch (f.kind) {
    case ReparamFamily::Kind::Identity:
      *lo = -kInf;
      break;
    case ReparamFamily::Kind::BernoulliK:
      *hi = 1.0;
      break;
    default:
      break;
  }
}

bool is_decreasing(const ReparamFamily& f) {
  switch (f.kind) {
    case ReparamFamily::Kind::SpeckleK:
    case ReparamFamily::Kind::SpeckleInv:
    case ReparamFamily::Kind::SpeckleExp:
      return true;
    default:
      return false;
  }
}

std::vector<double> breakpoints(const ReparamFamily& f) {
  switch (f.kind) {
    case ReparamFamily::Kind::BernoulliK:
      return {f.k, 1.0 - f.k};
    case ReparamFamily::Kind::PoissonPiecewiseK:
      return {1.0 / f.k};
    case ReparamFamily::Kind::SpeckleK:
      return {0.0};
    default:
      return {};
  }
}

namespace {

template <typename Fn>
Image map_image(const Image& in, Fn&& fn) {
  Image out(in.rows(), in.cols());
  const double* src = in.data();
  double* dst = out.data();
  const Index n = in.size();
  for (Index i = 0; i < n; ++i) dst[i] = fn(src[i]);
  return out;
}

void require_finite(const Image& img, const char* who) {
  if (img.size() == 0 || !all_finite(img))
    throw std::invalid_argument(std::string(who) + ": non-finite or empty input");
}

}  // namespace

Image forward(const ReparamFamily& f, const Image& theta) {
  require_finite(theta, "forward");
  double lo, hi;
  theta_domain(f, &lo, &hi);
  if (lo > -kInf && theta.minCoeff() <= lo)
    throw std::invalid_argument("forward: theta outside family domain");
  return map_image(theta, [&](double t) { return forward_value(f, t); });
}

Image inverse(const ReparamFamily& f, const Image& x) {
  require_finite(x, "inverse");
  double lo, hi;
  intensity_domain(f, &lo, &hi);
  if ((lo > -kInf && x.minCoeff() <= lo) || x.maxCoeff() >= hi)
    throw std::invalid_argument("inverse: intensity outside open domain");
  return map_image(x, [&](double v) { return inverse_value(f, v); });
}

Image derivative(const ReparamFamily& f, const Image& theta) {
  require_finite(theta, "derivative");
  double lo, hi;
  theta_domain(f, &lo, &hi);
  if (lo > -kInf && theta.minCoeff() <= lo)
    throw std::invalid_argument("derivative: theta outside family domain");
  return map_image(theta, [&](double t) { return derivative_value(f, t); });
}

std::string label(const ReparamFamily& f) {
  char buf[48];
  switch (f.kind) {
    case ReparamFamily::Kind::Identity:
      return "identity";
    case ReparamFamily::Kind::SpeckleInv:
      return "inv";
    case ReparamFamily::Kind::SpeckleExp:
      return "exp";
    default:
      std::snprintf(buf, sizeof(buf), "k=%.6g", f.k);
      return buf;
  }
}

}  // namespace retv

#include "retv/datafit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef __AVX__
#include <immintrin.h>
#endif

#include "retv/mathutil.hpp"

namespace retv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDomainEps = 1e-8;  // baseline clamp distance from the boundary

// The eval loops below are scalar exp/log per pixel via legacy-SSE libm.  If
// the caller (solver, Eigen kernels) left the upper vector state dirty, every
// one of those calls pays a false-dependency stall -- measured 15x on
// Skylake-X.  Clearing the state once per entry is ~1 cycle.
inline void clear_upper_simd_state() {
#ifdef __AVX__
  _mm256_zeroupper();
#endif
}

void require_in(const Image& y, double lo, double hi, const char* who) {
  if (y.size() == 0) throw std::invalid_argument(std::string(who) + ": empty observations");
  if (!all_finite(y)) throw std::invalid_argument(std::string(who) + ": non-finite observations");
  if (y.minCoeff() < lo || y.maxCoeff() > hi)
    throw std::invalid_argument(std::string(who) + ": observations outside domain");
}

}  // namespace

DataFit::DataFit(Image y) : y_(std::move(y)) {
  if (y_.size() == 0) throw std::invalid_argument("DataFit: empty observations");
  if (!all_finite(y_)) throw std::invalid_argument("DataFit: non-finite observations");
  y_max_ = y_.maxCoeff();
}

void DataFit::check_shape(const Image& theta) const {
  if (theta.rows() != y_.rows() || theta.cols() != y_.cols())
    throw std::invalid_argument("DataFit: argument shape does not match observations");
  if (!all_finite(theta))
    throw std::domain_error("DataFit: non-finite argument");
}

double DataFit::value(const Image& theta) const {
  check_shape(theta);
  clear_upper_simd_state();
  return eval(theta);
}

void DataFit::gradient(const Image& theta, Image& grad) const {
  check_shape(theta);
  grad.resize(theta.rows(), theta.cols());
  clear_upper_simd_state();
  eval_gradient(theta, grad);
}

Image DataFit::gradient(const Image& theta) const {
  Image g;
  gradient(theta, g);
  return g;
}

namespace {

// ---------------------------------------------------------------------------
// Bernoulli, reparameterized.  phi_i = softplus(eta) - y*eta with the natural
// parameter eta piecewise: affine tails glued to logit(theta) on [k, 1-k].
// Curvature is c^2 * sigma'(eta) <= 1/4 * c^2 on the tails and
// 1/(theta(1-theta)) <= 1/(k(1-k)) in the middle; the sup is 1/k^2.
// ---------------------------------------------------------------------------
class BernoulliReparamFit final : public DataFit {
 public:
  BernoulliReparamFit(double k, Image y) : DataFit(std::move(y)), k_(k) {
    if (!(k > 0.0 && k <= 0.5))
      throw std::invalid_argument("bernoulli reparam fit: need 0 < k <= 1/2");
    require_in(y_, 0.0, 1.0, "bernoulli reparam fit");
  }

  double lipschitz_bound() const override { return 1.0 / (k_ * k_); }
  std::string name() const override { return "bernoulli-reparam"; }

 protected:
  double eval(const Image& theta) const override {
    const double k = k_, c = 1.0 / (k * (1.0 - k));
    const double lk = std::log(k / (1.0 - k));
    const double* t = theta.data();
    const double* y = y_.data();
    long double acc = 0.0;
    for (Index i = 0; i < theta.size(); ++i) {
      double eta;
      if (t[i] <= k) {
        eta = c * (t[i] - k) + lk;
        acc += softplus(eta) - y[i] * eta;
      } else if (t[i] <= 1.0 - k) {
        eta = logit(t[i]);
        acc += -std::log1p(-t[i]) - y[i] * eta;
      } else {
        eta = c * (t[i] + k - 1.0) - lk;
        acc += softplus(eta) - y[i] * eta;
      }
    }
    return double(acc);
  }

  void eval_gradient(const Image& theta, Image& grad) const override {
    const double k = k_, c = 1.0 / (k * (1.0 - k));
    const double lk = std::log(k / (1.0 - k));
    const double* t = theta.data();
    const double* y = y_.data();
    double* g = grad.data();
    for (Index i = 0; i < theta.size(); ++i) {
      if (t[i] <= k) {
        g[i] = c * (sigmoid(c * (t[i] - k) + lk) - y[i]);
      } else if (t[i] <= 1.0 - k) {
        g[i] = (t[i] - y[i]) / (t[i] * (1.0 - t[i]));
      } else {
        g[i] = c * (sigmoid(c * (t[i] + k - 1.0) - lk) - y[i]);
      }
    }
  }

 private:
  double k_;
};

// ---------------------------------------------------------------------------
// Poisson with x = k * softplus(theta).
//   phi_i = k sp(theta) - y (log k + log sp(theta))
//   phi_i'' = k sigma'(theta) + y * h(theta),  h = (sigma^2 - sigma' sp)/sp^2
// h is positive (softplus is log-concave), vanishes at +-inf and peaks around
// theta ~ 0.5; its sup is found numerically once.
// ---------------------------------------------------------------------------
double logexp_curvature_sup() {
  static const double H = [] {
    auto h = [](double t) {
      const double s = softplus(t);
      const double sg = sigmoid(t);
      return (sg * sg - sg * (1.0 - sg) * s) / (s * s);
    };
    double best_t = 0.0, best = -kInf;
    for (double t = -30.0; t <= 30.0; t += 1e-3) {
      const double v = h(t);
      if (v > best) { best = v; best_t = t; }
    }
    double a = best_t - 2e-3, b = best_t + 2e-3;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < 120; ++i) {
      const double c = b - gr * (b - a), d = a + gr * (b - a);
      if (h(c) > h(d)) b = d; else a = c;
    }
    return std::max(best, h(0.5 * (a + b))) * (1.0 + 1e-6);
  }();
  return H;
}

class PoissonLogExpFit final : public DataFit {
 public:
  PoissonLogExpFit(double k, Image y) : DataFit(std::move(y)), k_(k) {
    if (!(k > 0.0)) throw std::invalid_argument("poisson logexp fit: need k > 0");
    require_in(y_, 0.0, kInf, "poisson logexp fit");
  }

  double lipschitz_bound() const override {
    return k_ / 4.0 + y_max_ * logexp_curvature_sup();
  }
  std::string name() const override { return "poisson-logexp"; }

 protected:
  double eval(const Image& theta) const override {
    const double lk = std::log(k_);
    const double* t = theta.data();
    const double* y = y_.data();
    long double acc = 0.0;
    for (Index i = 0; i < theta.size(); ++i)
      acc += k_ * softplus(t[i]) - y[i] * (lk + log_softplus(t[i]));
    return double(acc);
  }

  void eval_gradient(const Image& theta, Image& grad) const override {
    const double* t = theta.data();
    const double* y = y_.data();
    double* g = grad.data();
    for (Index i = 0; i < theta.size(); ++i)
      g[i] = k_ * sigmoid(t[i]) - y[i] * sigmoid_over_softplus(t[i]);
  }

 private:
  double k_;
};

// ---------------------------------------------------------------------------
// Poisson with the piecewise map x = exp(k theta - 1)/k below 1/k, x = theta
// above.  The y-part is linear on the exponential branch, so curvature there
// is k exp(k theta - 1) <= k; above the breakpoint it is y/theta^2 <= y k^2.
// Hence sup phi'' <= max(k, k^2 y).
// ---------------------------------------------------------------------------
class PoissonPiecewiseFit final : public DataFit {
 public:
  PoissonPiecewiseFit(double k, Image y) : DataFit(std::move(y)), k_(k) {
    if (!(k > 0.0)) throw std::invalid_argument("poisson piecewise fit: need k > 0");
    require_in(y_, 0.0, kInf, "poisson piecewise fit");
  }

  double lipschitz_bound() const override {
    return std::max(k_, k_ * k_ * y_max_);
  }
  std::string name() const override { return "poisson-piecewise"; }

 protected:
  double eval(const Image& theta) const override {
    const double k = k_, lk = std::log(k), br = 1.0 / k;
    const double* t = theta.data();
    const double* y = y_.data();
    long double acc = 0.0;
    for (Index i = 0; i < theta.size(); ++i) {
      if (t[i] <= br)
        acc += std::exp(k * t[i] - 1.0) / k - y[i] * (k * t[i] - lk - 1.0);
      else
        acc += t[i] - y[i] * std::log(t[i]);
    }
    return double(acc);
  }

  void eval_gradient(const Image& theta, Image& grad) const override {
    const double k = k_, br = 1.0 / k;
    const double* t = theta.data();
    const double* y = y_.data();
    double* g = grad.data();
    for (Index i = 0; i < theta.size(); ++i) {
      if (t[i] <= br)
        g[i] = std::exp(k * t[i] - 1.0) - y[i] * k;
      else
        g[i] = 1.0 - y[i] / t[i];
    }
  }

 private:
  double k_;
};

// ---------------------------------------------------------------------------
// Speckle (multiplicative Gamma noise, S looks) with the decreasing map
// x = exp(-theta)/k for theta <= 0, x = 1/(k(1+theta)) above.
//   phi_i = S (log x + y/x):
//     theta <= 0:  S (y k e^theta - theta - log k)
//     theta  > 0:  S (y k (1+theta) - log(1+theta) - log k)
//   phi''  = S y k e^theta (<= S y k)  |  S/(1+theta)^2 (<= S)
// ---------------------------------------------------------------------------
class SpeckleReparamFit final : public DataFit {
 public:
  SpeckleReparamFit(double k, int looks, Image y)
      : DataFit(std::move(y)), k_(k), looks_(looks) {
    if (!(k > 0.0)) throw std::invalid_argument("speckle reparam fit: need k > 0");
    if (looks < 1) throw std::invalid_argument("speckle reparam fit: looks must be >= 1");
    require_in(y_, 0.0, kInf, "speckle reparam fit");
  }

  double lipschitz_bound() const override {
    return double(looks_) * std::max(k_ * y_max_, 1.0);
  }
  std::string name() const override { return "speckle-reparam"; }

 protected:
  double eval(const Image& theta) const override {
    const double k = k_, lk = std::log(k), S = double(looks_);
    const double* t = theta.data();
    const double* y = y_.data();
    long double acc = 0.0;
    for (Index i = 0; i < theta.size(); ++i) {
      if (t[i] <= 0.0)
        acc += S * (y[i] * k * std::exp(t[i]) - t[i] - lk);
      else
        acc += S * (y[i] * k * (1.0 + t[i]) - std::log1p(t[i]) - lk);
    }
    return double(acc);
  }

  void eval_gradient(const Image& theta, Image& grad) const override {
    const double k = k_, S = double(looks_);
    const double* t = theta.data();
    const double* y = y_.data();
    double* g = grad.data();
    for (Index i = 0; i < theta.size(); ++i) {
      if (t[i] <= 0.0)
        g[i] = S * (y[i] * k * std::exp(t[i]) - 1.0);
      else
        g[i] = S * (y[i] * k - 1.0 / (1.0 + t[i]));
    }
  }

 private:
  double k_;
  int looks_;
};

// ---------------------------------------------------------------------------
// Baselines: the likelihood in the intensity domain.
// ---------------------------------------------------------------------------
class BernoulliBaselineFit final : public DataFit {
 public:
  explicit BernoulliBaselineFit(Image y) : DataFit(std::move(y)) {
    require_in(y_, 0.0, 1.0, "bernoulli baseline fit");
  }

  double lipschitz_bound() const override { return kInf; }
  std::string name() const override { return "bernoulli-baseline"; }

  void project_domain(Image& x) const override {
    x = x.max(kDomainEps).min(1.0 - kDomainEps);
  }

 protected:
  double eval(const Image& x) const override {
    const double* t = x.data();
    const double* y = y_.data();
    long double acc = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      if (t[i] <= 0.0 || t[i] >= 1.0)
        throw std::domain_error("bernoulli baseline fit: x outside (0, 1)");
      if (y[i] > 0.0) acc -= y[i] * std::log(t[i]);
      if (y[i] < 1.0) acc -= (1.0 - y[i]) * std::log1p(-t[i]);
    }
    return double(acc);
  }

  void eval_gradient(const Image& x, Image& grad) const override {
    const double* t = x.data();
    const double* y = y_.data();
    double* g = grad.data();
    for (Index i = 0; i < x.size(); ++i) {
      if (t[i] <= 0.0 || t[i] >= 1.0)
        throw std::domain_error("bernoulli baseline fit: x outside (0, 1)");
      g[i] = (t[i] - y[i]) / (t[i] * (1.0 - t[i]));
    }
  }
};

class PoissonBaselineFit final : public DataFit {
 public:
  explicit PoissonBaselineFit(Image y) : DataFit(std::move(y)) {
    require_in(y_, 0.0, kInf, "poisson baseline fit");
  }

  double lipschitz_bound() const override { return kInf; }
  std::string name() const override { return "poisson-baseline"; }

  void project_domain(Image& x) const override { x = x.max(kDomainEps); }

 protected:
  double eval(const Image& x) const override {
    const double* t = x.data();
    const double* y = y_.data();
    long double acc = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      if (t[i] < 0.0 || (t[i] == 0.0 && y[i] > 0.0))
        throw std::domain_error("poisson baseline fit: x outside domain");
      acc += t[i];
      if (y[i] > 0.0) acc -= y[i] * std::log(t[i]);
    }
    return double(acc);
  }

  void eval_gradient(const Image& x, Image& grad) const override {
    const double* t = x.data();
    const double* y = y_.data();
    double* g = grad.data();
    for (Index i = 0; i < x.size(); ++i) {
      if (t[i] < 0.0 || (t[i] == 0.0 && y[i] > 0.0))
        throw std::domain_error("poisson baseline fit: x outside domain");
      g[i] = y[i] > 0.0 ? 1.0 - y[i] / t[i] : 1.0;
    }
  }
};

// Note: not convex in x; kept as the honest reference method.
class SpeckleBaselineFit final : public DataFit {
 public:
  SpeckleBaselineFit(int looks, Image y) : DataFit(std::move(y)), looks_(looks) {
    if (looks < 1) throw std::invalid_argument("speckle baseline fit: looks must be >= 1");
    require_in(y_, 0.0, kInf, "speckle baseline fit");
  }

  double lipschitz_bound() const override { return kInf; }
  std::string name() const override { return "speckle-baseline"; }

  void project_domain(Image& x) const override { x = x.max(kDomainEps); }

 protected:
  double eval(const Image& x) const override {
    const double S = double(looks_);
    const double* t = x.data();
    const double* y = y_.data();
    long double acc = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      if (t[i] <= 0.0)
        throw std::domain_error("speckle baseline fit: x must be positive");
      acc += S * (std::log(t[i]) + y[i] / t[i]);
    }
    return double(acc);
  }

  void eval_gradient(const Image& x, Image& grad) const override {
    const double S = double(looks_);
    const double* t = x.data();
    const double* y = y_.data();
    double* g = grad.data();
    for (Index i = 0; i < x.size(); ++i) {
      if (t[i] <= 0.0)
        throw std::domain_error("speckle baseline fit: x must be positive");
      g[i] = S * (t[i] - y[i]) / (t[i] * t[i]);
    }
  }

 private:
  int looks_;
};

// ---------------------------------------------------------------------------
// Generic exponential-family fit through an arbitrary reparameterization.
// ---------------------------------------------------------------------------
class ExpFamilyFit final : public DataFit {
 public:
  ExpFamilyFit(ExpFamilySpec spec, ReparamFamily family, Image y)
      : DataFit(std::move(y)), spec_(std::move(spec)), family_(family) {
    if (!spec_.log_partition || !spec_.log_partition_deriv ||
        !spec_.sufficient_stat || !spec_.link || !spec_.link_inv ||
        !spec_.link_deriv)
      throw std::invalid_argument("exp family fit: incomplete spec");
  }

  double lipschitz_bound() const override {
    if (family_.kind == ReparamFamily::Kind::Identity) return kInf;
    // No closed form here: phi'' is affine in T(y), so bound the second
    // difference on a theta grid at both T extremes and inflate by 10%.
    double tmin = kInf, tmax = -kInf;
    for (Index i = 0; i < y_.size(); ++i) {
      const double t = spec_.sufficient_stat(y_.data()[i]);
      tmin = std::min(tmin, t);
      tmax = std::max(tmax, t);
    }
    auto phi = [&](double theta, double T) {
      const double eta = spec_.link(forward_value(family_, theta));
      return spec_.log_partition(eta) - eta * T;
    };
    const double h = 0.01;
    double sup = 0.0;
    for (double T : {tmin, tmax}) {
      for (double theta = -50.0; theta <= 50.0; theta += h) {
        const double dd =
            (phi(theta - h, T) - 2.0 * phi(theta, T) + phi(theta + h, T)) /
            (h * h);
        sup = std::max(sup, dd);
      }
    }
    return sup * 1.1;
  }

  std::string name() const override { return "exp-family"; }

 protected:
  double eval(const Image& theta) const override {
    const double* t = theta.data();
    const double* y = y_.data();
    long double acc = 0.0;
    for (Index i = 0; i < theta.size(); ++i) {
      const double eta = spec_.link(forward_value(family_, t[i]));
      acc += spec_.log_partition(eta) - eta * spec_.sufficient_stat(y[i]);
    }
    return double(acc);
  }

  void eval_gradient(const Image& theta, Image& grad) const override {
    const double* t = theta.data();
    const double* y = y_.data();
    double* g = grad.data();
    for (Index i = 0; i < theta.size(); ++i) {
      const double x = forward_value(family_, t[i]);
      const double eta = spec_.link(x);
      g[i] = (spec_.log_partition_deriv(eta) - spec_.sufficient_stat(y[i])) *
             spec_.link_deriv(x) * derivative_value(family_, t[i]);
    }
  }

 private:
  ExpFamilySpec spec_;
  ReparamFamily family_;
};

}  // namespace

DataFitPtr make_bernoulli_reparam_fit(double k, Image y) {
  return std::make_unique<BernoulliReparamFit>(k, std::move(y));
}
DataFitPtr make_poisson_logexp_fit(double k, Image y) {
  return std::make_unique<PoissonLogExpFit>(k, std::move(y));
}
DataFitPtr make_poisson_piecewise_fit(double k, Image y) {
  return std::make_unique<PoissonPiecewiseFit>(k, std::move(y));
}
DataFitPtr make_speckle_reparam_fit(double k, int looks, Image y) {
  return std::make_unique<SpeckleReparamFit>(k, looks, std::move(y));
}
DataFitPtr make_bernoulli_baseline_fit(Image y) {
  return std::make_unique<BernoulliBaselineFit>(std::move(y));
}
DataFitPtr make_poisson_baseline_fit(Image y) {
  return std::make_unique<PoissonBaselineFit>(std::move(y));
}
DataFitPtr make_speckle_baseline_fit(int looks, Image y) {
  return std::make_unique<SpeckleBaselineFit>(looks, std::move(y));
}

ExpFamilySpec bernoulli_exp_family() {
  ExpFamilySpec s;
  s.log_partition = [](double eta) { return softplus(eta); };
  s.log_partition_deriv = [](double eta) { return sigmoid(eta); };
  s.sufficient_stat = [](double y) { return y; };
  s.link = [](double x) { return logit(x); };
  s.link_inv = [](double eta) { return sigmoid(eta); };
  s.link_deriv = [](double x) { return 1.0 / (x * (1.0 - x)); };
  return s;
}

ExpFamilySpec poisson_exp_family() {
  ExpFamilySpec s;
  s.log_partition = [](double eta) { return std::exp(eta); };
  s.log_partition_deriv = [](double eta) { return std::exp(eta); };
  s.sufficient_stat = [](double y) { return y; };
  s.link = [](double x) { return std::log(x); };
  s.link_inv = [](double eta) { return std::exp(eta); };
  s.link_deriv = [](double x) { return 1.0 / x; };
  return s;
}

double exp_family_value(const ExpFamilySpec& spec, const ReparamFamily& family,
                        const Image& theta, const Image& y) {
  if (theta.rows() != y.rows() || theta.cols() != y.cols())
    throw std::invalid_argument("exp_family_value: shape mismatch");
  const double* t = theta.data();
  const double* yv = y.data();
  long double acc = 0.0;
  for (Index i = 0; i < theta.size(); ++i) {
    const double eta = spec.link(forward_value(family, t[i]));
    acc += spec.log_partition(eta) - eta * spec.sufficient_stat(yv[i]);
  }
  return double(acc);
}

DataFitPtr make_exp_family_fit(ExpFamilySpec spec, ReparamFamily family, Image y) {
  return std::make_unique<ExpFamilyFit>(std::move(spec), family, std::move(y));
}

DataFitPtr make_reparam_fit(const ReparamFamily& family, const NoiseModel& model,
                            Image y) {
  using K = ReparamFamily::Kind;
  if (family.kind == K::Identity) return make_baseline_fit(model, std::move(y));
  switch (model.kind) {
    case NoiseModel::Kind::Bernoulli:
      if (family.kind == K::BernoulliK)
        return make_bernoulli_reparam_fit(family.k, std::move(y));
      break;
    case NoiseModel::Kind::Poisson:
      if (family.kind == K::PoissonLogExpK)
        return make_poisson_logexp_fit(family.k, std::move(y));
      if (family.kind == K::PoissonPiecewiseK)
        return make_poisson_piecewise_fit(family.k, std::move(y));
      break;
    case NoiseModel::Kind::Speckle:
      if (family.kind == K::SpeckleK)
        return make_speckle_reparam_fit(family.k, model.looks, std::move(y));
      break;
  }
  throw std::invalid_argument("make_reparam_fit: no data fit for family '" +
                              label(family) + "' under model '" +
                              std::string(to_string(model.kind)) + "'");
}

DataFitPtr make_baseline_fit(const NoiseModel& model, Image y) {
  switch (model.kind) {
    case NoiseModel::Kind::Bernoulli:
      return make_bernoulli_baseline_fit(std::move(y));
    case NoiseModel::Kind::Poisson:
      return make_poisson_baseline_fit(std::move(y));
    case NoiseModel::Kind::Speckle:
      return make_speckle_baseline_fit(model.looks, std::move(y));
  }
  throw std::invalid_argument("make_baseline_fit: unknown model");
}

}  // namespace retv

#pragma once

#include <functional>
#include <memory>
#include <string>

#include "retv/image.hpp"
#include "retv/noise.hpp"
#include "retv/reparam.hpp"

namespace retv {

// Negative log-likelihood term phi(theta) = sum_i phi_i(theta_i) for one
// observed image.  The reparameterized fits are convex in theta with bounded
// curvature; the intensity-domain ("baseline") fits are the raw likelihoods,
// have unbounded (or even indefinite) curvature near the domain boundary and
// expose a clamp via project_domain instead.
class DataFit {
 public:
  virtual ~DataFit() = default;

  const Image& observations() const { return y_; }

  double value(const Image& theta) const;
  void gradient(const Image& theta, Image& grad) const;
  Image gradient(const Image& theta) const;

  // Upper bound on sup_theta phi_i''; +inf when curvature is unbounded.
  virtual double lipschitz_bound() const = 0;

  // Clamp an iterate into the feasible set (no-op for reparameterized fits).
  virtual void project_domain(Image& /*theta*/) const {}

  virtual std::string name() const = 0;

 protected:
  explicit DataFit(Image y);
  virtual double eval(const Image& theta) const = 0;
  virtual void eval_gradient(const Image& theta, Image& grad) const = 0;
  void check_shape(const Image& theta) const;

  Image y_;
  double y_max_ = 0.0;
};

using DataFitPtr = std::unique_ptr<DataFit>;

// Reparameterized fits (functions of theta, intensity x = f(theta) folded in).
DataFitPtr make_bernoulli_reparam_fit(double k, Image y);
DataFitPtr make_poisson_logexp_fit(double k, Image y);
DataFitPtr make_poisson_piecewise_fit(double k, Image y);
DataFitPtr make_speckle_reparam_fit(double k, int looks, Image y);

// Intensity-domain likelihoods (the baselines).
DataFitPtr make_bernoulli_baseline_fit(Image y);
DataFitPtr make_poisson_baseline_fit(Image y);
DataFitPtr make_speckle_baseline_fit(int looks, Image y);

// Scalar exponential-family description: p(y|eta) with log-partition A,
// sufficient statistic T and link eta = g(x).
struct ExpFamilySpec {
  std::function<double(double)> log_partition;        // A
  std::function<double(double)> log_partition_deriv;  // A'
  std::function<double(double)> sufficient_stat;      // T
  std::function<double(double)> link;                 // g
  std::function<double(double)> link_inv;             // g^{-1}
  std::function<double(double)> link_deriv;           // g'
};

ExpFamilySpec bernoulli_exp_family();
ExpFamilySpec poisson_exp_family();

// sum_i A(g(f(theta_i))) - g(f(theta_i)) T(y_i); the generic route that the
// specialized fits must agree with.
double exp_family_value(const ExpFamilySpec& spec, const ReparamFamily& family,
                        const Image& theta, const Image& y);

DataFitPtr make_exp_family_fit(ExpFamilySpec spec, ReparamFamily family, Image y);

// Pair a family with its noise model.  Identity maps to the baseline fit.
DataFitPtr make_reparam_fit(const ReparamFamily& family, const NoiseModel& model,
                            Image y);
DataFitPtr make_baseline_fit(const NoiseModel& model, Image y);

}  // namespace retv

#include "retv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace retv {

namespace {

void validate_config(const SolverConfig& c) {
  if (!(c.tau >= 0.0) || !std::isfinite(c.tau))
    throw std::invalid_argument("solver: tau must be finite and >= 0");
  if (c.max_outer_iters < 1 || c.inner_iters < 1 || c.memory < 1)
    throw std::invalid_argument("solver: iteration/memory counts must be >= 1");
  if (!(c.rel_tol > 0.0)) throw std::invalid_argument("solver: rel_tol must be > 0");
  if (!(c.eta > 1.0)) throw std::invalid_argument("solver: eta must be > 1");
  if (!(c.alpha_min > 0.0) || !(c.alpha_max > c.alpha_min))
    throw std::invalid_argument("solver: need 0 < alpha_min < alpha_max");
}

SolveResult run(const DataFit& fit, const ReparamFamily* family,
                const SolverConfig& cfg, const Image& start) {
  validate_config(cfg);
  if (start.rows() != fit.observations().rows() ||
      start.cols() != fit.observations().cols())
    throw std::invalid_argument("solver: start shape does not match observations");
  if (!all_finite(start)) throw NumericError("solver: non-finite start");

  const double tau = cfg.tau;
  Image theta = start;
  fit.project_domain(theta);

  SolveResult res;
  double obj = fit.value(theta) + tau * tv_norm(theta);
  if (!std::isfinite(obj))
    throw NumericError("solver: objective not finite at the start");
  res.objective_trace.push_back(obj);

  // Nonmonotone reference window (ring buffer of accepted objectives).
  std::vector<double> window(std::size_t(cfg.memory),
                             -std::numeric_limits<double>::infinity());
  window[0] = obj;
  std::size_t wpos = 1, wcount = 1;

  Image grad(theta.rows(), theta.cols());
  Image grad_prev, theta_prev, s, cand;
  TvProx prox;
  double alpha = 1.0;

  for (int t = 0; t < cfg.max_outer_iters; ++t) {
    fit.gradient(theta, grad);
    if (!all_finite(grad)) throw NumericError("solver: non-finite gradient");

    if (t > 0) {
      // Barzilai-Borwein spectral estimate <dg, dth> / <dth, dth>, clipped.
      const double den = (theta - theta_prev).square().sum();
      const double num = ((grad - grad_prev) * (theta - theta_prev)).sum();
      if (den > 0.0 && num > 0.0)
        alpha = std::clamp(num / den, cfg.alpha_min, cfg.alpha_max);
      // else: no usable curvature (flat or non-convex step); keep previous.
    }

    // Backtrack until the nonmonotone sufficient-decrease test passes.
    double ref = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < wcount; ++i) ref = std::max(ref, window[i]);

    double cand_obj = 0.0, step2 = 0.0;
    bool accepted = false;
    while (true) {
      s = theta - grad / alpha;
      prox.solve(s, tau / alpha, cfg.inner_iters, cand, cfg.warm_start_dual);
      fit.project_domain(cand);
      cand_obj = fit.value(cand) + tau * tv_norm(cand);
      ++res.prox_evals;
      step2 = (cand - theta).square().sum();
      if (std::isfinite(cand_obj) &&
          cand_obj <= ref - 0.5 * cfg.sufficient_decrease * alpha * step2) {
        accepted = true;
        break;
      }
      if (alpha >= cfg.alpha_max) break;
      alpha = std::min(alpha * cfg.eta, cfg.alpha_max);
    }
    if (!accepted) {
      // Step collapsed to nothing; treat as converged at the current iterate.
      res.converged = true;
      break;
    }
    theta_prev.swap(theta);
    grad_prev.swap(grad);
    theta.swap(cand);
    res.objective_trace.push_back(cand_obj);
    res.iterations = t + 1;
    window[wpos % window.size()] = cand_obj;
    ++wpos;
    wcount = std::min(wcount + 1, window.size());

    // An exact prox-gradient fixed point is stationary for every step size.
    if (step2 == 0.0) {
      obj = cand_obj;
      res.converged = true;
      break;
    }

    // Converged only when the iterate, the objective, and the whole (full)
    // nonmonotone window have settled. Step and objective change both scale
    // with 1/alpha, so a single BB curvature spike (one near-boundary pixel
    // of a non-Lipschitz baseline) can make both look quiet for one iteration
    // while the gradient is still large; five in a row cannot.
    double wmin = window[0], wmax = window[0];
    for (std::size_t i = 1; i < wcount; ++i) {
      wmin = std::min(wmin, window[i]);
      wmax = std::max(wmax, window[i]);
    }
    const double scale = std::max(std::abs(cand_obj), 1.0);
    const double rel =
        std::sqrt(step2) / std::max(std::sqrt(theta_prev.square().sum()), 1.0);
    const double obj_rel = std::abs(obj - cand_obj) / std::max(std::abs(obj), 1.0);
    obj = cand_obj;
    if (wcount == window.size() && rel < cfg.rel_tol && obj_rel < cfg.rel_tol &&
        wmax - wmin <= cfg.rel_tol * scale) {
      res.converged = true;
      break;
    }
  }

  res.theta_hat = std::move(theta);
  res.x_hat = family ? forward(*family, res.theta_hat) : res.theta_hat;
  return res;
}

}  // namespace

SolveResult solve(const DataFit& fit, const ReparamFamily& family,
                  const SolverConfig& config, const Image& theta0) {
  return run(fit, &family, config, theta0);
}

SolveResult solve_baseline(const DataFit& fit, const SolverConfig& config,
                           const Image& x0) {
  return run(fit, nullptr, config, x0);
}

Image initial_theta(const ReparamFamily& family, const Image& y) {
  if (y.size() == 0 || !all_finite(y))
    throw std::invalid_argument("initial_theta: bad observations");
  Image c = y;
  switch (family.kind) {
    case ReparamFamily::Kind::Identity:
      return c;
    case ReparamFamily::Kind::BernoulliK:
      c = c.max(1e-12).min(1.0 - 1e-12);
      break;
    case ReparamFamily::Kind::PoissonLogExpK:
    case ReparamFamily::Kind::PoissonPiecewiseK:
      c = c.max(1e-2);
      break;
    case ReparamFamily::Kind::SpeckleK:
    case ReparamFamily::Kind::SpeckleInv:
    case ReparamFamily::Kind::SpeckleExp: {
      // Relative floor: the decreasing maps send tiny intensities to huge
      // theta, so anchor the clamp to the data scale.
      const double floor = std::max(1e-2 * std::max(y.mean(), 0.0), 1e-8);
      c = c.max(floor);
      break;
    }
  }
  return inverse(family, c);
}

Image initial_baseline(const DataFit& fit, const Image& y) {
  if (y.size() == 0 || !all_finite(y))
    throw std::invalid_argument("initial_baseline: bad observations");
  Image x = y;
  fit.project_domain(x);
  return x;
}

}  // namespace retv

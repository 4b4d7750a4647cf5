#pragma once

#include <stdexcept>
#include <vector>

#include "retv/datafit.hpp"
#include "retv/image.hpp"
#include "retv/noise.hpp"
#include "retv/reparam.hpp"
#include "retv/tv.hpp"

namespace retv {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  double tau = 1.0;              // TV weight
  int max_outer_iters = 500;
  double rel_tol = 1e-5;         // on ||step|| / max(||theta||, 1)
  int inner_iters = 50;          // FGP iterations per prox call
  double alpha_min = 1e-30;      // spectral step safeguards
  double alpha_max = 1e30;
  double eta = 2.0;              // backtracking growth factor, > 1
  int memory = 5;                // nonmonotone acceptance window
  double sufficient_decrease = 1e-5;
  bool warm_start_dual = true;   // carry FGP duals across outer iterations
};

struct SolveResult {
  Image theta_hat;
  Image x_hat;            // forward(family, theta_hat)
  std::vector<double> objective_trace;  // length = iterations + 1
  int iterations = 0;
  int prox_evals = 0;     // total prox/objective evaluations (incl. backtracks)
  bool converged = false;
};

// Minimize  phi(theta) + tau * TV(theta)  by spectral proximal gradient
// (SpaRSA: Barzilai-Borwein steps, nonmonotone line search, TV prox via FGP).
// `family` only enters through x_hat = forward(family, theta_hat); the fit
// already is a function of theta.
SolveResult solve(const DataFit& fit, const ReparamFamily& family,
                  const SolverConfig& config, const Image& theta0);

// Same loop in the intensity domain: identity family plus the fit's domain
// projection after every prox step.
SolveResult solve_baseline(const DataFit& fit, const SolverConfig& config,
                           const Image& x0);

// Data-driven starts: theta0 = inverse(family, clamp(y)) with a clamp that
// keeps the inverse well-scaled; baseline x0 = clamp(y) into the fit domain.
Image initial_theta(const ReparamFamily& family, const Image& y);
Image initial_baseline(const DataFit& fit, const Image& y);

}  // namespace retv

#pragma once

#include <vector>

#include "bgn/types.hpp"

namespace bgn {

/// Linear regression subproblem: find w, b with design * w + b ~ targets.
struct RegressionProblem {
  Matrix design;
  Vector targets;
  bool fit_bias = true;

  void validate() const;
};

struct LinearFit {
  Vector weights;
  double bias = 0.0;
  bool converged = true;
  int sweeps = 0;

  bool all_zero() const { return (weights.array() == 0.0).all(); }
};

/// Lasso solver settings and the regularization schedule used while growing a network.
struct LassoConfig {
  double lambda0 = 1e5;
  double divisor = 1.5;
  int max_halvings = 200;
  int cd_max_iters = 10'000;
  double cd_tol = 1e-8;

  void validate() const;
};

/// Ordinary least squares through the normal equations, with a 1e-10 * trace / p
/// ridge jitter so rank-deficient designs resolve to a small-norm solution.
LinearFit least_squares_fit(const RegressionProblem& problem);

/// Minimizes (1/2n)||Xw + b - y||^2 + lambda ||w||_1 by cyclic coordinate
/// descent on internally standardized columns; coefficients are returned in
/// the raw feature scale. Constant columns always get a zero coefficient.
/// If `sweep_objectives` is non-null the standardized objective after each
/// sweep is appended to it.
LinearFit lasso_fit(const RegressionProblem& problem, double lambda, const LassoConfig& cfg = {},
                    std::vector<double>* sweep_objectives = nullptr);

struct ScheduledFit {
  LinearFit fit;
  double used_lambda = 0.0;
  int divisions = 0;
  // False when every attempt up to max_halvings returned an all-zero weight vector.
  bool found_nonzero = false;
};

/// Fits at `current_lambda`, dividing lambda by cfg.divisor while the weight
/// vector is all zeros.
ScheduledFit auto_lambda_fit(const RegressionProblem& problem, const LassoConfig& cfg,
                             double current_lambda);

/// Column scaling used inside the Lasso solver: per-column mean and
/// population standard deviation. `constant[j]` marks columns treated as
/// constant (their coefficient is pinned to zero).
struct Standardization {
  Vector mean;
  Vector scale;
  std::vector<bool> constant;
};

Standardization standardize_columns(const Matrix& design, bool center);

}  // namespace bgn

#include "bgn/regress.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bgn/error.hpp"

namespace bgn {

void RegressionProblem::validate() const {
  if (design.rows() < 1 || design.cols() < 1) throw ShapeError("regression design is empty");
  if (design.rows() != targets.size()) {
    throw ShapeError("regression design has " + std::to_string(design.rows()) + " rows but " +
                     std::to_string(targets.size()) + " targets");
  }
  if (!design.allFinite() || !targets.allFinite()) {
    throw DataError("regression problem contains non-finite values");
  }
}

void LassoConfig::validate() const {
  if (!(lambda0 > 0.0)) throw ConfigError("lambda0 must be positive");
  if (!(divisor > 1.0)) throw ConfigError("lambda divisor must exceed 1");
  if (max_halvings < 1 || cd_max_iters < 1) throw ConfigError("iteration caps must be >= 1");
  if (!(cd_tol > 0.0)) throw ConfigError("cd_tol must be positive");
}

Standardization standardize_columns(const Matrix& design, bool center) {
  const auto n = static_cast<double>(design.rows());
  const Eigen::Index p = design.cols();
  Standardization st{Vector::Zero(p), Vector::Ones(p), std::vector<bool>(p, false)};
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto col = design.col(j);
    const double mean = center ? col.sum() / n : 0.0;
    const double var = (col.array() - mean).square().sum() / n;
    const double scale = std::sqrt(var);
    st.mean[j] = mean;
    if (!(scale > 1e-12 * (1.0 + std::abs(mean)))) {
      st.constant[j] = true;
      st.scale[j] = 1.0;
    } else {
      st.scale[j] = scale;
    }
  }
  return st;
}

LinearFit least_squares_fit(const RegressionProblem& problem) {
  problem.validate();
  const auto n = static_cast<double>(problem.design.rows());
  const Eigen::Index p = problem.design.cols();

  Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(p);
  double y_mean = 0.0;
  if (problem.fit_bias) {
    x_mean = problem.design.colwise().sum() / n;
    y_mean = problem.targets.sum() / n;
  }
  const Eigen::MatrixXd centered = problem.design.rowwise() - x_mean;
  const Vector y = problem.targets.array() - y_mean;

  Eigen::MatrixXd normal = centered.transpose() * centered;
  const Vector rhs = centered.transpose() * y;
  const double trace = normal.trace();

  LinearFit fit;
  fit.weights = Vector::Zero(p);
  if (trace > 0.0) {
    normal.diagonal().array() += 1e-10 * trace / static_cast<double>(p);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) throw SolverError("normal equations are singular");
    fit.weights = ldlt.solve(rhs);
    if (!fit.weights.allFinite()) throw SolverError("least squares produced non-finite weights");
  }
  fit.bias = problem.fit_bias ? y_mean - x_mean.dot(fit.weights) : 0.0;
  return fit;
}

namespace {

// Covariance form of the standardized problem: everything coordinate descent
// needs, independent of the row count.
struct GramSystem {
  Standardization st;
  Eigen::MatrixXd gram;  // X~^T X~ / n
  Vector corr;           // X~^T y~ / n
  double yy = 0.0;       // y~^T y~ / n
  double y_mean = 0.0;
};

GramSystem build_gram(const RegressionProblem& problem) {
  const auto n = static_cast<double>(problem.design.rows());
  GramSystem sys;
  sys.st = standardize_columns(problem.design, problem.fit_bias);
  Eigen::MatrixXd scaled = problem.design;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    if (sys.st.constant[static_cast<std::size_t>(j)]) {
      scaled.col(j).setZero();
    } else {
      scaled.col(j) = (scaled.col(j).array() - sys.st.mean[j]) / sys.st.scale[j];
    }
  }
  sys.y_mean = problem.fit_bias ? problem.targets.sum() / n : 0.0;
  const Vector y = problem.targets.array() - sys.y_mean;
  sys.gram = scaled.transpose() * scaled / n;
  sys.corr = scaled.transpose() * y / n;
  sys.yy = y.squaredNorm() / n;
  return sys;
}

double soft_threshold(double value, double lambda) {
  if (value > lambda) return value - lambda;
  if (value < -lambda) return value + lambda;
  return 0.0;
}

double objective(const GramSystem& sys, const Vector& w, double lambda) {
  return 0.5 * (sys.yy - 2.0 * sys.corr.dot(w) + w.dot(sys.gram * w)) + lambda * w.lpNorm<1>();
}

LinearFit solve_lasso(const GramSystem& sys, double lambda, const LassoConfig& cfg,
                      std::vector<double>* sweep_objectives) {
  const Eigen::Index p = sys.corr.size();
  Vector w = Vector::Zero(p);
  Vector grad = sys.corr;  // corr - gram * w
  LinearFit fit;
  fit.converged = false;
  for (int sweep = 1; sweep <= cfg.cd_max_iters; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (sys.st.constant[static_cast<std::size_t>(j)]) continue;
      const double diag = sys.gram(j, j);
      const double old = w[j];
      const double updated = soft_threshold(grad[j] + diag * old, lambda) / diag;
      if (updated != old) {
        const double delta = updated - old;
        grad.noalias() -= delta * sys.gram.col(j);
        w[j] = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    fit.sweeps = sweep;
    if (sweep_objectives != nullptr) sweep_objectives->push_back(objective(sys, w, lambda));
    if (max_change < cfg.cd_tol) {
      fit.converged = true;
      break;
    }
  }
  fit.weights = Vector::Zero(p);
  double shift = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (w[j] == 0.0) continue;
    fit.weights[j] = w[j] / sys.st.scale[j];
    shift += fit.weights[j] * sys.st.mean[j];
  }
  fit.bias = sys.y_mean - shift;
  return fit;
}

}  // namespace

LinearFit lasso_fit(const RegressionProblem& problem, double lambda, const LassoConfig& cfg,
                    std::vector<double>* sweep_objectives) {
  problem.validate();
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  return solve_lasso(build_gram(problem), lambda, cfg, sweep_objectives);
}

ScheduledFit auto_lambda_fit(const RegressionProblem& problem, const LassoConfig& cfg,
                             double current_lambda) {
  problem.validate();
  cfg.validate();
  if (!(current_lambda > 0.0)) throw ConfigError("current lambda must be positive");
  const GramSystem sys = build_gram(problem);
  ScheduledFit result;
  double lambda = current_lambda;
  for (int division = 0;; ++division) {
    result.fit = solve_lasso(sys, lambda, cfg, nullptr);
    result.used_lambda = lambda;
    result.divisions = division;
    if (!result.fit.all_zero()) {
      result.found_nonzero = true;
      return result;
    }
    if (division == cfg.max_halvings) return result;
    lambda /= cfg.divisor;
  }
}

}  // namespace bgn

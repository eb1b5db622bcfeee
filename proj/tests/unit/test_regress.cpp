#include <gtest/gtest.h>

#include <cmath>

#include "bgn/error.hpp"
#include "bgn/regress.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace bgn;

TEST(LeastSquares, RecoversExactInterpolation) {
  testkit::Gen gen(1);
  RegressionProblem prob{gen.normal_matrix(30, 4), Vector(30), true};
  const Vector w0 = gen.normal_vector(4);
  prob.targets = prob.design * w0;
  prob.targets.array() += 1.75;
  const LinearFit fit = least_squares_fit(prob);
  EXPECT_LE((fit.weights - w0).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(fit.bias, 1.75, 1e-8);
}

TEST(LeastSquares, ConstantColumnGivesMeanIntercept) {
  RegressionProblem prob{Matrix::Ones(5, 1), Vector(5), true};
  prob.targets << 1.0, 2.0, 3.0, 4.0, 10.0;
  const LinearFit fit = least_squares_fit(prob);
  EXPECT_NEAR(fit.weights[0], 0.0, 1e-12);
  EXPECT_NEAR(fit.bias, 4.0, 1e-12);
}

TEST(LeastSquares, ResidualOrthogonalToColumns) {
  testkit::Gen gen(2);
  for (int trial = 0; trial < 10; ++trial) {
    RegressionProblem prob{gen.normal_matrix(20, 3), gen.normal_vector(20), true};
    const LinearFit fit = least_squares_fit(prob);
    Vector resid = prob.targets - prob.design * fit.weights;
    resid.array() -= fit.bias;
    EXPECT_LE((prob.design.transpose() * resid).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(std::abs(resid.sum()), 1e-8);
  }
}

TEST(LeastSquares, WithoutBias) {
  RegressionProblem prob{Matrix(3, 1), Vector(3), false};
  prob.design << 1.0, 2.0, 3.0;
  prob.targets << 2.0, 4.0, 6.0;
  const LinearFit fit = least_squares_fit(prob);
  EXPECT_NEAR(fit.weights[0], 2.0, 1e-9);
  EXPECT_EQ(fit.bias, 0.0);
}

TEST(LeastSquares, RejectsInvalidProblem) {
  EXPECT_THROW(least_squares_fit({Matrix(2, 1), Vector(3), true}), ShapeError);
  EXPECT_THROW(least_squares_fit({Matrix(0, 1), Vector(0), true}), ShapeError);
}

TEST(Lasso, LargeLambdaShrinksEverything) {
  testkit::Gen gen(3);
  const RegressionProblem prob = gen.regression_problem(40, 5, 0.1);
  const LinearFit fit = lasso_fit(prob, 1e6);
  EXPECT_TRUE(fit.all_zero());
  EXPECT_NEAR(fit.bias, prob.targets.mean(), 1e-9);
}

TEST(Lasso, ZeroLambdaMatchesLeastSquares) {
  testkit::Gen gen(4);
  for (int trial = 0; trial < 10; ++trial) {
    const RegressionProblem prob = gen.regression_problem(50, 6, 0.5);
    const LinearFit lasso = lasso_fit(prob, 0.0);
    const LinearFit ls = least_squares_fit(prob);
    EXPECT_LE((lasso.weights - ls.weights).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_NEAR(lasso.bias, ls.bias, 1e-6);
    EXPECT_TRUE(lasso.converged);
  }
}

TEST(Lasso, UnivariateSoftThreshold) {
  RegressionProblem prob{Matrix(2, 1), Vector(2), true};
  prob.design << 1.0, -1.0;
  prob.targets << 1.0, -1.0;
  EXPECT_NEAR(lasso_fit(prob, 0.5).weights[0], 0.5, 1e-12);
}

TEST(Lasso, UnivariateMatchesClosedForm) {
  testkit::Gen gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    RegressionProblem prob{gen.normal_matrix(25, 1, gen.uniform(0.5, 5.0)), gen.normal_vector(25), true};
    const double lambda = gen.uniform(0.0, 0.5);
    const double expected = testkit::univariate_lasso_slope(prob.design.col(0), prob.targets, lambda);
    EXPECT_NEAR(lasso_fit(prob, lambda).weights[0], expected, 1e-10);
  }
}

TEST(Lasso, SatisfiesKkt) {
  testkit::Gen gen(6);
  for (int trial = 0; trial < 50; ++trial) {
    const RegressionProblem prob = gen.regression_problem(gen.integer(10, 60), gen.integer(1, 8), 1.0);
    const double lambda = gen.uniform(0.0, 1.0);
    const LinearFit fit = lasso_fit(prob, lambda);
    EXPECT_LE(testkit::max_kkt_violation(prob, fit, lambda), 1e-6);
  }
}

TEST(Lasso, ObjectiveNonIncreasingAcrossSweeps) {
  testkit::Gen gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const RegressionProblem prob = gen.regression_problem(40, 6, 1.0);
    std::vector<double> objectives;
    lasso_fit(prob, gen.uniform(0.01, 0.5), {}, &objectives);
    ASSERT_FALSE(objectives.empty());
    for (std::size_t k = 1; k < objectives.size(); ++k) {
      EXPECT_LE(objectives[k], objectives[k - 1] + 1e-12 * std::abs(objectives[k - 1]));
    }
  }
}

TEST(Lasso, SupportGrowsAsLambdaShrinks) {
  testkit::Gen gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    RegressionProblem prob{gen.normal_matrix(80, 6), Vector(80), true};
    prob.targets = prob.design * gen.normal_vector(6) + gen.normal_vector(80, 0.2);
    double lambda = 2.0;
    for (int step = 0; step < 15; ++step) {
      const auto nnz = (lasso_fit(prob, lambda).weights.array() != 0.0).count();
      const auto next = (lasso_fit(prob, lambda / 1.5).weights.array() != 0.0).count();
      EXPECT_LE(nnz, next);
      lambda /= 1.5;
    }
  }
}

TEST(Lasso, ConstantColumnsGetZero) {
  testkit::Gen gen(9);
  RegressionProblem prob{gen.normal_matrix(20, 3), gen.normal_vector(20), true};
  prob.design.col(1).setConstant(4.0);
  const LinearFit fit = lasso_fit(prob, 0.0);
  EXPECT_EQ(fit.weights[1], 0.0);
}

TEST(Lasso, Deterministic) {
  testkit::Gen gen(10);
  const RegressionProblem prob = gen.regression_problem(30, 5, 1.0);
  const LinearFit a = lasso_fit(prob, 0.1);
  const LinearFit b = lasso_fit(prob, 0.1);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.bias, b.bias);
}

TEST(Lasso, IterationCapClearsConvergedFlag) {
  testkit::Gen gen(11);
  RegressionProblem prob{gen.normal_matrix(30, 5), gen.normal_vector(30), true};
  prob.design.col(1) = prob.design.col(0) + 1e-3 * gen.normal_vector(30);
  LassoConfig cfg;
  cfg.cd_max_iters = 1;
  EXPECT_FALSE(lasso_fit(prob, 1e-4, cfg).converged);
}

TEST(Lasso, RejectsNegativeLambda) {
  testkit::Gen gen(12);
  EXPECT_THROW(lasso_fit(gen.regression_problem(10, 2, 1.0), -1.0), ConfigError);
}

TEST(LassoConfig, Validation) {
  LassoConfig cfg;
  cfg.divisor = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.lambda0 = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.cd_tol = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Schedule, DividesUntilNonzero) {
  testkit::Gen gen(13);
  const RegressionProblem prob = gen.regression_problem(50, 4, 0.1);
  const ScheduledFit s = auto_lambda_fit(prob, {}, 1e5);
  ASSERT_TRUE(s.found_nonzero);
  EXPECT_FALSE(s.fit.all_zero());
  EXPECT_GT(s.divisions, 0);
  EXPECT_DOUBLE_EQ(s.used_lambda, 1e5 / std::pow(1.5, s.divisions));
}

TEST(Schedule, ZeroTargetsExhaustCap) {
  RegressionProblem prob{Matrix(4, 1), Vector::Zero(4), true};
  prob.design << 1.0, 2.0, 3.0, 4.0;
  LassoConfig cfg;
  cfg.max_halvings = 30;
  const ScheduledFit s = auto_lambda_fit(prob, cfg, 1e5);
  EXPECT_FALSE(s.found_nonzero);
  EXPECT_TRUE(s.fit.all_zero());
  EXPECT_EQ(s.fit.bias, 0.0);
  EXPECT_EQ(s.divisions, 30);
}

TEST(Schedule, CrossesAnalyticActivationPoint) {
  testkit::Gen gen(14);
  for (int trial = 0; trial < 20; ++trial) {
    RegressionProblem prob{gen.normal_matrix(30, 1, 3.0), gen.normal_vector(30, 50.0), true};
    const Vector z = (prob.design.col(0).array() - prob.design.col(0).mean()) /
                     std::sqrt((prob.design.col(0).array() - prob.design.col(0).mean()).square().mean());
    const double lambda_star =
        std::abs((z.array() * (prob.targets.array() - prob.targets.mean())).mean());
    const ScheduledFit s = auto_lambda_fit(prob, {}, 1e5);
    ASSERT_TRUE(s.found_nonzero);
    EXPECT_LT(s.used_lambda, lambda_star);
    EXPECT_GE(s.used_lambda * 1.5, lambda_star * (1.0 - 1e-12));
  }
}

TEST(Standardize, PopulationScaleAndConstantDetection) {
  Matrix x(4, 2);
  x << 1.0, 5.0, 2.0, 5.0, 3.0, 5.0, 4.0, 5.0;
  const Standardization s = standardize_columns(x, true);
  EXPECT_DOUBLE_EQ(s.mean[0], 2.5);
  EXPECT_DOUBLE_EQ(s.scale[0], std::sqrt(1.25));
  EXPECT_FALSE(s.constant[0]);
  EXPECT_TRUE(s.constant[1]);
}

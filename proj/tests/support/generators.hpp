#pragma once

// Seeded random instances for property tests.

#include <cstdint>
#include <random>
#include <vector>

#include "bgn/dataset.hpp"
#include "bgn/model.hpp"
#include "bgn/regress.hpp"

namespace bgn::testkit {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, double sd = 1.0) {
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal(0.0, sd);
    }
    return out;
  }
  Vector normal_vector(Eigen::Index n, double sd = 1.0) {
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = normal(0.0, sd);
    return out;
  }

  // Nonlinear targets: a few random hyperplane steps plus a linear trend and noise.
  Dataset regression_dataset(Eigen::Index m, Eigen::Index d0, Eigen::Index dl) {
    Matrix x = normal_matrix(m, d0);
    Matrix y(m, dl);
    const Matrix trend = normal_matrix(d0, dl);
    const Matrix steps = normal_matrix(3, d0);
    const Matrix heights = normal_matrix(3, dl, 2.0);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < dl; ++j) {
        double v = x.row(i).dot(trend.col(j).transpose()) + normal(0.0, 0.3);
        for (Eigen::Index s = 0; s < 3; ++s) {
          if (x.row(i).dot(steps.row(s)) > 0.0) v += heights(s, j);
        }
        y(i, j) = v;
      }
    }
    return Dataset(std::move(x), std::move(y));
  }

  // Linear targets with noise on columns of uneven scale.
  RegressionProblem regression_problem(Eigen::Index n, Eigen::Index p, double noise) {
    RegressionProblem prob{normal_matrix(n, p), Vector(n), true};
    for (Eigen::Index j = 0; j < p; ++j) prob.design.col(j) *= uniform(0.1, 10.0);
    const Vector w = normal_vector(p);
    prob.targets = prob.design * w + normal_vector(n, noise);
    prob.targets.array() += normal();
    return prob;
  }

  ActivationParams activation() {
    const double h1 = uniform(-3.0, 3.0);
    return {uniform(-2.0, 2.0), h1, h1 + uniform(0.1, 4.0)};
  }

  // Random network with the given widths d0, d1, ..., dl.
  BannModel model(const std::vector<std::size_t>& arch, const ActivationParams& act) {
    std::vector<LayerParams> hidden;
    for (std::size_t k = 1; k + 1 < arch.size(); ++k) hidden.push_back(layer(arch[k - 1], arch[k]));
    LayerParams out = layer(arch[arch.size() - 2], arch.back());
    return BannModel(act, std::move(hidden), std::move(out));
  }

  LayerParams layer(std::size_t in, std::size_t out) {
    return {normal_matrix(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)),
            normal_vector(static_cast<Eigen::Index>(out))};
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace bgn::testkit

#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace bgn {

// Row-major so that an example (or a neuron's incoming weights) is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline std::span<const double> row_span(const Matrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// Strictly sequential dot product. Training and inference both go through this
// so that a hyperplane side computed during training is bit-identical to the
// side the model's forward pass computes.
inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace bgn

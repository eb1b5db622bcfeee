#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bgn/dataset.hpp"
#include "bgn/types.hpp"

namespace bgn {

/// Two-valued step function: h1 below the threshold t, h2 at or above it.
struct ActivationParams {
  double t = 0.0;
  double h1 = -1.0;
  double h2 = 1.0;

  static ActivationParams sign() { return {}; }

  /// Throws ConfigError unless all values are finite and h1 < h2.
  void validate() const;

  double operator()(double z) const { return z < t ? h1 : h2; }

  friend bool operator==(const ActivationParams&, const ActivationParams&) = default;
};

/// Affine map of one layer: weights are (outputs x inputs), one bias per output.
struct LayerParams {
  Matrix weights;
  Vector biases;

  std::size_t inputs() const { return static_cast<std::size_t>(weights.cols()); }
  std::size_t outputs() const { return static_cast<std::size_t>(weights.rows()); }

  /// Throws ShapeError on a row/bias mismatch and DataError on non-finite entries.
  void validate(const std::string& name) const;
};

/// Binary activated network: hidden layers share one ActivationParams, the
/// output layer is affine with identity activation.
class BannModel {
 public:
  BannModel(ActivationParams activation, std::vector<LayerParams> hidden, LayerParams output);

  const ActivationParams& activation() const { return activation_; }
  const std::vector<LayerParams>& hidden() const { return hidden_; }
  const LayerParams& output() const { return output_; }

  std::size_t input_dim() const;
  std::size_t output_dim() const { return output_.outputs(); }
  /// Number of affine layers, hidden plus output.
  std::size_t depth() const { return hidden_.size() + 1; }
  /// Widths d0, d1, ..., dl.
  std::vector<std::size_t> architecture() const;

 private:
  ActivationParams activation_;
  std::vector<LayerParams> hidden_;
  LayerParams output_;
};

Vector activate(const Vector& z, const ActivationParams& params);

/// Applies one layer's affine map followed by the activation.
Vector apply_hidden(const LayerParams& layer, const ActivationParams& params,
                    std::span<const double> x);

Vector forward(const BannModel& model, std::span<const double> x);
inline Vector forward(const BannModel& model, const Vector& x) { return forward(model, as_span(x)); }

/// Forward pass for every row of `features`; result is (m x dl).
Matrix forward_batch(const BannModel& model, const Matrix& features);

/// Output of the composition of hidden layers 1..k (1-based).
Vector hidden_pattern(const BannModel& model, std::span<const double> x, std::size_t k);
inline Vector hidden_pattern(const BannModel& model, const Vector& x, std::size_t k) {
  return hidden_pattern(model, as_span(x), k);
}

/// hidden_pattern for every row; result is (m x d_k).
Matrix hidden_pattern_batch(const BannModel& model, const Matrix& features, std::size_t k);

/// Mean over examples of the squared Euclidean prediction error.
double mse(const BannModel& model, const Dataset& data);

/// Mean over rows of the squared norm of `errors`.
double mean_squared_norm(const Matrix& errors);

/// Rewrites the network for another activation parametrization while
/// preserving its input-output function.
BannModel reparametrize_activation(const BannModel& model, const ActivationParams& target);

/// Weights and biases whose magnitude exceeds `tol`, over all layers.
std::size_t count_nonzero_parameters(const BannModel& model, double tol = 0.0);

}  // namespace bgn

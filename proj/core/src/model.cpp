#include "bgn/model.hpp"

#include <cmath>
#include <string>

#include "bgn/error.hpp"

namespace bgn {

void ActivationParams::validate() const {
  if (!std::isfinite(t) || !std::isfinite(h1) || !std::isfinite(h2)) {
    throw ConfigError("activation parameters must be finite");
  }
  if (!(h1 < h2)) {
    throw ConfigError("activation requires h1 < h2 (got h1=" + std::to_string(h1) +
                      ", h2=" + std::to_string(h2) + ")");
  }
}

void LayerParams::validate(const std::string& name) const {
  if (weights.rows() != biases.size()) {
    throw ShapeError(name + ": " + std::to_string(weights.rows()) + " weight rows but " +
                     std::to_string(biases.size()) + " biases");
  }
  if (weights.rows() < 1) throw ShapeError(name + ": layer has no units");
  if (!weights.allFinite() || !biases.allFinite()) {
    throw DataError(name + ": non-finite weight or bias");
  }
}

BannModel::BannModel(ActivationParams activation, std::vector<LayerParams> hidden,
                     LayerParams output)
    : activation_(activation), hidden_(std::move(hidden)), output_(std::move(output)) {
  activation_.validate();
  for (std::size_t k = 0; k < hidden_.size(); ++k) {
    const std::string name = "hidden layer " + std::to_string(k + 1);
    hidden_[k].validate(name);
    if (k > 0 && hidden_[k].inputs() != hidden_[k - 1].outputs()) {
      throw ShapeError(name + " expects " + std::to_string(hidden_[k].inputs()) +
                       " inputs but the previous layer has " +
                       std::to_string(hidden_[k - 1].outputs()) + " units");
    }
  }
  output_.validate("output layer");
  if (!hidden_.empty() && output_.inputs() != hidden_.back().outputs()) {
    throw ShapeError("output layer expects " + std::to_string(output_.inputs()) +
                     " inputs but the last hidden layer has " +
                     std::to_string(hidden_.back().outputs()) + " units");
  }
}

std::size_t BannModel::input_dim() const {
  return hidden_.empty() ? output_.inputs() : hidden_.front().inputs();
}

std::vector<std::size_t> BannModel::architecture() const {
  std::vector<std::size_t> widths{input_dim()};
  for (const auto& layer : hidden_) widths.push_back(layer.outputs());
  widths.push_back(output_dim());
  return widths;
}

namespace {

Vector affine(const LayerParams& layer, std::span<const double> x) {
  Vector z(layer.weights.rows());
  for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
    z[i] = dot(row_span(layer.weights, i), x) + layer.biases[i];
  }
  return z;
}

void check_input(const BannModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim()) {
    throw ShapeError("input has " + std::to_string(x.size()) + " values but " +
                     (model.hidden().empty() ? std::string("output layer")
                                             : std::string("hidden layer 1")) +
                     " expects " + std::to_string(model.input_dim()));
  }
}

}  // namespace

Vector activate(const Vector& z, const ActivationParams& params) {
  Vector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = params(z[i]);
  return out;
}

Vector apply_hidden(const LayerParams& layer, const ActivationParams& params,
                    std::span<const double> x) {
  if (x.size() != layer.inputs()) throw ShapeError("layer input size mismatch");
  return activate(affine(layer, x), params);
}

Vector hidden_pattern(const BannModel& model, std::span<const double> x, std::size_t k) {
  if (k < 1 || k > model.hidden().size()) {
    throw ConfigError("hidden layer index " + std::to_string(k) + " outside 1.." +
                      std::to_string(model.hidden().size()));
  }
  check_input(model, x);
  Vector h = apply_hidden(model.hidden()[0], model.activation(), x);
  for (std::size_t layer = 1; layer < k; ++layer) {
    h = apply_hidden(model.hidden()[layer], model.activation(), as_span(h));
  }
  return h;
}

Vector forward(const BannModel& model, std::span<const double> x) {
  check_input(model, x);
  if (model.hidden().empty()) return affine(model.output(), x);
  const Vector h = hidden_pattern(model, x, model.hidden().size());
  return affine(model.output(), as_span(h));
}

Matrix forward_batch(const BannModel& model, const Matrix& features) {
  Matrix out(features.rows(), static_cast<Eigen::Index>(model.output_dim()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    out.row(i) = forward(model, row_span(features, i)).transpose();
  }
  return out;
}

Matrix hidden_pattern_batch(const BannModel& model, const Matrix& features, std::size_t k) {
  if (k < 1 || k > model.hidden().size()) {
    throw ConfigError("hidden layer index " + std::to_string(k) + " out of range");
  }
  Matrix out(features.rows(), static_cast<Eigen::Index>(model.hidden()[k - 1].outputs()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    out.row(i) = hidden_pattern(model, row_span(features, i), k).transpose();
  }
  return out;
}

double mean_squared_norm(const Matrix& errors) {
  if (errors.rows() == 0) throw DataError("mean squared error of an empty set");
  double total = 0.0;
  for (Eigen::Index i = 0; i < errors.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < errors.cols(); ++j) row += errors(i, j) * errors(i, j);
    total += row;
  }
  return total / static_cast<double>(errors.rows());
}

double mse(const BannModel& model, const Dataset& data) {
  if (data.input_dim() != model.input_dim() || data.output_dim() != model.output_dim()) {
    throw ShapeError("dataset is " + std::to_string(data.input_dim()) + " -> " +
                     std::to_string(data.output_dim()) + " but model is " +
                     std::to_string(model.input_dim()) + " -> " +
                     std::to_string(model.output_dim()));
  }
  return mean_squared_norm(forward_batch(model, data.features()) - data.labels());
}

BannModel reparametrize_activation(const BannModel& model, const ActivationParams& target) {
  if (target.h1 == target.h2) throw ConfigError("target activation is degenerate (h1 == h2)");
  target.validate();
  const ActivationParams& src = model.activation();
  if (model.hidden().empty()) return BannModel(target, {}, model.output());

  // Every hidden output satisfies h = scale * h_target - offset.
  const double scale = (src.h1 - src.h2) / (target.h1 - target.h2);
  const double offset = scale * target.h1 - src.h1;
  const double shift = target.t - src.t;

  auto rescale = [&](const LayerParams& layer, bool feeds_activation) {
    LayerParams out;
    out.weights = scale * layer.weights;
    out.biases = layer.biases - offset * layer.weights.rowwise().sum();
    if (feeds_activation) out.biases.array() += shift;
    return out;
  };

  std::vector<LayerParams> hidden;
  hidden.reserve(model.hidden().size());
  LayerParams first = model.hidden().front();
  first.biases.array() += shift;
  hidden.push_back(std::move(first));
  for (std::size_t k = 1; k < model.hidden().size(); ++k) {
    hidden.push_back(rescale(model.hidden()[k], true));
  }
  return BannModel(target, std::move(hidden), rescale(model.output(), false));
}

std::size_t count_nonzero_parameters(const BannModel& model, double tol) {
  if (!(tol >= 0.0)) throw ConfigError("sparsity tolerance must be non-negative");
  auto count = [tol](const LayerParams& layer) {
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
      if (std::abs(layer.weights.data()[i]) > tol) ++n;
    }
    for (Eigen::Index i = 0; i < layer.biases.size(); ++i) {
      if (std::abs(layer.biases[i]) > tol) ++n;
    }
    return n;
  };
  std::size_t total = count(model.output());
  for (const auto& layer : model.hidden()) total += count(layer);
  return total;
}

}  // namespace bgn

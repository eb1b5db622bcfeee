#include "bgn/train.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "bgn/error.hpp"

namespace bgn {

void TrainConfig::validate() const {
  if (max_neurons_per_layer < 1) throw ConfigError("max neurons per layer must be >= 1");
  if (max_hidden_layers < 1) throw ConfigError("max hidden layers must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in (0, 1)");
  }
  if (!(min_layer_gain >= 0.0 && min_layer_gain < 1.0)) {
    throw ConfigError("min layer gain must lie in [0, 1)");
  }
  lasso.validate();
}

// ---------------------------------------------------------------------------
// Split search
// ---------------------------------------------------------------------------

BiasSplit optimal_bias(const Vector& w, const Matrix& features, const Matrix& residuals) {
  if (w.size() != features.cols()) throw ShapeError("weight vector does not match feature width");
  if (features.rows() != residuals.rows()) throw ShapeError("features/residuals row mismatch");
  if (features.rows() < 1) throw ShapeError("split search needs at least one example");
  if ((w.array() == 0.0).all()) {
    throw ConfigError("all-zero weight vector: no hyperplane direction, fall back");
  }

  const auto m = static_cast<std::size_t>(features.rows());
  const Eigen::Index dl = residuals.cols();
  std::vector<double> proj(m);
  for (std::size_t i = 0; i < m; ++i) {
    proj[i] = dot(as_span(w), row_span(features, static_cast<Eigen::Index>(i)));
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return proj[a] < proj[b] || (proj[a] == proj[b] && a < b);
  });

  // prefix(k, j): residual sum of the k lowest projections; suffix(k, j): the rest.
  Matrix prefix = Matrix::Zero(static_cast<Eigen::Index>(m + 1), dl);
  Matrix suffix = Matrix::Zero(static_cast<Eigen::Index>(m + 1), dl);
  for (std::size_t k = 0; k < m; ++k) {
    const auto row = static_cast<Eigen::Index>(order[k]);
    prefix.row(static_cast<Eigen::Index>(k + 1)) =
        prefix.row(static_cast<Eigen::Index>(k)) + residuals.row(row);
  }
  for (std::size_t k = m; k-- > 0;) {
    const auto row = static_cast<Eigen::Index>(order[k]);
    suffix.row(static_cast<Eigen::Index>(k)) =
        suffix.row(static_cast<Eigen::Index>(k + 1)) + residuals.row(row);
  }
  double sum_squares = 0.0;
  for (Eigen::Index j = 0; j < dl; ++j) sum_squares += residuals.col(j).squaredNorm();

  // Minimizing the weighted variance is maximizing sum_j S_-^2/n_- + S_+^2/n_+.
  auto gain = [&](std::size_t k) {
    double g = 0.0;
    for (Eigen::Index j = 0; j < dl; ++j) {
      if (k > 0) {
        const double s = prefix(static_cast<Eigen::Index>(k), j);
        g += s * s / static_cast<double>(k);
      }
      if (k < m) {
        const double s = suffix(static_cast<Eigen::Index>(k), j);
        g += s * s / static_cast<double>(m - k);
      }
    }
    return g;
  };

  std::size_t best_k = 0;
  double best_gain = gain(0);
  for (std::size_t k = 1; k <= m; ++k) {
    // A cut between equal projections cannot be realized by any bias.
    if (k < m && !(proj[order[k - 1]] < proj[order[k]])) continue;
    const double g = gain(k);
    if (g > best_gain + 1e-12 * std::abs(best_gain)) {
      best_gain = g;
      best_k = k;
    }
  }

  BiasSplit split;
  split.negatives = best_k;
  split.objective = std::max(0.0, (sum_squares - best_gain) / static_cast<double>(m));
  if (best_k == 0) {
    split.bias = -(proj[order.front()] - 1.0);
  } else if (best_k == m) {
    const double top = proj[order.back()];
    split.bias = -(top + 1.0);
    if (!(top + split.bias < 0.0)) split.bias = std::nextafter(-top, -std::numeric_limits<double>::infinity());
  } else {
    const double lo = proj[order[best_k - 1]];
    const double hi = proj[order[best_k]];
    double mid = lo + (hi - lo) / 2.0;
    if (!(mid > lo)) mid = hi;  // adjacent doubles
    split.bias = -mid;
  }
  return split;
}

Vector hyperplane_sides(const Vector& w, double b, const Matrix& features) {
  Vector sides(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    sides[i] = dot(as_span(w), row_span(features, i)) + b < 0.0 ? -1.0 : 1.0;
  }
  return sides;
}

RegressionProblem stack_residuals(const Matrix& features, const Matrix& residuals) {
  if (features.rows() != residuals.rows()) throw ShapeError("features/residuals row mismatch");
  const Eigen::Index m = features.rows();
  const Eigen::Index dl = residuals.cols();
  if (dl == 1) return {features, residuals.col(0), true};
  RegressionProblem problem{Matrix(m * dl, features.cols()), Vector(m * dl), true};
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < dl; ++j) {
      problem.design.row(i * dl + j) = features.row(i);
      problem.targets[i * dl + j] = residuals(i, j);
    }
  }
  return problem;
}

std::optional<Hyperplane> fit_hyperplane(const Matrix& features, const Matrix& residuals,
                                         const LassoConfig& cfg, double current_lambda) {
  const ScheduledFit sched =
      auto_lambda_fit(stack_residuals(features, residuals), cfg, current_lambda);
  if (!sched.found_nonzero) return std::nullopt;
  const BiasSplit split = optimal_bias(sched.fit.weights, features, residuals);
  return Hyperplane{sched.fit.weights, split.bias, split.objective, sched.used_lambda};
}

OutputCoefficients compute_cd(const Matrix& residuals, const Vector& side) {
  if (residuals.rows() < 1) throw ShapeError("cannot fit output coefficients on no residuals");
  if (side.size() != residuals.rows()) throw ShapeError("side vector does not match residuals");
  const Eigen::Index dl = residuals.cols();
  OutputCoefficients out{Vector::Zero(dl), Vector::Zero(dl)};
  std::size_t n_pos = 0;
  for (Eigen::Index i = 0; i < side.size(); ++i) n_pos += side[i] > 0.0 ? 1 : 0;
  const std::size_t n_neg = static_cast<std::size_t>(side.size()) - n_pos;
  for (Eigen::Index j = 0; j < dl; ++j) {
    double pos = 0.0;
    double neg = 0.0;
    for (Eigen::Index i = 0; i < side.size(); ++i) {
      if (side[i] > 0.0) {
        pos += residuals(i, j);
      } else {
        neg += residuals(i, j);
      }
    }
    if (n_pos == 0 || n_neg == 0) {
      out.d[j] = (pos + neg) / static_cast<double>(side.size());
      continue;
    }
    const double rho_pos = pos / static_cast<double>(n_pos);
    const double rho_neg = neg / static_cast<double>(n_neg);
    out.c[j] = (rho_pos - rho_neg) / 2.0;
    out.d[j] = (rho_pos + rho_neg) / 2.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Layer state
// ---------------------------------------------------------------------------

LayerState::LayerState(Matrix inputs, Matrix targets, Matrix val_inputs, Matrix val_targets)
    : inputs_(std::move(inputs)),
      targets_(std::move(targets)),
      residuals_(targets_),
      val_inputs_(std::move(val_inputs)),
      val_targets_(std::move(val_targets)) {
  if (inputs_.rows() != targets_.rows()) throw ShapeError("layer inputs/targets row mismatch");
  if (inputs_.rows() < 1) throw ShapeError("layer needs at least one training example");
  if (val_inputs_.rows() > 0) {
    if (val_inputs_.cols() != inputs_.cols() || val_targets_.cols() != targets_.cols() ||
        val_inputs_.rows() != val_targets_.rows()) {
      throw ShapeError("validation set shape does not match training set");
    }
  }
  noise_floor_ = 1e-12 * mean_squared_norm(targets_);
}

double LayerState::train_mse() const { return mean_squared_norm(residuals_); }

double LayerState::required_decrease(double mse_before) const {
  return std::max(noise_floor_, 1e-6 * mse_before);
}

LayerParams LayerState::hidden_layer() const {
  LayerParams layer{Matrix(static_cast<Eigen::Index>(neurons_.size()), inputs_.cols()),
                    Vector(static_cast<Eigen::Index>(neurons_.size()))};
  for (std::size_t t = 0; t < neurons_.size(); ++t) {
    layer.weights.row(static_cast<Eigen::Index>(t)) = neurons_[t].w.transpose();
    layer.biases[static_cast<Eigen::Index>(t)] = neurons_[t].b;
  }
  return layer;
}

LayerParams LayerState::output_head() const {
  const Eigen::Index dl = targets_.cols();
  LayerParams head{Matrix(dl, static_cast<Eigen::Index>(neurons_.size())), Vector::Zero(dl)};
  for (std::size_t t = 0; t < neurons_.size(); ++t) {
    head.weights.col(static_cast<Eigen::Index>(t)) = neurons_[t].c;
    head.biases += neurons_[t].d;
  }
  return head;
}

double LayerState::val_mse() const {
  if (!has_validation()) throw ConfigError("layer has no validation set");
  const LayerParams head = output_head();
  const Eigen::Index width = static_cast<Eigen::Index>(neurons_.size());
  Matrix errors(val_inputs_.rows(), val_targets_.cols());
  Vector pattern(width);
  for (Eigen::Index i = 0; i < val_inputs_.rows(); ++i) {
    for (Eigen::Index t = 0; t < width; ++t) {
      const Neuron& n = neurons_[static_cast<std::size_t>(t)];
      pattern[t] = dot(as_span(n.w), row_span(val_inputs_, i)) + n.b < 0.0 ? -1.0 : 1.0;
    }
    for (Eigen::Index j = 0; j < val_targets_.cols(); ++j) {
      errors(i, j) = dot(row_span(head.weights, j), as_span(pattern)) + head.biases[j] -
                     val_targets_(i, j);
    }
  }
  return mean_squared_norm(errors);
}

void LayerState::append(Neuron neuron, Vector sides) {
  neurons_.push_back(std::move(neuron));
  sides_.push_back(std::move(sides));
}

void LayerState::replace(std::size_t index, Neuron neuron, Vector sides) {
  neurons_.at(index) = std::move(neuron);
  sides_.at(index) = std::move(sides);
}

void LayerState::pop_back() {
  neurons_.pop_back();
  sides_.pop_back();
}

namespace {

void subtract_contribution(Matrix& residuals, const Vector& sides, const OutputCoefficients& cd) {
  for (Eigen::Index i = 0; i < residuals.rows(); ++i) {
    for (Eigen::Index j = 0; j < residuals.cols(); ++j) {
      residuals(i, j) -= cd.c[j] * sides[i] + cd.d[j];
    }
  }
}

void add_contribution(Matrix& residuals, const Vector& sides, const Neuron& n) {
  for (Eigen::Index i = 0; i < residuals.rows(); ++i) {
    for (Eigen::Index j = 0; j < residuals.cols(); ++j) {
      residuals(i, j) += n.c[j] * sides[i] + n.d[j];
    }
  }
}

double max_side_sum(const Matrix& residuals, const Vector& sides) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < residuals.cols(); ++j) {
    double pos = 0.0;
    double neg = 0.0;
    for (Eigen::Index i = 0; i < residuals.rows(); ++i) {
      (sides[i] > 0.0 ? pos : neg) += residuals(i, j);
    }
    worst = std::max({worst, std::abs(pos), std::abs(neg)});
  }
  return worst;
}

double predicted_drop_from_sums(const Matrix& residuals, const Vector& sides) {
  double total = 0.0;
  std::size_t n_pos = 0;
  for (Eigen::Index i = 0; i < sides.size(); ++i) n_pos += sides[i] > 0.0 ? 1 : 0;
  const std::size_t n_neg = static_cast<std::size_t>(sides.size()) - n_pos;
  for (Eigen::Index j = 0; j < residuals.cols(); ++j) {
    double pos = 0.0;
    double neg = 0.0;
    for (Eigen::Index i = 0; i < residuals.rows(); ++i) {
      (sides[i] > 0.0 ? pos : neg) += residuals(i, j);
    }
    if (n_pos > 0) total += pos * pos / static_cast<double>(n_pos);
    if (n_neg > 0) total += neg * neg / static_cast<double>(n_neg);
  }
  return total / static_cast<double>(residuals.rows());
}

}  // namespace

AddOutcome add_neuron(LayerState& state, const LassoConfig& cfg, LambdaSchedule& lambda) {
  AddOutcome out;
  out.mse_before = state.train_mse();
  out.mse_after = out.mse_before;
  out.lambda = lambda.current;
  const auto plane = fit_hyperplane(state.inputs(), state.residuals(), cfg, lambda.current);
  if (!plane) {
    out.status = AddOutcome::Status::no_direction;
    return out;
  }
  Vector sides = hyperplane_sides(plane->w, plane->b, state.inputs());
  const OutputCoefficients cd = compute_cd(state.residuals(), sides);
  out.drop_sums = predicted_drop_from_sums(state.residuals(), sides);
  out.drop_cd = (cd.c.array().square() - cd.d.array().square()).sum();

  const Matrix saved = state.residuals();
  subtract_contribution(state.mutable_residuals(), sides, cd);
  out.mse_after = state.train_mse();
  if (!(out.mse_after < out.mse_before - state.required_decrease(out.mse_before))) {
    state.mutable_residuals() = saved;
    out.mse_after = out.mse_before;
    out.status = AddOutcome::Status::no_decrease;
    return out;
  }
  out.realized_drop = ((saved - state.residuals()).array() * (saved + state.residuals()).array()).sum() /
                      static_cast<double>(saved.rows());
  out.max_side_sum = max_side_sum(state.residuals(), sides);
  lambda.current = plane->used_lambda;
  out.lambda = lambda.current;
  state.append(Neuron{plane->w, plane->b, cd.c, cd.d}, std::move(sides));
  return out;
}

ReplaceOutcome replace_pass(LayerState& state, const LassoConfig& cfg, LambdaSchedule& lambda,
                            std::size_t cap) {
  ReplaceOutcome out;
  if (state.width() < 2) return out;
  const std::size_t attempts = std::min(state.width() - 1, cap);
  for (std::size_t k = 0; k < attempts; ++k) {
    ++out.attempts;
    const double before = state.train_mse();
    const Matrix saved = state.residuals();
    add_contribution(state.mutable_residuals(), state.sides(k), state.neurons()[k]);

    const auto plane = fit_hyperplane(state.inputs(), state.residuals(), cfg, lambda.current);
    if (!plane) {
      state.mutable_residuals() = saved;
      break;
    }
    Vector sides = hyperplane_sides(plane->w, plane->b, state.inputs());
    const OutputCoefficients cd = compute_cd(state.residuals(), sides);
    subtract_contribution(state.mutable_residuals(), sides, cd);
    if (!(state.train_mse() < before - state.required_decrease(before))) {
      state.mutable_residuals() = saved;
      break;
    }
    out.max_side_sum = std::max(out.max_side_sum, max_side_sum(state.residuals(), sides));
    lambda.current = plane->used_lambda;
    state.replace(k, Neuron{plane->w, plane->b, cd.c, cd.d}, std::move(sides));
    ++out.accepted;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Layer and network construction
// ---------------------------------------------------------------------------

namespace {

bool columns_constant(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (m.col(j).maxCoeff() != m.col(j).minCoeff()) return false;
  }
  return true;
}

std::size_t nonzero_weights(const std::vector<Neuron>& neurons) {
  std::size_t n = 0;
  for (const auto& neuron : neurons) n += static_cast<std::size_t>((neuron.w.array() != 0.0).count());
  return n;
}

BannModel single_layer_model(const LayerParams& hidden, const LayerParams& head) {
  return BannModel(ActivationParams::sign(), {hidden}, head);
}

// Sign patterns of `features` through `hidden`.
Matrix pattern_features(const std::vector<LayerParams>& hidden, const Matrix& features) {
  Matrix current = features;
  for (const auto& layer : hidden) {
    Matrix next(current.rows(), static_cast<Eigen::Index>(layer.outputs()));
    for (Eigen::Index i = 0; i < current.rows(); ++i) {
      next.row(i) = apply_hidden(layer, ActivationParams::sign(), row_span(current, i)).transpose();
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace

LayerResult build_layer(const Matrix& inputs, const Matrix& targets, const Matrix& val_inputs,
                        const Matrix& val_targets, const TrainConfig& cfg, LambdaSchedule& lambda,
                        std::size_t layer_index) {
  cfg.validate();
  if (inputs.rows() < 2) throw ConfigError("a layer needs at least 2 training rows");
  LayerState state(inputs, targets, val_inputs, val_targets);
  LayerResult result;

  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_width = 0;
  std::vector<Neuron> best_neurons;
  std::size_t since_best = 0;

  while (state.width() < cfg.max_neurons_per_layer) {
    IterationRecord rec;
    rec.layer = layer_index;
    const AddOutcome added = add_neuron(state, cfg.lasso, lambda);
    if (added.status != AddOutcome::Status::added) {
      if (state.width() > 0) break;
      if (!columns_constant(state.residuals())) {
        throw LayerAbort("layer " + std::to_string(layer_index) +
                         ": no hyperplane direction for the first neuron");
      }
      // Intercept-only layer: one neuron with every example on the positive side.
      Vector sides = Vector::Ones(inputs.rows());
      const OutputCoefficients cd = compute_cd(state.residuals(), sides);
      subtract_contribution(state.mutable_residuals(), sides, cd);
      state.append(Neuron{Vector::Zero(inputs.cols()), 0.0, cd.c, cd.d}, sides);
      rec.mse_before = added.mse_before;
      rec.drop = added.mse_before - state.train_mse();
      rec.drop_cd = (cd.c.array().square() - cd.d.array().square()).sum();
      rec.drop_sums = rec.drop;
      rec.max_side_sum = max_side_sum(state.residuals(), sides);
      rec.lambda = lambda.current;
    } else {
      rec.mse_before = added.mse_before;
      rec.drop = added.realized_drop;
      rec.drop_cd = added.drop_cd;
      rec.drop_sums = added.drop_sums;
      rec.max_side_sum = added.max_side_sum;
      const ReplaceOutcome replaced = replace_pass(state, cfg.lasso, lambda, cfg.replace_cap);
      rec.replacements = replaced.accepted;
      rec.max_side_sum = std::max(rec.max_side_sum, replaced.max_side_sum);
      rec.lambda = lambda.current;
    }
    rec.t = state.width();
    rec.train_mse = state.train_mse();
    rec.val_mse = state.has_validation() ? state.val_mse() : std::numeric_limits<double>::quiet_NaN();
    rec.nnz = nonzero_weights(state.neurons());
    result.records.push_back(rec);

    if (state.has_validation()) {
      if (rec.val_mse < best_val * (1.0 - cfg.min_layer_gain) || best_neurons.empty()) {
        best_val = rec.val_mse;
        best_width = state.width();
        best_neurons = state.neurons();
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        break;
      }
    }
    if (added.status != AddOutcome::Status::added) break;
  }

  if (!state.has_validation()) {
    best_neurons = state.neurons();
    best_width = state.width();
  }
  for (auto& rec : result.records) rec.rolled_back = rec.t > best_width;

  LayerState selected(inputs, targets);
  for (const auto& n : best_neurons) selected.append(n, hyperplane_sides(n.w, n.b, inputs));
  result.hidden = selected.hidden_layer();
  result.head = selected.output_head();
  const BannModel model = single_layer_model(result.hidden, result.head);
  result.train_mse = mse(model, Dataset(inputs, targets));
  result.val_mse = val_inputs.rows() > 0 ? mse(model, Dataset(val_inputs, val_targets))
                                         : std::numeric_limits<double>::quiet_NaN();
  return result;
}

TrainResult build_network(const Dataset& train, const std::optional<Dataset>& val,
                          const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.max_hidden_layers > 1 && !val) {
    throw ConfigError("deepening beyond one hidden layer requires a validation split");
  }
  if (val && (val->input_dim() != train.input_dim() || val->output_dim() != train.output_dim())) {
    throw ShapeError("validation set dimensions differ from the training set");
  }
  LambdaSchedule lambda{cfg.lasso.lambda0};
  const Matrix empty;
  const Matrix& val_x = val ? val->features() : empty;
  const Matrix& val_y = val ? val->labels() : empty;

  LayerResult first = build_layer(train.features(), train.labels(), val_x, val_y, cfg, lambda, 1);
  std::vector<LayerParams> hidden{first.hidden};
  LayerParams head = first.head;
  double incumbent_val = first.val_mse;
  TrainReport report;
  report.records = first.records;

  while (hidden.size() < cfg.max_hidden_layers) {
    const Matrix layer_x = pattern_features(hidden, train.features());
    const Matrix layer_val_x = pattern_features(hidden, val_x);
    LayerResult next;
    try {
      next = build_layer(layer_x, train.labels(), layer_val_x, val_y, cfg, lambda,
                         hidden.size() + 1);
    } catch (const LayerAbort&) {
      break;
    }
    if (!(next.val_mse < incumbent_val)) {
      report.discarded = std::move(next.records);
      break;
    }
    hidden.push_back(next.hidden);
    head = next.head;
    incumbent_val = next.val_mse;
    report.records.insert(report.records.end(), next.records.begin(), next.records.end());
  }

  BannModel model(ActivationParams::sign(), std::move(hidden), std::move(head));
  report.architecture = model.architecture();
  report.final_train_mse = mse(model, train);
  report.final_val_mse = val ? mse(model, *val) : std::numeric_limits<double>::quiet_NaN();
  report.final_lambda = lambda.current;
  return {std::move(model), std::move(report)};
}

TrainResult build_network(const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t m = data.size();
  const auto n_val = static_cast<std::size_t>(std::floor(cfg.val_fraction * static_cast<double>(m)));
  if (n_val == 0 || n_val >= m) {
    if (cfg.max_hidden_layers > 1) {
      throw ConfigError("validation split is empty; deepening needs validation data");
    }
    return build_network(data, std::nullopt, cfg);
  }
  const std::vector<std::size_t> idx = shuffled_indices(m, cfg.seed);
  const std::span<const std::size_t> all(idx);
  return build_network(data.subset(all.first(m - n_val)), data.subset(all.last(n_val)), cfg);
}

namespace {

void write_number(std::ostream& out, double v) {
  if (std::isnan(v)) return;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

void write_report_csv(std::ostream& out, const TrainReport& report) {
  out << "layer,t,train_mse,val_mse,drop,lambda,nnz\n";
  for (const auto& rec : report.records) {
    if (rec.rolled_back) continue;
    out << rec.layer << ',' << rec.t << ',';
    write_number(out, rec.train_mse);
    out << ',';
    write_number(out, rec.val_mse);
    out << ',';
    write_number(out, rec.drop);
    out << ',';
    write_number(out, rec.lambda);
    out << ',' << rec.nnz << '\n';
  }
}

}  // namespace bgn

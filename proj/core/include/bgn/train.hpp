#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "bgn/dataset.hpp"
#include "bgn/model.hpp"
#include "bgn/regress.hpp"
#include "bgn/types.hpp"

namespace bgn {

/// One hidden unit sgn(w.x + b) and its contribution c * sgn(...) + d to each output.
struct Neuron {
  Vector w;
  double b = 0.0;
  Vector c;
  Vector d;
};

struct TrainConfig {
  std::size_t max_neurons_per_layer = 500;
  std::size_t max_hidden_layers = 3;
  std::size_t replace_cap = 10;
  std::size_t patience = 20;
  LassoConfig lasso;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  // Relative validation-MSE improvement a new neuron must achieve to reset patience.
  double min_layer_gain = 0.0;

  void validate() const;
};

/// Regularization state carried across every Lasso fit of one training run.
struct LambdaSchedule {
  double current = 1e5;
};

/// Best split of the examples along the projection onto w.
struct BiasSplit {
  double bias = 0.0;
  // Sum over outputs of the size-weighted variances of the two sides.
  double objective = 0.0;
  // Examples on the negative side.
  std::size_t negatives = 0;
};

/// Sorts the examples by w.x and scans all realizable cut points; among
/// equal objectives the first cut in ascending order wins. Throws
/// ConfigError if w is all zeros.
BiasSplit optimal_bias(const Vector& w, const Matrix& features, const Matrix& residuals);

/// Stacks the residual matrix into one univariate regression problem: every
/// example row appears once per output column, with that column's residual
/// as target.
RegressionProblem stack_residuals(const Matrix& features, const Matrix& residuals);

struct Hyperplane {
  Vector w;
  double b = 0.0;
  double objective = 0.0;
  double used_lambda = 0.0;
};

/// Lasso direction (bias discarded) followed by the optimal split. Returns
/// nullopt when the schedule cannot produce a nonzero weight vector.
std::optional<Hyperplane> fit_hyperplane(const Matrix& features, const Matrix& residuals,
                                         const LassoConfig& cfg, double current_lambda);

/// +1 / -1 side of every row for the hyperplane (w, b).
Vector hyperplane_sides(const Vector& w, double b, const Matrix& features);

struct OutputCoefficients {
  Vector c;
  Vector d;
};

/// Least-squares (c, d) per output for predictions c * side + d.
OutputCoefficients compute_cd(const Matrix& residuals, const Vector& side);

/// What happened during one add_neuron call.
struct AddOutcome {
  enum class Status { added, no_direction, no_decrease };
  Status status = Status::added;
  double mse_before = 0.0;
  double mse_after = 0.0;
  // mse_before - mse_after summed as (1/m) sum (r_old - r_new)(r_old + r_new),
  // which stays accurate when the decrease is tiny next to the MSE.
  double realized_drop = 0.0;
  // Predicted decrease, sum_j (c_j^2 - d_j^2); exact only when the residuals sum to zero.
  double drop_cd = 0.0;
  // Predicted decrease, (1/m) sum_j [(sum_+ r_j)^2 / n_+ + (sum_- r_j)^2 / n_-].
  double drop_sums = 0.0;
  // Largest |residual sum| on either side of the new hyperplane after the update.
  double max_side_sum = 0.0;
  double lambda = 0.0;
};

/// Greedy construction state of one hidden layer.
class LayerState {
 public:
  /// `val_inputs` / `val_targets` may have zero rows.
  LayerState(Matrix inputs, Matrix targets, Matrix val_inputs = {}, Matrix val_targets = {});

  const Matrix& inputs() const { return inputs_; }
  const Matrix& targets() const { return targets_; }
  const Matrix& residuals() const { return residuals_; }
  const std::vector<Neuron>& neurons() const { return neurons_; }
  std::size_t width() const { return neurons_.size(); }
  std::size_t examples() const { return static_cast<std::size_t>(inputs_.rows()); }
  bool has_validation() const { return val_inputs_.rows() > 0; }

  double train_mse() const;
  /// Decreases of the training MSE no larger than this are rounding noise:
  /// 1e-12 times the MSE of the raw targets.
  double noise_floor() const { return noise_floor_; }
  /// Smallest decrease from `mse_before` that counts as an improvement: the
  /// noise floor, or 1e-6 of the current MSE. Each stored residual carries a
  /// relative rounding error near 1e-16, so smaller decreases cannot be told
  /// apart from the rounding of the residuals themselves.
  double required_decrease(double mse_before) const;
  /// Validation MSE of the current layer; throws if there is no validation set.
  double val_mse() const;

  /// Hidden layer weights/biases of the current neurons (sign activation).
  LayerParams hidden_layer() const;
  /// Output head: C stacks the c vectors as columns, bias is the sum of the d vectors.
  LayerParams output_head() const;

  // Mutation hooks used by add_neuron / replace_pass.
  void append(Neuron neuron, Vector sides);
  void replace(std::size_t index, Neuron neuron, Vector sides);
  void pop_back();
  Matrix& mutable_residuals() { return residuals_; }
  const Vector& sides(std::size_t index) const { return sides_[index]; }

 private:
  Matrix inputs_;
  Matrix targets_;
  Matrix residuals_;
  Matrix val_inputs_;
  Matrix val_targets_;
  std::vector<Neuron> neurons_;
  std::vector<Vector> sides_;
  double noise_floor_ = 0.0;
};

/// Places one new neuron against the current residuals and subtracts its
/// contribution. A neuron that does not decrease the training MSE by more
/// than required_decrease() is taken back out (status no_decrease).
AddOutcome add_neuron(LayerState& state, const LassoConfig& cfg, LambdaSchedule& lambda);

struct ReplaceOutcome {
  std::size_t attempts = 0;
  std::size_t accepted = 0;
  double max_side_sum = 0.0;
};

/// Refits neurons oldest first against the residuals without them, keeping a
/// refit only if the training MSE decreases by more than required_decrease(); stops at the first
/// rejection or after min(width - 1, cap) attempts.
ReplaceOutcome replace_pass(LayerState& state, const LassoConfig& cfg, LambdaSchedule& lambda,
                            std::size_t cap);

/// One accepted neuron addition (plus its replace pass).
struct IterationRecord {
  std::size_t layer = 0;
  std::size_t t = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;  // NaN when there is no validation set
  double mse_before = 0.0;
  double drop = 0.0;     // realized decrease from the addition alone
  double drop_cd = 0.0;
  double drop_sums = 0.0;
  std::size_t replacements = 0;
  double lambda = 0.0;
  std::size_t nnz = 0;   // nonzero hidden weights of the layer
  double max_side_sum = 0.0;
  // Beyond the width the layer was rolled back to.
  bool rolled_back = false;
};

struct LayerResult {
  LayerParams hidden;
  LayerParams head;
  std::vector<IterationRecord> records;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

/// Grows one hidden layer until the width cap or validation patience runs out,
/// then rolls back to the width with the best validation MSE. Throws
/// LayerAbort when not even the first neuron can be placed.
LayerResult build_layer(const Matrix& inputs, const Matrix& targets, const Matrix& val_inputs,
                        const Matrix& val_targets, const TrainConfig& cfg, LambdaSchedule& lambda,
                        std::size_t layer_index = 1);

struct TrainReport {
  std::vector<IterationRecord> records;
  // Records of a deeper layer built and then dropped for not improving validation MSE.
  std::vector<IterationRecord> discarded;
  std::vector<std::size_t> architecture;
  double final_train_mse = 0.0;
  double final_val_mse = 0.0;
  double final_lambda = 0.0;
};

struct TrainResult {
  BannModel model;
  TrainReport report;
};

/// Builds hidden layers one at a time, each on the sign patterns of the
/// previous ones, keeping a new layer only if it improves validation MSE.
TrainResult build_network(const Dataset& train, const std::optional<Dataset>& val,
                          const TrainConfig& cfg);

/// Draws the validation split from `data` with cfg.seed and cfg.val_fraction.
TrainResult build_network(const Dataset& data, const TrainConfig& cfg);

/// Report rows as CSV: layer,t,train_mse,val_mse,drop,lambda,nnz.
void write_report_csv(std::ostream& out, const TrainReport& report);

}  // namespace bgn

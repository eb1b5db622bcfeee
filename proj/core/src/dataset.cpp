#include "bgn/dataset.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "bgn/error.hpp"

namespace bgn {

Dataset::Dataset(Matrix features, Matrix labels, std::vector<std::string> feature_names,
                 std::vector<std::string> label_names)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      feature_names_(std::move(feature_names)),
      label_names_(std::move(label_names)) {
  if (features_.rows() < 1) throw DataError("dataset must contain at least one example");
  if (features_.rows() != labels_.rows()) {
    throw ShapeError("dataset has " + std::to_string(features_.rows()) + " feature rows but " +
                     std::to_string(labels_.rows()) + " label rows");
  }
  if (labels_.cols() < 1) throw ShapeError("dataset needs at least one label column");
  if (!features_.allFinite()) throw DataError("dataset features contain non-finite values");
  if (!labels_.allFinite()) throw DataError("dataset labels contain non-finite values");
  if (!feature_names_.empty() && feature_names_.size() != input_dim()) {
    throw ShapeError("feature name count does not match feature columns");
  }
  if (!label_names_.empty() && label_names_.size() != output_dim()) {
    throw ShapeError("label name count does not match label columns");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  return Dataset(select_rows(features_, rows), select_rows(labels_, rows), feature_names_,
                 label_names_);
}

std::vector<std::size_t> shuffled_indices(std::size_t m, std::uint64_t seed) {
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = m; i > 1; --i) {
    // Unbiased draw in [0, i) by rejection.
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
    std::uint64_t draw = rng();
    while (draw >= limit) draw = rng();
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(draw % bound)]);
  }
  return idx;
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= static_cast<std::size_t>(m.rows())) throw ShapeError("row index out of range");
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace bgn

#include "bgn/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bgn/error.hpp"

namespace bgn {

RegionPartition partition_regions(const BannModel& model, const Dataset& data, std::size_t k) {
  if (k < 1 || k > model.hidden().size()) {
    throw ConfigError("region depth " + std::to_string(k) + " outside 1.." +
                      std::to_string(model.hidden().size()));
  }
  if (data.input_dim() != model.input_dim()) throw ShapeError("dataset/model input mismatch");
  RegionPartition partition;
  partition.depth = k;
  partition.examples = data.size();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vector p = hidden_pattern(model, row_span(data.features(), static_cast<Eigen::Index>(i)), k);
    partition.regions[std::vector<double>(p.data(), p.data() + p.size())].push_back(i);
  }
  return partition;
}

double regression_lower_bound(const RegionPartition& partition, const Matrix& labels) {
  if (static_cast<std::size_t>(labels.rows()) != partition.examples) {
    throw ShapeError("labels have " + std::to_string(labels.rows()) +
                     " rows but the partition covers " + std::to_string(partition.examples));
  }
  const auto m = static_cast<double>(partition.examples);
  double bound = 0.0;
  for (Eigen::Index j = 0; j < labels.cols(); ++j) {
    for (const auto& [pattern, rows] : partition.regions) {
      const auto n = static_cast<double>(rows.size());
      double mean = 0.0;
      for (std::size_t i : rows) mean += labels(static_cast<Eigen::Index>(i), j);
      mean /= n;
      double ss = 0.0;
      for (std::size_t i : rows) {
        const double e = labels(static_cast<Eigen::Index>(i), j) - mean;
        ss += e * e;
      }
      // (n / m) * (ss / n)
      bound += ss / m;
    }
  }
  return bound;
}

double classification_lower_bound(const RegionPartition& partition, const Vector& labels) {
  if (static_cast<std::size_t>(labels.size()) != partition.examples) {
    throw ShapeError("label count does not match the partition");
  }
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1.0 && labels[i] != -1.0) {
      throw DataError("classification labels must be exactly -1 or +1 (row " +
                      std::to_string(i) + ")");
    }
  }
  // (1 - sum_p (n_p / m) |mean_p|) / 2 equals the minority count over m; counting keeps it exact.
  std::size_t minority = 0;
  for (const auto& [pattern, rows] : partition.regions) {
    std::size_t positive = 0;
    for (std::size_t i : rows) positive += labels[static_cast<Eigen::Index>(i)] > 0.0 ? 1 : 0;
    minority += std::min(positive, rows.size() - positive);
  }
  return static_cast<double>(minority) / static_cast<double>(partition.examples);
}

}  // namespace bgn

#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "bgn/dataset.hpp"
#include "bgn/model.hpp"

namespace bgn {

/// Examples grouped by the activation pattern of hidden layers 1..k.
struct RegionPartition {
  std::size_t depth = 0;
  std::size_t examples = 0;
  // Patterns compare exactly: activation outputs come from a two-element set.
  std::map<std::vector<double>, std::vector<std::size_t>> regions;

  std::size_t size() const { return regions.size(); }
};

RegionPartition partition_regions(const BannModel& model, const Dataset& data, std::size_t k);

/// Sum over output columns and regions of (|region| / m) * population variance
/// of the labels in the region. No network with this partition can have a
/// lower training MSE.
double regression_lower_bound(const RegionPartition& partition, const Matrix& labels);

/// (1 - sum_p (|region| / m) |mean label of region|) / 2 for +-1 labels: the
/// smallest 0-1 error any predictor constant on each region can reach.
double classification_lower_bound(const RegionPartition& partition, const Vector& labels);

}  // namespace bgn

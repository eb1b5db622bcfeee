#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bgn/types.hpp"

namespace bgn {

/// Labeled examples, one per row. Immutable once constructed.
class Dataset {
 public:
  Dataset(Matrix features, Matrix labels, std::vector<std::string> feature_names = {},
          std::vector<std::string> label_names = {});

  const Matrix& features() const { return features_; }
  const Matrix& labels() const { return labels_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::string>& label_names() const { return label_names_; }

  std::size_t size() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(features_.cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(labels_.cols()); }

  /// Rows in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  Matrix features_;
  Matrix labels_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> label_names_;
};

/// Permutation of 0..m-1 from a seeded Fisher-Yates shuffle. The draw is
/// implemented here (not std::shuffle) so it is identical across standard libraries.
std::vector<std::size_t> shuffled_indices(std::size_t m, std::uint64_t seed);

/// Rows of `m` selected by index, in order.
Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows);

}  // namespace bgn

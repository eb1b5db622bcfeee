#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bgn/dataset.hpp"
#include "bgn/model.hpp"

namespace bgn {

/// Which CSV columns hold the labels: either the last `trailing` columns or
/// the named columns (in the order given).
struct LabelSpec {
  std::size_t trailing = 1;
  std::vector<std::string> names;

  /// "3" -> trailing count; "a,b" -> names.
  static LabelSpec parse(std::string_view text);
  std::string to_string() const;
};

/// Header row required; every other cell must parse as a finite double.
Dataset load_csv(const std::filesystem::path& path, const LabelSpec& labels);
Dataset parse_csv(std::string_view text, const LabelSpec& labels, std::string_view source = "<csv>");

void write_csv(std::ostream& out, const Dataset& data);

struct SplitSpec {
  double test_fraction = 0.25;
  // Fraction of what remains after the test rows are removed.
  double val_fraction = 0.20;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

SplitSizes split_sizes(std::size_t m, const SplitSpec& spec);

struct Split {
  Dataset train;
  Dataset val;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> val_rows;
  std::vector<std::size_t> test_rows;
};

/// Seeded shuffle, then the last rows go to test and the last rows of the
/// remainder to validation.
Split split_dataset(const Dataset& data, const SplitSpec& spec);

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const BannModel& model);
BannModel model_from_json(std::string_view text);
void save_model(const std::filesystem::path& path, const BannModel& model);
BannModel load_model(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace bgn

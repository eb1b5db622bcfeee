#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "bgn/io.hpp"
#include "bgn/model.hpp"
#include "bgn/train.hpp"

namespace bgn::cli {

inline constexpr const char* kSoftwareVersion = "0.1.0";

// Everything a training run depends on; written next to the outputs so the
// run can be repeated with `train --manifest`.
struct RunManifest {
  std::filesystem::path data;
  std::string labels = "1";
  SplitSpec split;
  TrainConfig train;
  std::filesystem::path out_dir = "bgn-out";
  std::string software_version = kSoftwareVersion;

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

struct TrainSummary {
  std::vector<std::size_t> architecture;
  std::size_t depth = 0;  // hidden layers
  std::size_t width = 0;  // widest hidden layer
  double train_mse = 0.0;
  double val_mse = 0.0;
  double test_mse = 0.0;
  std::size_t nonzero_parameters = 0;
};

// Writes model.json, report.csv, summary.json and manifest.json into out_dir.
TrainSummary run_train(const RunManifest& manifest, std::ostream& log);

// Labels default to the model's trailing output columns.
void run_evaluate(const std::filesystem::path& model, const std::filesystem::path& data,
                  const std::string& labels, std::ostream& out);

void run_bounds(const std::filesystem::path& model, const std::filesystem::path& data,
                const std::string& labels, std::ostream& out);

void run_demo_square(int r, const std::filesystem::path& out_file, std::ostream& out);
void run_demo_product(double m, double delta, const std::filesystem::path& out_file,
                      std::ostream& out);

void run_reparam(const std::filesystem::path& model, const ActivationParams& target,
                 const std::filesystem::path& out_file, std::ostream& out);

// Parses argv and dispatches. Returns the process exit code:
// 0 ok, 1 unexpected failure, 2 data or shape error, 3 usage or config error, 4 training abort.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bgn::cli

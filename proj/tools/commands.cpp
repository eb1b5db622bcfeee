#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "bgn/bounds.hpp"
#include "bgn/error.hpp"
#include "bgn/expressiveness.hpp"

namespace bgn::cli {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// JSON has no NaN; missing values become null.
Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <typename T>
T get(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

Dataset load_for_model(const fs::path& data, const std::string& labels, const BannModel& model) {
  const LabelSpec spec = labels.empty() ? LabelSpec{model.output_dim(), {}} : LabelSpec::parse(labels);
  Dataset ds = load_csv(data, spec);
  if (ds.input_dim() != model.input_dim() || ds.output_dim() != model.output_dim()) {
    throw ShapeError(data.string() + " has " + std::to_string(ds.input_dim()) + " feature and " +
                     std::to_string(ds.output_dim()) + " label columns; the model maps " +
                     std::to_string(model.input_dim()) + " inputs to " +
                     std::to_string(model.output_dim()) + " outputs");
  }
  return ds;
}

}  // namespace

std::string RunManifest::to_json() const {
  Json doc = Json::object();
  doc["version"] = 1;
  doc["software_version"] = software_version;
  doc["data"] = data.generic_string();
  doc["labels"] = labels;
  doc["split"] = {{"test_fraction", split.test_fraction},
                  {"val_fraction", split.val_fraction},
                  {"seed", split.seed}};
  doc["train"] = {{"max_hidden_layers", train.max_hidden_layers},
                  {"max_neurons_per_layer", train.max_neurons_per_layer},
                  {"replace_cap", train.replace_cap},
                  {"patience", train.patience},
                  {"min_layer_gain", train.min_layer_gain},
                  {"lasso",
                   {{"lambda0", train.lasso.lambda0},
                    {"divisor", train.lasso.divisor},
                    {"max_halvings", train.lasso.max_halvings},
                    {"cd_max_iters", train.lasso.cd_max_iters},
                    {"cd_tol", train.lasso.cd_tol}}}};
  doc["out_dir"] = out_dir.generic_string();
  return doc.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (get<int>(doc, "version", 0) != 1) throw ConfigError("unsupported manifest version");
  try {
    RunManifest m;
    m.data = doc.at("data").get<std::string>();
    m.labels = get<std::string>(doc, "labels", m.labels);
    m.out_dir = get<std::string>(doc, "out_dir", m.out_dir.string());
    m.software_version = get<std::string>(doc, "software_version", m.software_version);
    if (doc.contains("split")) {
      const Json& s = doc.at("split");
      m.split.test_fraction = get(s, "test_fraction", m.split.test_fraction);
      m.split.val_fraction = get(s, "val_fraction", m.split.val_fraction);
      m.split.seed = get(s, "seed", m.split.seed);
    }
    if (doc.contains("train")) {
      const Json& t = doc.at("train");
      TrainConfig& c = m.train;
      c.max_hidden_layers = get(t, "max_hidden_layers", c.max_hidden_layers);
      c.max_neurons_per_layer = get(t, "max_neurons_per_layer", c.max_neurons_per_layer);
      c.replace_cap = get(t, "replace_cap", c.replace_cap);
      c.patience = get(t, "patience", c.patience);
      c.min_layer_gain = get(t, "min_layer_gain", c.min_layer_gain);
      if (t.contains("lasso")) {
        const Json& l = t.at("lasso");
        c.lasso.lambda0 = get(l, "lambda0", c.lasso.lambda0);
        c.lasso.divisor = get(l, "divisor", c.lasso.divisor);
        c.lasso.max_halvings = get(l, "max_halvings", c.lasso.max_halvings);
        c.lasso.cd_max_iters = get(l, "cd_max_iters", c.lasso.cd_max_iters);
        c.lasso.cd_tol = get(l, "cd_tol", c.lasso.cd_tol);
      }
    }
    return m;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

TrainSummary run_train(const RunManifest& manifest, std::ostream& log) {
  manifest.split.validate();
  manifest.train.validate();
  const Dataset data = load_csv(manifest.data, LabelSpec::parse(manifest.labels));
  const Split split = split_dataset(data, manifest.split);
  log << "data " << manifest.data.string() << ": m=" << data.size() << " d0=" << data.input_dim()
      << " dl=" << data.output_dim() << " (train " << split.train.size() << ", val "
      << split.val.size() << ", test " << split.test.size() << ")\n";

  TrainConfig cfg = manifest.train;
  cfg.seed = manifest.split.seed;
  cfg.val_fraction = manifest.split.val_fraction;
  const TrainResult result = build_network(split.train, split.val, cfg);

  TrainSummary summary;
  summary.architecture = result.model.architecture();
  summary.depth = result.model.hidden().size();
  for (const auto& layer : result.model.hidden()) {
    summary.width = std::max(summary.width, layer.outputs());
  }
  summary.train_mse = result.report.final_train_mse;
  summary.val_mse = result.report.final_val_mse;
  summary.test_mse = mse(result.model, split.test);
  summary.nonzero_parameters = count_nonzero_parameters(result.model);

  fs::create_directories(manifest.out_dir);
  save_model(manifest.out_dir / "model.json", result.model);
  std::ostringstream report;
  write_report_csv(report, result.report);
  write_file_atomic(manifest.out_dir / "report.csv", report.str());

  Json doc = Json::object();
  doc["architecture"] = summary.architecture;
  doc["depth"] = summary.depth;
  doc["width"] = summary.width;
  doc["train_mse"] = json_number(summary.train_mse);
  doc["val_mse"] = json_number(summary.val_mse);
  doc["test_mse"] = json_number(summary.test_mse);
  doc["nonzero_parameters"] = summary.nonzero_parameters;
  doc["final_lambda"] = json_number(result.report.final_lambda);
  doc["split_sizes"] = {{"train", split.train.size()}, {"val", split.val.size()},
                        {"test", split.test.size()}};
  write_file_atomic(manifest.out_dir / "summary.json", doc.dump(2) + "\n");
  write_file_atomic(manifest.out_dir / "manifest.json", manifest.to_json());

  log << "depth " << summary.depth << ", width " << summary.width << ", train mse "
      << num(summary.train_mse) << ", val mse " << num(summary.val_mse) << ", test mse "
      << num(summary.test_mse) << ", nonzero parameters " << summary.nonzero_parameters << "\n"
      << "wrote " << manifest.out_dir.string() << "/{model.json,report.csv,summary.json,manifest.json}\n";
  return summary;
}

void run_evaluate(const fs::path& model_path, const fs::path& data_path, const std::string& labels,
                  std::ostream& out) {
  const BannModel model = load_model(model_path);
  const Dataset data = load_for_model(data_path, labels, model);
  const Matrix errors = forward_batch(model, data.features()) - data.labels();
  Json per_output = Json::array();
  for (Eigen::Index j = 0; j < errors.cols(); ++j) {
    per_output.push_back(errors.col(j).squaredNorm() / static_cast<double>(errors.rows()));
  }
  Json regions = Json::array();
  for (std::size_t k = 1; k <= model.hidden().size(); ++k) {
    regions.push_back(partition_regions(model, data, k).size());
  }
  Json doc = Json::object();
  doc["examples"] = data.size();
  doc["mse"] = mse(model, data);
  doc["per_output_mse"] = std::move(per_output);
  doc["regions"] = std::move(regions);
  doc["nonzero_parameters"] = count_nonzero_parameters(model);
  out << doc.dump(2) << "\n";
}

void run_bounds(const fs::path& model_path, const fs::path& data_path, const std::string& labels,
                std::ostream& out) {
  const BannModel model = load_model(model_path);
  const Dataset data = load_for_model(data_path, labels, model);
  out << "k,regions,bound\n";
  for (std::size_t k = 1; k <= model.hidden().size(); ++k) {
    const RegionPartition partition = partition_regions(model, data, k);
    out << k << ',' << partition.size() << ',' << num(regression_lower_bound(partition, data.labels()))
        << '\n';
  }
}

void run_demo_square(int r, const fs::path& out_file, std::ostream& out) {
  const BannModel model = build_square_approximator(r);
  save_model(out_file, model);
  const Certificate cert = certify_square(model, r);
  out << "wrote " << out_file.string() << " (hidden width " << r << ")\n"
      << "certificate square r=" << r << " max_error=" << num(cert.measured_error)
      << " bound=" << num(cert.claimed_bound) << (cert.holds() ? " ok" : " VIOLATED") << "\n";
  if (!cert.holds()) throw Error("square approximator certificate violated");
}

void run_demo_product(double m, double delta, const fs::path& out_file, std::ostream& out) {
  const BannModel model = build_product_approximator(m, delta);
  save_model(out_file, model);
  const Certificate cert = certify_product(model, m, delta);
  out << "wrote " << out_file.string() << " (hidden width " << model.hidden().front().outputs()
      << ")\n"
      << "certificate product m=" << num(m) << " delta=" << num(delta)
      << " max_error=" << num(cert.measured_error) << " bound=" << num(cert.claimed_bound)
      << (cert.holds() ? " ok" : " VIOLATED") << "\n";
  if (!cert.holds()) throw Error("product approximator certificate violated");
}

void run_reparam(const fs::path& model_path, const ActivationParams& target, const fs::path& out_file,
                 std::ostream& out) {
  const BannModel model = reparametrize_activation(load_model(model_path), target);
  if (out_file.empty()) {
    out << model_to_json(model);
  } else {
    save_model(out_file, model);
    out << "wrote " << out_file.string() << "\n";
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Greedy construction of binary activated networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kSoftwareVersion);

  RunManifest manifest;
  std::string manifest_file;
  std::string data_str;
  std::string out_str = manifest.out_dir.string();
  auto* train = app.add_subcommand("train", "Build a network on a CSV dataset");
  train->add_option("--manifest", manifest_file, "Repeat a run from its manifest.json");
  train->add_option("--data", data_str, "CSV file with a header row");
  train->add_option("--labels", manifest.labels, "Trailing label column count or comma-separated names")
      ->capture_default_str();
  train->add_option("--test-frac", manifest.split.test_fraction)->capture_default_str();
  train->add_option("--val-frac", manifest.split.val_fraction, "Fraction of the non-test rows")
      ->capture_default_str();
  train->add_option("--seed", manifest.split.seed)->capture_default_str();
  train->add_option("--max-layers", manifest.train.max_hidden_layers)->capture_default_str();
  train->add_option("--max-neurons", manifest.train.max_neurons_per_layer)->capture_default_str();
  train->add_option("--replace-cap", manifest.train.replace_cap)->capture_default_str();
  train->add_option("--patience", manifest.train.patience)->capture_default_str();
  train->add_option("--lambda0", manifest.train.lasso.lambda0)->capture_default_str();
  train->add_option("--out", out_str, "Output directory")->capture_default_str();

  std::string model_str;
  std::string labels_str;
  auto* evaluate = app.add_subcommand("evaluate", "Report MSE and region counts of a model");
  evaluate->add_option("--model", model_str)->required();
  evaluate->add_option("--data", data_str)->required();
  evaluate->add_option("--labels", labels_str, "Defaults to the model's output count");

  auto* bounds = app.add_subcommand("bounds", "Per-depth region counts and MSE lower bounds");
  bounds->add_option("--model", model_str)->required();
  bounds->add_option("--data", data_str)->required();
  bounds->add_option("--labels", labels_str, "Defaults to the model's output count");

  int r = 10;
  double m = 1.0;
  double delta = 0.01;
  auto* demo = app.add_subcommand("demo", "Constructive approximators");
  demo->require_subcommand(1);
  auto* square = demo->add_subcommand("square", "Staircase network for x^2 on [0, 1]");
  square->add_option("--r", r, "Hidden width")->capture_default_str();
  square->add_option("--out", out_str, "Model file")->default_val("square.json");
  auto* product = demo->add_subcommand("product", "Network for x*y on [-m, m]^2");
  product->add_option("--m", m)->capture_default_str();
  product->add_option("--delta", delta)->capture_default_str();
  product->add_option("--out", out_str, "Model file")->default_val("product.json");

  ActivationParams target;
  auto* reparam = app.add_subcommand("reparam", "Rewrite a model for another activation");
  reparam->add_option("--model", model_str)->required();
  reparam->add_option("--t", target.t)->required();
  reparam->add_option("--h1", target.h1)->required();
  reparam->add_option("--h2", target.h2)->required();
  std::string reparam_out;
  reparam->add_option("--out", reparam_out, "Model file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 3;
  }

  try {
    if (*train) {
      if (!manifest_file.empty()) {
        if (!data_str.empty()) throw ConfigError("--manifest and --data are mutually exclusive");
        manifest = RunManifest::from_json(read_file(manifest_file));
        if (train->count("--out") > 0) manifest.out_dir = out_str;
      } else {
        if (data_str.empty()) throw ConfigError("train needs --data or --manifest");
        manifest.data = data_str;
        manifest.out_dir = out_str;
      }
      run_train(manifest, out);
    } else if (*evaluate) {
      run_evaluate(model_str, data_str, labels_str, out);
    } else if (*bounds) {
      run_bounds(model_str, data_str, labels_str, out);
    } else if (*square) {
      run_demo_square(r, out_str, out);
    } else if (*product) {
      run_demo_product(m, delta, out_str, out);
    } else if (*reparam) {
      target.validate();
      run_reparam(model_str, target, reparam_out, out);
    }
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const ShapeError& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 3;
  } catch (const LayerAbort& e) {
    err << "training aborted: " << e.what() << "\n";
    return 4;
  } catch (const SolverError& e) {
    err << "training aborted: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace bgn::cli

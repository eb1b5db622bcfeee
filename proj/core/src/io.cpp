#include "bgn/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "bgn/error.hpp"

namespace bgn {

namespace {

using Json = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Splits one CSV record; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(std::string_view line, std::size_t line_no,
                                      std::string_view source) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"' && trim(field).empty()) {
      quoted = true;
      was_quoted = true;
      field.clear();
    } else if (ch == ',') {
      fields.push_back(was_quoted ? field : std::string(trim(field)));
      field.clear();
      was_quoted = false;
    } else {
      field += ch;
    }
  }
  if (quoted) {
    throw DataError(std::string(source) + ": line " + std::to_string(line_no) +
                    ": unterminated quoted field");
  }
  fields.push_back(was_quoted ? field : std::string(trim(field)));
  return fields;
}

double parse_cell(std::string_view cell, std::size_t line_no, const std::string& column,
                  std::string_view source) {
  const auto where = [&] {
    return std::string(source) + ": line " + std::to_string(line_no) + ", column '" + column + "'";
  };
  if (cell.empty()) throw DataError(where() + ": missing value");
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec == std::errc::result_out_of_range) {
    throw DataError(where() + ": value '" + std::string(cell) + "' out of range");
  }
  if (ec != std::errc() || end != cell.data() + cell.size() || !std::isfinite(value)) {
    throw DataError(where() + ": not a finite number: '" + std::string(cell) + "'");
  }
  return value;
}

Json layer_to_json(const LayerParams& layer) {
  Json weights = Json::array();
  for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) row.push_back(layer.weights(i, j));
    weights.push_back(std::move(row));
  }
  Json biases = Json::array();
  for (Eigen::Index i = 0; i < layer.biases.size(); ++i) biases.push_back(layer.biases[i]);
  Json out = Json::object();
  out["weights"] = std::move(weights);
  out["biases"] = std::move(biases);
  return out;
}

double number(const Json& j, const std::string& what) {
  if (!j.is_number()) throw DataError("model file: " + what + " is not a number");
  return j.get<double>();
}

const Json& field(const Json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) {
    throw DataError("model file: " + what + " is missing '" + key + "'");
  }
  return j.at(key);
}

LayerParams layer_from_json(const Json& j, const std::string& name) {
  const Json& weights = field(j, "weights", name);
  const Json& biases = field(j, "biases", name);
  if (!weights.is_array() || !biases.is_array()) {
    throw DataError("model file: " + name + " weights/biases must be arrays");
  }
  const auto rows = static_cast<Eigen::Index>(weights.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(weights[0].size());
  LayerParams layer{Matrix(rows, cols), Vector(static_cast<Eigen::Index>(biases.size()))};
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = weights[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ShapeError("model file: " + name + " weight rows have unequal lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      layer.weights(i, c) = number(row[static_cast<std::size_t>(c)], name + " weight");
    }
  }
  for (Eigen::Index i = 0; i < layer.biases.size(); ++i) {
    layer.biases[i] = number(biases[static_cast<std::size_t>(i)], name + " bias");
  }
  return layer;
}

}  // namespace

LabelSpec LabelSpec::parse(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw ConfigError("empty label specification");
  std::size_t count = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), count);
  if (ec == std::errc() && end == text.data() + text.size()) {
    if (count == 0) throw ConfigError("label count must be at least 1");
    return LabelSpec{count, {}};
  }
  LabelSpec spec{0, {}};
  for (const std::string& name : split_record(text, 0, "label spec")) {
    if (name.empty()) throw ConfigError("empty label column name in '" + std::string(text) + "'");
    spec.names.push_back(name);
  }
  return spec;
}

std::string LabelSpec::to_string() const {
  if (names.empty()) return std::to_string(trailing);
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ",") + n;
  return out;
}

Dataset parse_csv(std::string_view text, const LabelSpec& labels, std::string_view source) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.ends_with('\r')) line.remove_suffix(1);
    if (trim(line).empty()) continue;
    lines.emplace_back(line_no, line);
  }
  if (lines.empty()) throw DataError(std::string(source) + ": no header row");

  const std::vector<std::string> header = split_record(lines[0].second, lines[0].first, source);
  std::set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].empty()) {
      throw DataError(std::string(source) + ": header column " + std::to_string(c + 1) + " is empty");
    }
    if (!seen.insert(header[c]).second) {
      throw DataError(std::string(source) + ": duplicate header '" + header[c] + "'");
    }
  }

  std::vector<std::size_t> label_cols;
  if (labels.names.empty()) {
    if (labels.trailing == 0 || labels.trailing >= header.size()) {
      throw ConfigError(std::string(source) + ": cannot take " + std::to_string(labels.trailing) +
                        " label columns from " + std::to_string(header.size()) + " columns");
    }
    for (std::size_t c = header.size() - labels.trailing; c < header.size(); ++c) label_cols.push_back(c);
  } else {
    for (const auto& name : labels.names) {
      std::size_t c = 0;
      while (c < header.size() && header[c] != name) ++c;
      if (c == header.size()) throw DataError(std::string(source) + ": no label column '" + name + "'");
      for (std::size_t prev : label_cols) {
        if (prev == c) throw ConfigError("label column '" + name + "' listed twice");
      }
      label_cols.push_back(c);
    }
    if (label_cols.size() >= header.size()) {
      throw ConfigError(std::string(source) + ": no feature columns left");
    }
  }
  std::vector<bool> is_label(header.size(), false);
  for (std::size_t c : label_cols) is_label[c] = true;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!is_label[c]) feature_cols.push_back(c);
  }

  const auto m = static_cast<Eigen::Index>(lines.size() - 1);
  if (m == 0) throw DataError(std::string(source) + ": no data rows");
  Matrix features(m, static_cast<Eigen::Index>(feature_cols.size()));
  Matrix targets(m, static_cast<Eigen::Index>(label_cols.size()));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& [no, line] = lines[static_cast<std::size_t>(i) + 1];
    const std::vector<std::string> cells = split_record(line, no, source);
    if (cells.size() != header.size()) {
      throw DataError(std::string(source) + ": line " + std::to_string(no) + " has " +
                      std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(header.size()));
    }
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const std::size_t c = feature_cols[k];
      features(i, static_cast<Eigen::Index>(k)) = parse_cell(cells[c], no, header[c], source);
    }
    for (std::size_t k = 0; k < label_cols.size(); ++k) {
      const std::size_t c = label_cols[k];
      targets(i, static_cast<Eigen::Index>(k)) = parse_cell(cells[c], no, header[c], source);
    }
  }

  std::vector<std::string> feature_names;
  std::vector<std::string> label_names;
  for (std::size_t c : feature_cols) feature_names.push_back(header[c]);
  for (std::size_t c : label_cols) label_names.push_back(header[c]);
  return Dataset(std::move(features), std::move(targets), std::move(feature_names),
                 std::move(label_names));
}

Dataset load_csv(const std::filesystem::path& path, const LabelSpec& labels) {
  return parse_csv(read_file(path), labels, path.string());
}

void write_csv(std::ostream& out, const Dataset& data) {
  const auto name = [](const std::vector<std::string>& names, std::size_t i, const char* prefix) {
    return i < names.size() ? names[i] : prefix + std::to_string(i);
  };
  for (std::size_t j = 0; j < data.input_dim(); ++j) {
    out << (j ? "," : "") << name(data.feature_names(), j, "x");
  }
  for (std::size_t j = 0; j < data.output_dim(); ++j) out << "," << name(data.label_names(), j, "y");
  out << '\n';
  char buf[32];
  const auto put = [&](double v) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
  };
  for (Eigen::Index i = 0; i < data.features().rows(); ++i) {
    for (Eigen::Index j = 0; j < data.features().cols(); ++j) {
      if (j) out << ',';
      put(data.features()(i, j));
    }
    for (Eigen::Index j = 0; j < data.labels().cols(); ++j) {
      out << ',';
      put(data.labels()(i, j));
    }
    out << '\n';
  }
}

void SplitSpec::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in (0, 1)");
  }
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in (0, 1)");
  }
}

SplitSizes split_sizes(std::size_t m, const SplitSpec& spec) {
  spec.validate();
  if (m < 5) throw DataError("splitting needs at least 5 examples, got " + std::to_string(m));
  SplitSizes sizes;
  sizes.test = static_cast<std::size_t>(std::floor(spec.test_fraction * static_cast<double>(m)));
  const std::size_t rest = m - sizes.test;
  sizes.val = static_cast<std::size_t>(std::floor(spec.val_fraction * static_cast<double>(rest)));
  sizes.train = rest - sizes.val;
  if (sizes.test == 0 || sizes.val == 0 || sizes.train == 0) {
    throw ConfigError("fractions leave an empty split (train " + std::to_string(sizes.train) +
                      ", val " + std::to_string(sizes.val) + ", test " +
                      std::to_string(sizes.test) + ")");
  }
  return sizes;
}

Split split_dataset(const Dataset& data, const SplitSpec& spec) {
  const SplitSizes sizes = split_sizes(data.size(), spec);
  const std::vector<std::size_t> order = shuffled_indices(data.size(), spec.seed);
  const auto first = order.begin();
  std::vector<std::size_t> train_rows(first, first + static_cast<std::ptrdiff_t>(sizes.train));
  std::vector<std::size_t> val_rows(first + static_cast<std::ptrdiff_t>(sizes.train),
                                    first + static_cast<std::ptrdiff_t>(sizes.train + sizes.val));
  std::vector<std::size_t> test_rows(first + static_cast<std::ptrdiff_t>(sizes.train + sizes.val),
                                     order.end());
  Dataset train = data.subset(train_rows);
  Dataset val = data.subset(val_rows);
  Dataset test = data.subset(test_rows);
  return Split{std::move(train), std::move(val), std::move(test),
               std::move(train_rows), std::move(val_rows), std::move(test_rows)};
}

std::string model_to_json(const BannModel& model) {
  Json doc = Json::object();
  doc["version"] = kModelFormatVersion;
  Json act = Json::object();
  act["t"] = model.activation().t;
  act["h1"] = model.activation().h1;
  act["h2"] = model.activation().h2;
  doc["activation"] = std::move(act);
  Json hidden = Json::array();
  for (const auto& layer : model.hidden()) hidden.push_back(layer_to_json(layer));
  doc["hidden"] = std::move(hidden);
  doc["output"] = layer_to_json(model.output());
  return doc.dump(2) + "\n";
}

BannModel model_from_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  const Json& version = field(doc, "version", "document");
  if (!version.is_number_integer() || version.get<long long>() != kModelFormatVersion) {
    throw DataError("unsupported model file version " + version.dump() + " (expected " +
                    std::to_string(kModelFormatVersion) + ")");
  }
  const Json& act = field(doc, "activation", "document");
  ActivationParams params{number(field(act, "t", "activation"), "activation t"),
                          number(field(act, "h1", "activation"), "activation h1"),
                          number(field(act, "h2", "activation"), "activation h2")};
  const Json& hidden_json = field(doc, "hidden", "document");
  if (!hidden_json.is_array()) throw DataError("model file: 'hidden' must be an array");
  std::vector<LayerParams> hidden;
  for (std::size_t k = 0; k < hidden_json.size(); ++k) {
    hidden.push_back(layer_from_json(hidden_json[k], "hidden layer " + std::to_string(k + 1)));
  }
  LayerParams output = layer_from_json(field(doc, "output", "document"), "output layer");
  return BannModel(params, std::move(hidden), std::move(output));
}

void save_model(const std::filesystem::path& path, const BannModel& model) {
  write_file_atomic(path, model_to_json(model));
}

BannModel load_model(const std::filesystem::path& path) { return model_from_json(read_file(path)); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw DataError("error reading " + path.string());
  return std::move(buf).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw DataError("error writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace bgn

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bgn/error.hpp"
#include "bgn/io.hpp"
#include "generators.hpp"

using namespace bgn;

namespace {

std::string message_of(const auto& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("bgn_io_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(LabelSpec, Parse) {
  EXPECT_EQ(LabelSpec::parse("3").trailing, 3U);
  EXPECT_TRUE(LabelSpec::parse("3").names.empty());
  const LabelSpec named = LabelSpec::parse("y,z");
  EXPECT_EQ(named.names, (std::vector<std::string>{"y", "z"}));
  EXPECT_EQ(LabelSpec::parse(named.to_string()).names, named.names);
  EXPECT_THROW(LabelSpec::parse(""), ConfigError);
  EXPECT_THROW(LabelSpec::parse("0"), ConfigError);
  EXPECT_THROW(LabelSpec::parse("a,,b"), ConfigError);
}

TEST(Csv, SmallFile) {
  const Dataset d = parse_csv("x1,x2,y\n1,2,3\n4,5,6\n7,8,9\n10,11,12\n", LabelSpec{});
  EXPECT_EQ(d.size(), 4U);
  EXPECT_EQ(d.input_dim(), 2U);
  EXPECT_EQ(d.output_dim(), 1U);
  EXPECT_EQ(d.features()(3, 1), 11.0);
  EXPECT_EQ(d.labels()(2, 0), 9.0);
  EXPECT_EQ(d.feature_names(), (std::vector<std::string>{"x1", "x2"}));
}

TEST(Csv, SixLabelColumns) {
  std::string text = "a,b,c,d,e,f,r1,r2,r3,r4,r5,r6\n";
  testkit::Gen gen(1);
  for (int i = 0; i < 20; ++i) {
    for (int c = 0; c < 12; ++c) text += std::to_string(gen.normal()) + (c == 11 ? "\n" : ",");
  }
  const Dataset d = parse_csv(text, LabelSpec::parse("6"));
  EXPECT_EQ(d.input_dim(), 6U);
  EXPECT_EQ(d.output_dim(), 6U);
  EXPECT_EQ(d.size(), 20U);
}

TEST(Csv, NamedLabels) {
  const Dataset d = parse_csv("y,a,b\n1,2,3\n", LabelSpec::parse("y"));
  EXPECT_EQ(d.labels()(0, 0), 1.0);
  EXPECT_EQ(d.features()(0, 0), 2.0);
  EXPECT_EQ(d.features()(0, 1), 3.0);
  EXPECT_THROW(parse_csv("a,b\n1,2\n", LabelSpec::parse("y")), DataError);
}

TEST(Csv, MissingValueNamesTheCell) {
  const std::string msg = message_of([] { parse_csv("a,b,y\n1,2,3\n4,,6\n", LabelSpec{}); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'b'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("missing value"), std::string::npos) << msg;
}

TEST(Csv, RejectsBadInput) {
  EXPECT_THROW(parse_csv("a,a,y\n1,2,3\n", LabelSpec{}), DataError);
  EXPECT_THROW(parse_csv("a,b,y\n1,x,3\n", LabelSpec{}), DataError);
  EXPECT_THROW(parse_csv("a,b,y\n1,nan,3\n", LabelSpec{}), DataError);
  EXPECT_THROW(parse_csv("a,b,y\n1,2\n", LabelSpec{}), DataError);
  EXPECT_THROW(parse_csv("a,b,y\n", LabelSpec{}), DataError);
  EXPECT_THROW(parse_csv("", LabelSpec{}), DataError);
  EXPECT_THROW(parse_csv("a,y\n1,2\n", LabelSpec::parse("2")), ConfigError);
}

TEST(Csv, BomCrlfAndBlankLines) {
  const Dataset d = parse_csv("\xEF\xBB\xBF" "a,y\r\n1,2\r\n\r\n3,4\r\n", LabelSpec{});
  EXPECT_EQ(d.size(), 2U);
  EXPECT_EQ(d.feature_names()[0], "a");
  EXPECT_EQ(d.labels()(1, 0), 4.0);
}

TEST(Csv, WriteThenParseRoundTrips) {
  testkit::Gen gen(2);
  const Dataset d = gen.regression_dataset(30, 3, 2);
  std::ostringstream out;
  write_csv(out, d);
  const Dataset back = parse_csv(out.str(), LabelSpec::parse("2"));
  EXPECT_EQ(back.features(), d.features());
  EXPECT_EQ(back.labels(), d.labels());
}

TEST(Csv, DiabetesShape) {
  const Dataset d = load_csv(std::filesystem::path(BGN_DATA_DIR) / "diabetes.csv", LabelSpec{});
  EXPECT_EQ(d.size(), 442U);
  EXPECT_EQ(d.input_dim(), 10U);
  EXPECT_EQ(d.output_dim(), 1U);
  EXPECT_EQ(d.label_names()[0], "target");
}

TEST(Split, Sizes) {
  const SplitSizes a = split_sizes(100, SplitSpec{});
  EXPECT_EQ(a.train, 60U);
  EXPECT_EQ(a.val, 15U);
  EXPECT_EQ(a.test, 25U);
  const SplitSizes b = split_sizes(442, SplitSpec{});
  EXPECT_EQ(b.train, 266U);
  EXPECT_EQ(b.val, 66U);
  EXPECT_EQ(b.test, 110U);
  EXPECT_THROW(split_sizes(4, SplitSpec{}), DataError);
  EXPECT_THROW(split_sizes(100, SplitSpec{1.5, 0.2, 0}), ConfigError);
}

TEST(Split, DisjointCoveringDeterministic) {
  testkit::Gen gen(3);
  const Dataset d = gen.regression_dataset(97, 2, 1);
  SplitSpec spec;
  spec.seed = 42;
  const Split a = split_dataset(d, spec);
  const Split b = split_dataset(d, spec);
  EXPECT_EQ(a.train_rows, b.train_rows);
  EXPECT_EQ(a.val_rows, b.val_rows);
  EXPECT_EQ(a.test_rows, b.test_rows);
  std::vector<std::size_t> all;
  for (const auto* rows : {&a.train_rows, &a.val_rows, &a.test_rows}) all.insert(all.end(), rows->begin(), rows->end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(97);
  std::iota(expected.begin(), expected.end(), 0);
  EXPECT_EQ(all, expected);
  EXPECT_EQ(a.train.size(), a.train_rows.size());
  EXPECT_EQ(a.test.features().row(0), d.features().row(static_cast<Eigen::Index>(a.test_rows[0])));
  spec.seed = 43;
  EXPECT_NE(split_dataset(d, spec).train_rows, a.train_rows);
}

TEST(ModelJson, ByteIdenticalRoundTrip) {
  testkit::Gen gen(4);
  for (int trial = 0; trial < 10; ++trial) {
    const BannModel model = gen.model({3, 4, 2, 2}, gen.activation());
    const std::string text = model_to_json(model);
    const BannModel back = model_from_json(text);
    EXPECT_EQ(model_to_json(back), text);
    const Matrix x = gen.normal_matrix(20, 3);
    EXPECT_EQ(forward_batch(back, x), forward_batch(model, x));
  }
}

TEST(ModelJson, FileRoundTrip) {
  testkit::Gen gen(5);
  const BannModel model = gen.model({2, 3, 1}, gen.activation());
  const auto dir = scratch_dir("file");
  save_model(dir / "m.json", model);
  EXPECT_EQ(model_to_json(load_model(dir / "m.json")), model_to_json(model));
  EXPECT_EQ(std::distance(std::filesystem::directory_iterator(dir), {}), 1);
}

TEST(ModelJson, RejectsBadFiles) {
  testkit::Gen gen(6);
  std::string text = model_to_json(gen.model({2, 3, 1}, gen.activation()));
  const auto pos = text.find("\"version\": 1");
  ASSERT_NE(pos, std::string::npos);
  std::string future = text;
  future.replace(pos, 12, "\"version\": 2");
  EXPECT_THROW(model_from_json(future), DataError);
  EXPECT_THROW(model_from_json("{"), DataError);
  EXPECT_THROW(model_from_json("{\"version\": 1}"), DataError);
  EXPECT_THROW(load_model("/nonexistent/model.json"), DataError);
}

#include "w2slab/config.hpp"
#include "w2slab/report.hpp"

#include <gtest/gtest.h>

using namespace w2slab;

namespace {

const Schema& schema() {
  static const Schema s = {
      {"seed", ValueType::UInt64, "1", ""},         {"trials", ValueType::Int, "50", ""},
      {"eta", ValueType::Double, "0.5", ""},        {"fast", ValueType::Bool, "false", ""},
      {"mode", ValueType::String, "tanh", ""},      {"gammas", ValueType::DoubleList, "1.5,2", ""},
      {"losses", ValueType::StringList, "ce", ""},
  };
  return s;
}

}  // namespace

TEST(ConfigText, SectionsCommentsAndGlobals) {
  const auto e = parse_config_text(
      "# global\nseed = 3\n\n[ridge]\ntrials=10 \n; note\n[classify]\ntrials = 99\nmode = x\n", "ridge");
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0], (std::pair<std::string, std::string>{"seed", "3"}));
  EXPECT_EQ(e[1], (std::pair<std::string, std::string>{"trials", "10"}));
}

TEST(ConfigText, Malformed) {
  EXPECT_THROW(parse_config_text("seed\n", "x"), ConfigError);
  EXPECT_THROW(parse_config_text("[open\n", "x"), ConfigError);
  EXPECT_THROW(parse_config_text("a=1\na=2\n", "x"), ConfigError);
  EXPECT_THROW(parse_config_text("=1\n", "x"), ConfigError);
  EXPECT_THROW(parse_config_file("/nonexistent/w2slab.cfg", "x"), ConfigError);
  EXPECT_THROW(parse_override("novalue"), ConfigError);
  EXPECT_EQ(parse_override("k = v=w").second, "v=w");
}

TEST(Resolve, DefaultsAndTypes) {
  const auto c = ExperimentConfig::resolve(schema(), {}, {}, std::nullopt);
  EXPECT_EQ(c.get_uint64("seed"), 1u);
  EXPECT_EQ(c.get_int("trials"), 50);
  EXPECT_DOUBLE_EQ(c.get_double("eta"), 0.5);
  EXPECT_FALSE(c.get_bool("fast"));
  EXPECT_EQ(c.get_string("mode"), "tanh");
  EXPECT_EQ(c.get_doubles("gammas"), (std::vector<double>{1.5, 2.0}));
  EXPECT_EQ(c.get_strings("losses"), (std::vector<std::string>{"ce"}));
  EXPECT_THROW(c.get_int("eta"), std::logic_error);
}

TEST(Resolve, Precedence) {
  const Entries file = {{"seed", "5"}, {"trials", "7"}};
  EXPECT_EQ(ExperimentConfig::resolve(schema(), file, {}, std::nullopt).get_uint64("seed"), 5u);
  EXPECT_EQ(ExperimentConfig::resolve(schema(), file, {}, "9").get_uint64("seed"), 9u);
  const auto c = ExperimentConfig::resolve(schema(), file, {{"seed", "11"}}, "9");
  EXPECT_EQ(c.get_uint64("seed"), 11u);
  EXPECT_EQ(c.get_int("trials"), 7);
}

TEST(Resolve, Errors) {
  EXPECT_THROW(ExperimentConfig::resolve(schema(), {{"nope", "1"}}, {}, std::nullopt), ConfigError);
  EXPECT_THROW(ExperimentConfig::resolve(schema(), {}, {{"trials", "1.5"}}, std::nullopt), ConfigError);
  EXPECT_THROW(ExperimentConfig::resolve(schema(), {}, {{"eta", "abc"}}, std::nullopt), ConfigError);
  EXPECT_THROW(ExperimentConfig::resolve(schema(), {}, {{"eta", "inf"}}, std::nullopt), ConfigError);
  EXPECT_THROW(ExperimentConfig::resolve(schema(), {}, {{"fast", "maybe"}}, std::nullopt), ConfigError);
  EXPECT_THROW(ExperimentConfig::resolve(schema(), {}, {{"gammas", "1,,2"}}, std::nullopt), ConfigError);
  EXPECT_THROW(ExperimentConfig::resolve(schema(), {}, {}, "-3"), ConfigError);
  EXPECT_THROW(ExperimentConfig::resolve(schema(), {}, {{"trials", "99999999999"}}, std::nullopt), ConfigError);
  const auto empty = ExperimentConfig::resolve(schema(), {}, {{"gammas", ""}}, std::nullopt);
  EXPECT_TRUE(empty.get_doubles("gammas").empty());
}

TEST(Resolve, DescribeListsEveryKey) {
  const auto text = describe_schema(schema());
  for (const auto& k : schema()) EXPECT_NE(text.find(k.name), std::string::npos);
  EXPECT_NE(text.find("W2SLAB_SEED"), std::string::npos);
}

TEST(Csv, QuotingAndSingleHeader) {
  Table t;
  t.header = {"name", "value", "count"};
  t.add({std::string("plain"), 0.1, std::int64_t{3}});
  t.add({std::string("a,\"b\""), Cell{}, std::int64_t{-1}});
  EXPECT_EQ(to_csv(t), "name,value,count\r\nplain,0.10000000000000001,3\r\n\"a,\"\"b\"\"\",,-1\r\n");
  EXPECT_THROW(t.add({std::string("short")}), std::invalid_argument);
}

TEST(Csv, DoublesRoundTrip) {
  Table t;
  t.header = {"x"};
  const double v = 1.0 / 3.0;
  t.add({v});
  const auto csv = to_csv(t);
  const auto line = csv.substr(csv.find("\r\n") + 2);
  EXPECT_EQ(std::stod(line), v);
}

TEST(Json, ReportShape) {
  RunReport r;
  r.command = "ridge";
  r.config = config_json(ExperimentConfig::resolve(schema(), {}, {{"fast", "yes"}}, std::nullopt));
  r.rows.header = {"a", "b"};
  r.rows.add({1.5, Cell{}});
  r.rows.add({std::numeric_limits<double>::infinity(), std::string("s")});
  r.verdicts = {{"ok", true, "fine"}, {"bad", false, "no"}};
  r.duration_seconds = 0.25;
  const auto j = to_json(r);
  EXPECT_EQ(j.size(), 4u);
  EXPECT_EQ(j["config"]["command"], "ridge");
  EXPECT_EQ(j["config"]["fast"], true);
  EXPECT_EQ(j["config"]["gammas"], nlohmann::json::array({1.5, 2.0}));
  EXPECT_EQ(j["config"]["seed"], 1);
  EXPECT_EQ(j["rows"][0]["a"], 1.5);
  EXPECT_TRUE(j["rows"][0]["b"].is_null());
  EXPECT_EQ(j["rows"][1]["a"], "inf");
  EXPECT_EQ(j["verdicts"][1]["passed"], false);
  EXPECT_EQ(j["duration_seconds"], 0.25);
  EXPECT_FALSE(r.all_passed());
}

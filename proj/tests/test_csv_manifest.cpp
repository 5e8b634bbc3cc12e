#include "sheforge/csv.hpp"
#include "sheforge/error.hpp"
#include "sheforge/manifest.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace sheforge;

TEST_CASE("17 significant digits round-trip every double") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> exp10(-300.0, 300.0);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const double v = mant(rng) * std::pow(10.0, exp10(rng));
    double back = 0.0;
    REQUIRE(csv::parse_double(csv::format_double(v), back));
    CHECK(back == v);
  }
  for (double v : {0.0, -0.0, 0.1, 1e-320, std::numeric_limits<double>::max()}) {
    double back = 1.0;
    REQUIRE(csv::parse_double(csv::format_double(v), back));
    CHECK(back == v);
  }
  CHECK(csv::format_double(std::nan("")) == "nan");
}

TEST_CASE("strict numeric cells") {
  double v = 0.0;
  CHECK(csv::parse_double("2.5e-3", v));
  CHECK(v == 2.5e-3);
  CHECK(csv::split_line(" 2.5 , x")[0] == "2.5");
  CHECK_FALSE(csv::parse_double("", v));
  CHECK_FALSE(csv::parse_double("2.5x", v));
  CHECK_FALSE(csv::parse_double("abc", v));
}

TEST_CASE("document reader") {
  std::istringstream in("# leading comment\na, b\n1,2\n\n3,4\n# thd_pct=1\n");
  const csv::Document d = csv::read(in);
  CHECK(d.header == std::vector<std::string>{"a", "b"});
  CHECK(d.rows.size() == 2);
  CHECK(d.comments.size() == 2);
  std::istringstream empty("");
  CHECK_THROWS_AS(csv::read(empty), FormatError);
  CHECK_THROWS_AS(csv::read_text("/nonexistent/file.csv"), FormatError);
}

TEST_CASE("manifest JSON round-trip") {
  RunManifest m;
  m.command = "sweep";
  m.argv = {"sweep", "--from", "0.6", "--out", "t.csv"};
  m.inputs_json = R"({"from":"0.6"})";
  m.outputs = {"t.csv", "t.audit.json"};
  m.seed = 1234;
  const std::string json = manifest_to_json(m);
  const RunManifest back = manifest_from_json(json);
  CHECK(back.command == m.command);
  CHECK(back.argv == m.argv);
  CHECK(back.outputs == m.outputs);
  CHECK(back.seed == 1234);
  CHECK(back.tool_version == kToolVersion);
  CHECK(manifest_to_json(back) == json);
  CHECK(manifest_path_for("a/b.csv") == "a/b.csv.manifest.json");
  CHECK_THROWS_AS(manifest_from_json("{}"), FormatError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "haantjes/report.hpp"

using namespace haan;

TEST_CASE("load the bundled definition file") {
  const DefinitionFile def = load_definition(std::string(HAANTJES_DATA_DIR) + "/golden_3x3.json");
  CHECK(def.dim == 3);
  CHECK(def.operators.count("L") == 1);
  CHECK(def.explicit_points.size() == 1);
  CHECK(def.random_count == 10);
  CHECK(def.seed == 42);
  CHECK(def.tol_identity == 1e-8);
  CHECK_FALSE(def.digest.empty());

  const std::vector<Point> pts = sample_points(def);
  CHECK(pts.size() == 11);
  // explicit points come first, then the seeded random block
  CHECK(pts.front()[0] == 0.1);
  const std::vector<Point> again = sample_points(def);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int k = 0; k < 3; ++k) CHECK(pts[i][k] == again[i][k]);

  CHECK_THROWS_AS(find_operator(def, "M"), std::invalid_argument);
  CHECK(find_operator(def, "L").dim() == 3);
}

TEST_CASE("definition parsing errors") {
  CHECK_THROWS_AS(parse_definition("{not json"), ParseError);
  CHECK_THROWS_AS(parse_definition(R"({"operators": {}})"), ParseError);  // missing dim
  CHECK_THROWS_AS(parse_definition(R"({"dim": 2, "operators": {"A": [["x1"]]}})"), ParseError);
  CHECK_THROWS_AS(
      parse_definition(R"({"dim": 2, "operators": {"A": [["x1","x9"],["0","1"]]}})"),
      ParseError);  // coordinate out of range
  CHECK_THROWS_AS(parse_definition(R"({"dim": 2, "points": {"explicit": [[1.0]]}})"),
                  ParseError);
}

TEST_CASE("digest is the standard offset-basis hash") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") != fnv1a_hex("b"));
}

TEST_CASE("tensor serialization lists the independent components") {
  Tensor12 t = Tensor12::build(2, 0.0, [](int i, int j, int k) {
    return static_cast<double>(100 * i + 10 * j + k);
  });
  const nlohmann::json j = to_json(t);
  CHECK(j["dim"] == 2);
  CHECK(j["components_j_lt_k"].size() == 2);  // i in {1,2}, (j,k) = (1,2)
  CHECK(j["components_j_lt_k"][0]["j"] == 1);
  CHECK(j["components_j_lt_k"][0]["k"] == 2);
}

TEST_CASE("report envelope carries version and digest") {
  const nlohmann::json j = report_envelope("eval", "abc123");
  CHECK(j["tool_version"] == kToolVersion);
  CHECK(j["command"] == "eval");
  CHECK(j["input_digest"] == "abc123");
}

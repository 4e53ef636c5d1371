#include <catch_amalgamated.hpp>

#include "opdyn/report.hpp"

using namespace opdyn;

namespace {

Json minimal() {
  return Json::parse(R"({
    "space": {"dim": 4, "norm_p": 2},
    "operator_set": {"kind": "scalar_family", "sequence": {"kind": "one_plus_inverse"}},
    "budget": 100,
    "analyses": [{"kind": "residual", "x": [[1, 0], [0, 0], [0, 0], [0, 0]]}]
  })");
}

struct Caught {
  std::string path;
  ErrorKind kind;
};

Caught schema_error(const Json& doc) {
  try {
    parse_config(doc);
  } catch (const SchemaError& e) {
    return {e.path(), e.kind()};
  }
  FAIL("expected SchemaError");
  return {};
}

}  // namespace

TEST_CASE("minimal config parses and runs", "[config]") {
  const auto cfg = parse_config(minimal());
  CHECK(cfg.dim == 4);
  CHECK(cfg.budget == 100);
  REQUIRE(cfg.analyses.size() == 1);
  const auto run = run_analysis(cfg);
  CHECK(run.exit_code == kExitOk);
  CHECK(run.report["analyses"][0]["result"]["min_residual"].get<double>() == Catch::Approx(0.01).margin(1e-12));
}

TEST_CASE("text entry point reports malformed JSON", "[config]") {
  CHECK(parse_config(minimal().dump()).dim == 4);
  try {
    parse_config(std::string("{not json"));
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.path().empty());
  }
}

TEST_CASE("schema errors name the location", "[config]") {
  Json doc = minimal();
  doc["analyses"] = Json::parse(R"([{"kind": "certify_set", "balls": [{"center": [[1,0],[0,0],[0,0],[0,0]]}]}])");
  const auto c1 = schema_error(doc);
  CHECK(c1.path == "analyses[0].balls[0].radius");
  CHECK(c1.kind == ErrorKind::SchemaError);

  doc = minimal();
  doc["space"].erase("dim");
  CHECK(schema_error(doc).path == "space.dim");

  doc = minimal();
  doc["analyses"][0]["x"] = Json::parse("[[1,0],[0,0]]");
  const auto c3 = schema_error(doc);
  CHECK(c3.path == "analyses[0].x");
  CHECK(c3.kind == ErrorKind::DimensionMismatch);

  doc = minimal();
  doc["analyses"][0]["x"][1] = "oops";
  CHECK(schema_error(doc).path == "analyses[0].x[1]");

  doc = minimal();
  doc["space"]["norm_p"] = 3;
  CHECK(schema_error(doc).path == "space.norm_p");

  doc = minimal();
  doc["budget"] = 0;
  CHECK(schema_error(doc).path == "budget");
}

TEST_CASE("unknown kinds", "[config]") {
  Json doc = minimal();
  doc["analyses"][0]["kind"] = "plot";
  auto c = schema_error(doc);
  CHECK(c.path == "analyses[0].kind");
  CHECK(c.kind == ErrorKind::UnknownKind);

  doc = minimal();
  doc["operator_set"]["sequence"]["kind"] = "fibonacci";
  c = schema_error(doc);
  CHECK(c.path == "operator_set.sequence.kind");
  CHECK(c.kind == ErrorKind::UnknownKind);
}

TEST_CASE("non-unimodular scaling is rejected at build", "[config]") {
  Json doc = minimal();
  doc["operator_set"] = Json::parse(R"({"kind": "unimodular_scaled",
    "base": {"kind": "powers", "operator": {"kind": "rank_one_fix"}},
    "sequence": {"kind": "explicit_list", "params": {"values": [[1,0],[0.5,0]]}}})");
  const auto c = schema_error(doc);
  CHECK(c.kind == ErrorKind::NotUnimodular);
  CHECK(c.path == "operator_set.sequence");
}

TEST_CASE("truncation window is enforced", "[config]") {
  Json doc = Json::parse(R"({
    "space": {"dim": 8, "window": {"support_bound": 3, "power_bound": 5}},
    "operator_set": {"kind": "powers", "operator": {"kind": "forward_shift"}},
    "budget": 5,
    "analyses": [{"kind": "residual", "x": [[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]}]
  })");
  CHECK_NOTHROW(parse_config(doc));
  doc["budget"] = 6;
  CHECK(schema_error(doc).kind == ErrorKind::WindowViolation);
  doc["budget"] = 5;
  doc["analyses"][0]["x"][3] = Json::array({1, 0});
  const auto c = schema_error(doc);
  CHECK(c.kind == ErrorKind::WindowViolation);
  CHECK(c.path == "analyses[0]");
}

TEST_CASE("operators and sets from JSON match their builders", "[config]") {
  const Json doc = Json::parse(R"({
    "space": {"dim": 3},
    "operator_set": {"kind": "direct_sum", "mode": "product", "parts": [
      {"kind": "finite_list", "dim": 1, "operators": [{"kind": "scalar", "a": 2}, {"kind": "scalar", "a": [0, 1]}]},
      {"kind": "finite_list", "dim": 2, "operators": [
        {"kind": "dense", "rows": [[[1,0],[2,0]],[[0,0],[1,0]]]},
        {"kind": "composition", "left": {"kind": "backward_shift", "weight": 3}, "right": {"kind": "diagonal", "entries": [1, 2]}},
        {"kind": "power", "base": {"kind": "forward_shift"}, "exponent": 2}]}]},
    "budget": 6,
    "analyses": []
  })");
  const auto cfg = parse_config(doc);
  CHECK(cfg.set.size() == 6u);
  const CMatrix m5 = materialize(*cfg.set.at(5));
  CHECK(m5(0, 0) == Complex(0, 1));
  CHECK(m5(1, 2) == Complex(6.0));
  CHECK(materialize(*cfg.set.at(3))(1, 1) == Complex(0.0));
}

TEST_CASE("direct-sum part dimensions must add up", "[config]") {
  Json doc = minimal();
  doc["operator_set"] = Json::parse(R"({"kind": "finite_list", "operators": [
    {"kind": "direct_sum", "parts": [{"kind": "identity", "dim": 1}, {"kind": "identity", "dim": 2}]}]})");
  const auto c = schema_error(doc);
  CHECK(c.kind == ErrorKind::DimensionMismatch);
  CHECK(c.path == "operator_set.operators[0].parts");
}

TEST_CASE("group_scan needs a group", "[config]") {
  Json doc = minimal();
  doc["analyses"] = Json::parse(R"([{"kind": "group_scan", "balls": [{"center": [1,0,0,0], "radius": 0.1}]}])");
  CHECK(schema_error(doc).path == "analyses[0].kind");
}

TEST_CASE("non-commuting group is a config error", "[config]") {
  const Json doc = Json::parse(R"({
    "space": {"dim": 2},
    "operator_set": {"kind": "creg_grid",
      "group": {"generator": {"kind": "backward_shift"}, "regularizer": {"kind": "diagonal", "entries": [1, 2]}},
      "grid": {"points": [[0, 1]]}},
    "budget": 1, "analyses": []
  })");
  const auto c = schema_error(doc);
  CHECK(c.kind == ErrorKind::NotCommuting);
  CHECK(c.path == "operator_set.group");
}

TEST_CASE("zero vectors inside grids are skipped and flagged", "[config]") {
  Json doc = minimal();
  doc["space"]["dim"] = 1;
  doc["analyses"] = Json::parse(R"([{"kind": "eps_recurrent", "eps": 0.5, "grid": {"center": [0], "radius": 1, "per_axis": 3}},
                                    {"kind": "residual", "x": [0]}])");
  const auto cfg = parse_config(doc);
  const auto run = run_analysis(cfg);
  const auto& a0 = run.report["analyses"][0]["result"];
  CHECK(a0["skipped_zero_vectors"] == 1);
  CHECK(a0["vectors"].size() == 8);
  CHECK(a0.contains("note"));
  const auto& a1 = run.report["analyses"][1];
  CHECK(a1["status"] == "error");
  CHECK(a1["error"]["kind"] == "ZeroVector");
  CHECK(run.exit_code == kExitOk);
}

TEST_CASE("reports are deterministic across runs and worker counts", "[config]") {
  const Json doc = Json::parse(R"({
    "space": {"dim": 2},
    "operator_set": {"kind": "finite_list", "operators": [
      {"kind": "dense", "rows": [[[0.9,0],[0.2,0]],[[-0.1,0],[1.1,0]]]},
      {"kind": "scalar", "a": [0, 1]}, {"kind": "identity"}]},
    "seed": 99, "budget": 3,
    "analyses": [
      {"kind": "certify_set", "ball_grid": {"center": [1, 0], "radius": 1, "per_axis": 3, "ball_radius": 0.2}},
      {"kind": "residual", "x": [1, 1]},
      {"kind": "orbit_ratio", "x": [1, 1], "delta": 0.3, "random_probes": {"center": [0, 0], "radius": 2, "count": 50}}]
  })");
  const auto cfg = parse_config(doc);
  const auto a = strip_timings(run_analysis(cfg, {1}).report).dump();
  const auto b = strip_timings(run_analysis(cfg, {4}).report).dump();
  const auto c = strip_timings(run_analysis(parse_config(doc), {1}).report).dump();
  CHECK(a == b);
  CHECK(a == c);
  CHECK(a.find("timing_ms") == std::string::npos);
}

TEST_CASE("every negative claim is qualified", "[config]") {
  const Json doc = Json::parse(R"({
    "space": {"dim": 1},
    "operator_set": {"kind": "powers", "operator": {"kind": "scalar", "a": 2}},
    "budget": 10,
    "analyses": [
      {"kind": "certify_set", "balls": [{"center": [1], "radius": 0.1}]},
      {"kind": "eps_recurrent", "eps": 0.1, "x": [1]},
      {"kind": "gdelta", "x": [1], "s_max": 3},
      {"kind": "construct", "ball": {"center": [1], "radius": 0.1}, "steps": 2, "theta": 0.5}]
  })");
  const auto rep = run_analysis(parse_config(doc)).report;
  const auto& r = rep["analyses"];
  CHECK(r[0]["result"]["balls"][0]["budget_relative"] == true);
  CHECK(r[0]["result"]["balls"][0]["within_budget"] == 10);
  CHECK(r[1]["result"]["vectors"][0]["budget_relative"] == true);
  CHECK(r[2]["result"]["budget_relative"] == true);
  CHECK(r[3]["result"]["succeeded"] == false);
  CHECK(r[3]["result"]["within_budget"] == 10);
}

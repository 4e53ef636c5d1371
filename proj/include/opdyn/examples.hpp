#pragma once

// Built-in scenarios with stored expected outcomes. Each expectation names a
// JSON pointer into the run's report, a check, and a provenance label:
//   literature   - stated in the source literature for this scenario
//   definitional - follows directly from the definitions
//   computed     - worked out by hand from the operator algebra

#include <algorithm>
#include <string>
#include <vector>

#include "opdyn/report.hpp"

namespace opdyn {

struct Expectation {
  std::string pointer;
  /// "approx" (|v - value| <= tol), "equals", "empty", "null", "not_null"
  std::string check;
  Json value;
  double tol = 0.0;
  std::string provenance;
  std::string note;
};

struct Scenario {
  std::string name;
  std::string summary;
  Json config;
  std::vector<Expectation> expectations;
};

struct ExpectationOutcome {
  Expectation expectation;
  bool passed;
  std::string detail;
};

namespace examples_detail {

struct Stored {
  const char* name;
  const char* summary;
  const char* config;
  const char* expectations;
};

// clang-format off
inline const Stored kScenarios[] = {
{"scalar_family",
 "a_n I with a_n = 1 + 1/n: every nonzero vector is recurrent and every ball returns",
 R"({
  "space": {"dim": 2, "norm_p": 2},
  "operator_set": {"kind": "scalar_family", "sequence": {"kind": "one_plus_inverse", "params": {"scale": 1}}},
  "seed": 7,
  "budget": 1000,
  "analyses": [
    {"kind": "residual", "x": [[1, 0], [0, 0]], "budget": 100},
    {"kind": "eps_recurrent", "eps": 0.01, "grid": {"center": [[0, 0], [0, 0]], "radius": 1, "per_axis": 3}},
    {"kind": "certify_set", "margin": 1e-6,
     "ball_grid": {"center": [[1, 0], [0, 0]], "radius": 1, "per_axis": 3, "ball_radius": 0.25}},
    {"kind": "orbit_ratio", "x": [[1, 0], [0, 0]], "delta": 0.05,
     "random_probes": {"center": [[0, 0], [0, 0]], "radius": 2, "count": 200}}
  ]
 })",
 R"([
  {"pointer": "/analyses/0/result/min_residual", "check": "approx", "value": 0.01, "tol": 1e-12, "provenance": "computed",
   "note": "||a_N x - x|| = ||x|| / N"},
  {"pointer": "/analyses/0/result/witness/op_index", "check": "equals", "value": 100, "provenance": "computed"},
  {"pointer": "/analyses/1/result/all_recurrent", "check": "equals", "value": true, "provenance": "literature"},
  {"pointer": "/analyses/1/result/skipped_zero_vectors", "check": "equals", "value": 1, "provenance": "definitional"},
  {"pointer": "/analyses/2/result/all_certified", "check": "equals", "value": true, "provenance": "literature"},
  {"pointer": "/analyses/3/result/ratio", "check": "approx", "value": 0.0, "tol": 0.2, "provenance": "literature",
   "note": "the orbit lies on a ray, far from dense"}
 ])"},

{"rank_one_cex",
 "T e_1 = e_1, T e_k = 0: e_1 is a recurrent vector but T is not a recurrent operator",
 R"({
  "space": {"dim": 4, "norm_p": 2},
  "operator_set": {"kind": "powers", "operator": {"kind": "rank_one_fix"}, "start_exponent": 1},
  "seed": 1,
  "budget": 50,
  "analyses": [
    {"kind": "residual", "x": [[1, 0], [0, 0], [0, 0], [0, 0]]},
    {"kind": "certify_set", "record_values": true,
     "balls": [{"center": [[0, 0], [1, 0], [0, 0], [0, 0]], "radius": 0.5}]},
    {"kind": "gdelta", "x": [[1, 0], [0, 0], [0, 0], [0, 0]], "s_max": 10}
  ]
 })",
 R"([
  {"pointer": "/analyses/0/result/min_residual", "check": "approx", "value": 0.0, "tol": 0.0, "provenance": "literature"},
  {"pointer": "/analyses/0/result/witness/op_index", "check": "equals", "value": 1, "provenance": "literature"},
  {"pointer": "/analyses/1/result/certificates", "check": "empty", "provenance": "literature"},
  {"pointer": "/analyses/1/result/balls/0/min_value", "check": "approx", "value": 1.0, "tol": 1e-9, "provenance": "computed",
   "note": "T^n z = z_1 e_1, so min ||z_1 e_1 - e_2|| = 1"},
  {"pointer": "/analyses/1/result/balls/0/closed_form_lower_bound", "check": "approx", "value": 1.0, "tol": 1e-12,
   "provenance": "computed"},
  {"pointer": "/analyses/1/result/balls/0/nonreturn_proven", "check": "equals", "value": true, "provenance": "computed"},
  {"pointer": "/analyses/2/result/member", "check": "equals", "value": true, "provenance": "literature"}
 ])"},

{"rolewicz",
 "2B on the first 8 coordinates: x = e_1 + 2^-5 e_6 returns within 2^-5 at the 5th iterate",
 R"({
  "space": {"dim": 8, "norm_p": 2, "window": {"support_bound": 6, "power_bound": 5}},
  "operator_set": {"kind": "powers", "operator": {"kind": "backward_shift", "weight": [2, 0]}},
  "seed": 3,
  "budget": 5,
  "analyses": [
    {"kind": "residual",
     "x": [[1, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0.03125, 0], [0, 0], [0, 0]]}
  ]
 })",
 R"([
  {"pointer": "/analyses/0/result/min_residual", "check": "approx", "value": 0.03125, "tol": 1e-15, "provenance": "computed",
   "note": "(2B)^5 x = e_1"},
  {"pointer": "/analyses/0/result/witness/op_index", "check": "equals", "value": 5, "provenance": "computed"}
 ])"},

{"exp_scalar_group",
 "S(z) = e^z on C with C = I: exact return at the period point 2 pi i",
 R"({
  "space": {"dim": 1, "norm_p": 2},
  "operator_set": {"kind": "creg_grid",
    "group": {"generator": {"kind": "identity"}, "regularizer": {"kind": "identity"}},
    "grid": {"points": [[0.5, 0], [0, 1], [0, 6.283185307179586]]}},
  "seed": 11,
  "budget": 3,
  "analyses": [
    {"kind": "group_scan", "axioms_samples": 32,
     "balls": [{"center": [[1, 0]], "radius": 0.1}]}
  ]
 })",
 R"([
  {"pointer": "/analyses/0/result/certificates/0/op_index", "check": "equals", "value": 3, "provenance": "computed"},
  {"pointer": "/analyses/0/result/certificates/0/value", "check": "approx", "value": 0.0, "tol": 1e-12, "provenance": "computed",
   "note": "e^{2 pi i} = 1"},
  {"pointer": "/analyses/0/result/period_points/0/exact_return", "check": "equals", "value": true, "provenance": "computed"},
  {"pointer": "/analyses/0/result/axioms/composition_defect", "check": "approx", "value": 0.0, "tol": 1e-10,
   "provenance": "definitional"},
  {"pointer": "/analyses/0/result/axioms/initial_defect", "check": "approx", "value": 0.0, "tol": 1e-12,
   "provenance": "definitional"}
 ])"},
};
// clang-format on

}  // namespace examples_detail

inline std::vector<std::string> example_names() {
  std::vector<std::string> out;
  for (const auto& s : examples_detail::kScenarios) out.emplace_back(s.name);
  return out;
}

inline Scenario build_example(const std::string& name) {
  for (const auto& s : examples_detail::kScenarios) {
    if (name != s.name) continue;
    Scenario sc{s.name, s.summary, Json::parse(s.config), {}};
    for (const auto& e : Json::parse(s.expectations)) {
      Expectation x;
      x.pointer = e.at("pointer").get<std::string>();
      x.check = e.at("check").get<std::string>();
      if (e.contains("value")) x.value = e.at("value");
      x.tol = e.value("tol", 0.0);
      x.provenance = e.at("provenance").get<std::string>();
      x.note = e.value("note", "");
      sc.expectations.push_back(std::move(x));
    }
    return sc;
  }
  fail(ErrorKind::UnknownExample, "no example named '" + name + "'");
}

inline std::vector<ExpectationOutcome> check_expectations(const Scenario& sc, const Json& report) {
  std::vector<ExpectationOutcome> out;
  for (const auto& e : sc.expectations) {
    ExpectationOutcome o{e, false, {}};
    const Json::json_pointer ptr(e.pointer);
    if (!report.contains(ptr)) {
      o.detail = "missing";
      out.push_back(std::move(o));
      continue;
    }
    const Json& v = report.at(ptr);
    if (e.check == "approx") {
      o.passed = v.is_number() && std::abs(v.get<double>() - e.value.get<double>()) <= e.tol;
    } else if (e.check == "equals") {
      o.passed = v == e.value;
    } else if (e.check == "empty") {
      o.passed = v.is_array() && v.empty();
    } else if (e.check == "null") {
      o.passed = v.is_null();
    } else if (e.check == "not_null") {
      o.passed = !v.is_null();
    } else {
      o.detail = "unknown check '" + e.check + "'";
    }
    if (o.detail.empty()) o.detail = "observed " + v.dump();
    out.push_back(std::move(o));
  }
  return out;
}

struct ExampleRun {
  Scenario scenario;
  RunResult run;
  std::vector<ExpectationOutcome> outcomes;
  bool passed() const {
    return std::all_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.passed; });
  }
};

/// Builds, runs and checks a scenario. The report gains an "expectations" array.
inline ExampleRun run_example(const std::string& name, const RunOptions& opt = {}) {
  ExampleRun r{build_example(name), {}, {}};
  r.run = run_analysis(parse_config(r.scenario.config), opt);
  r.outcomes = check_expectations(r.scenario, r.run.report);
  Json exp = Json::array();
  for (const auto& o : r.outcomes)
    exp.push_back({{"pointer", o.expectation.pointer},
                   {"check", o.expectation.check},
                   {"provenance", o.expectation.provenance},
                   {"passed", o.passed},
                   {"detail", o.detail}});
  r.run.report["scenario"] = r.scenario.name;
  r.run.report["expectations"] = std::move(exp);
  return r;
}

}  // namespace opdyn

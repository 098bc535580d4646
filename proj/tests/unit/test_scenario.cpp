#include "doctest.h"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "mec/error.hpp"
#include "mec/scenario.hpp"

using namespace mec;

namespace {

// Small budgets: these tests exercise the plumbing, not the criteria.
Config small() { return Config{}.scaled(0.1); }

}  // namespace

TEST_CASE("registry lists the shipped scenarios in a stable order") {
  std::vector<std::string> names;
  for (const auto& s : scenario_registry()) {
    names.push_back(s.name);
    CHECK(!s.description.empty());
    CHECK(!s.anchor.empty());
  }
  CHECK(names.size() == 10);
  CHECK(names.front() == "luca_r2_s1");
  for (const char* n : {"so2_action_no_mec", "sproper_complete_family", "splitting_fixture", "morita_pullback"}) {
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  }
  CHECK_THROWS_AS(find_scenario("nope"), Error);
  CHECK_THROWS_AS(run_scenario("nope", 0, Config{}), Error);
}

TEST_CASE("json report: schema, parse round trip and byte-identical reruns") {
  const Config cfg = small();
  const ReportDocument doc = run_scenario("splitting_fixture", 0, cfg);
  CHECK(doc.pass());
  const std::string a = emit_report(doc, ReportFormat::Json);
  const std::string b = emit_report(run_scenario("splitting_fixture", 0, cfg), ReportFormat::Json);
  CHECK(a == b);
  CHECK(a == emit_report(doc, ReportFormat::Json));

  const auto j = nlohmann::json::parse(a);
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["seed"] == "0");
  CHECK(j["checks"].is_array());
  CHECK(j["checks"][0]["worst_residual"].is_string());
  CHECK(j["checks"][0]["wall_time"].is_null());
  CHECK(j["config"]["budget.pointwise_samples"] == "10");

  const ReportDocument back = parse_report(a);
  CHECK(emit_report(back, ReportFormat::Json) == a);
  CHECK_THROWS_AS(parse_report("{"), Error);
}

TEST_CASE("text report has one line per check") {
  const ReportDocument doc = run_scenario("luca_r2_s1", 7, small());
  const std::string text = emit_report(doc, ReportFormat::Text);
  std::size_t lines = 0;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == doc.checks.size() + 2);
  CHECK(text.find("PASS") != std::string::npos);
}

TEST_CASE("luca scenario records the product clause witness") {
  const ReportDocument doc = run_scenario("luca_r2_s1", 7, small());
  CHECK(doc.pass());
  const CheckEntry* w = doc.find("product_clause_witness");
  REQUIRE(w != nullptr);
  CHECK(w->outcome.worst_residual >= 1.0);
  REQUIRE(w->outcome.witness.has_value());
  CHECK(w->outcome.witness->coords == std::vector<double>{2.0, 2.0, 2.0, 8.0});
}

TEST_CASE("check errors become failed entries") {
  Config cfg = small();
  // No step refinement is possible: transports collapse and the path
  // criterion has nothing to compare, which must not crash the run.
  cfg.tol.h_ode = 0.5;
  const ReportDocument doc = run_scenario("luca_r2_s1", 1, cfg);
  CHECK(doc.checks.size() == 4);
}

TEST_CASE("unicode descriptions survive serialization") {
  ReportDocument doc;
  doc.scenario = "x";
  doc.description = "S\xc2\xb9 \xc3\x97 \xe2\x84\x9d";  // S¹ × ℝ
  doc.anchor = "a";
  CheckEntry e;
  e.name = "c";
  e.expected = "Pass";
  e.outcome.verdict = "Pass";
  doc.checks.push_back(e);
  const std::string out = emit_report(doc, ReportFormat::Json);
  CHECK(out.find("S\xc2\xb9") != std::string::npos);
  CHECK(parse_report(out).description == doc.description);
}

TEST_CASE("replay reproduces a recorded report and notices tampering") {
  const Config cfg = small();
  const std::string rec = emit_report(run_scenario("product_not_uniform", 3, cfg), ReportFormat::Json);
  CHECK(replay_report(rec).reproduced());
  auto j = nlohmann::ordered_json::parse(rec);
  j["checks"][0]["verdict"] = "false";
  CHECK(!replay_report(j.dump()).reproduced());
}

TEST_CASE("trajectory dump") {
  std::ostringstream os;
  dump_primary_trajectory("morita_pullback", 2, Config{}, os);
  std::istringstream in(os.str());
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines >= 101);
}

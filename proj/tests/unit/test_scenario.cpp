#include "borealis/scenario.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"

using namespace borealis;
using namespace borealis::scenario;
using nlohmann::json;

namespace {

json minimal() { return json::parse(testutil::slurp(testutil::fixture("minimal.json"))); }

// Loads `j` and returns the thrown error, or fails the test.
ScenarioError load_error(const json& j) {
  try {
    load_scenario(j.dump());
  } catch (const ScenarioError& e) {
    return e;
  }
  FAIL("scenario unexpectedly valid");
  return ScenarioError(Errc::ParseError, "", "");
}

}  // namespace

TEST_CASE("minimal scenario materialises defaults") {
  const auto s = load_scenario_file(testutil::fixture("minimal.json").string());
  CHECK(s.name == "minimal");
  CHECK(s.seed == 1);
  CHECK(s.start == parse_time("2024-01-01"));
  CHECK(s.end == s.start + kSecondsPerDay);
  CHECK(s.energy_budget == node::EnergyBudget{});
  CHECK(s.link_params == environment::LinkModelParams{});
  CHECK(s.downlink_timeout_s == 60.0);
  REQUIRE(s.nodes.size() == 1);
  const auto& n = s.nodes[0];
  CHECK(n.kind == alp::SensorKind::SoilTemp);
  CHECK(n.deployed_at == s.start);
  CHECK(n.sampling_interval_s == 900);
  CHECK(n.battery_ah == 19.0);
  CHECK(distance(n.position, s.sites[0].node_area_center) <= s.sites[0].max_span_m / 2);
  REQUIRE(s.gateways.size() == 1);
  CHECK(s.gateways[0].train_duration_s == doctest::Approx(1.0564));
  CHECK(s.gateways[0].power == gateway::PowerStation{});
  CHECK_FALSE(s.live_bridge);
}

TEST_CASE("materialised json reloads to the same scenario") {
  for (const auto* name : {"minimal.json", "gn13.json", "gn45.json", "go.json", "deployment.json"}) {
    CAPTURE(name);
    const auto s = load_scenario_file(testutil::fixture(name).string());
    const auto again = load_scenario(to_json(s), s.name);
    CHECK(again == s);
    CHECK(to_json(again) == to_json(s));
  }
}

TEST_CASE("unknown fields are named") {
  auto j = minimal();
  j["nodes"][0]["colour"] = "red";
  const auto e = load_error(j);
  CHECK(e.code() == Errc::ValidationError);
  CHECK(e.path() == "nodes[0].colour");
  CHECK(std::string(e.what()).find("unknown field") != std::string::npos);

  j = minimal();
  j["extra"] = 1;
  CHECK(load_error(j).path() == "extra");
  j = minimal();
  j["sites"][0]["climate"] = {{"baseline_mean_c", 4.0}, {"bogus", 1}};
  CHECK(load_error(j).path() == "sites[0].climate.bogus");
}

TEST_CASE("parse errors") {
  CHECK(testutil::error_code<Errc>([] { load_scenario(""); }) == Errc::ParseError);
  CHECK(testutil::error_code<Errc>([] { load_scenario("{\"seed\": 1,"); }) == Errc::ParseError);
  CHECK(testutil::error_code<Errc>([] { load_scenario("[]"); }).has_value());
  CHECK(testutil::error_code<Errc>([] { load_scenario_file("/nonexistent/x.json"); }).has_value());
}

TEST_CASE("validation errors carry the field path") {
  auto j = minimal();
  j.erase("seed");
  CHECK(load_error(j).path() == "seed");

  j = minimal();
  j["nodes"][0]["transect"] = "G";
  CHECK(load_error(j).path() == "nodes[0].transect");

  j = minimal();
  j["nodes"][0]["plot"] = "P9";
  CHECK(load_error(j).path() == "nodes[0].plot");

  j = minimal();
  j["nodes"][0]["sampling_interval_s"] = 30;
  CHECK(load_error(j).path().starts_with("nodes[0]"));

  j = minimal();
  j["nodes"].push_back(j["nodes"][0]);
  j["nodes"][1]["id"] = 3;
  CHECK(load_error(j).path() == "nodes[1].name");

  j = minimal();
  j["end"] = "2023-12-31";
  CHECK(load_error(j).path() == "end");

  j = minimal();
  j["nodes"][0]["deployed_at"] = "2025-01-01";
  CHECK(load_error(j).path() == "nodes[0].deployed_at");

  j = minimal();
  j["gateways"].push_back(j["gateways"][0]);
  j["gateways"][1]["id"] = 4;
  j["gateways"][1]["name"] = "G2";
  CHECK(load_error(j).path().starts_with("gateways[1]"));

  j = minimal();
  j["energy_budget"] = {{"sniff_period_s", 0}};
  CHECK(load_error(j).path().starts_with("energy_budget"));
}

TEST_CASE("fault targets must exist") {
  auto j = minimal();
  j["faults"] = json::array({{{"kind", "AntennaDetach"}, {"target", "G9"}, {"start", "2024-01-01"}}});
  CHECK(load_error(j).code() == Errc::UnknownTarget);

  j["faults"][0]["target"] = "G1";
  j["faults"][0]["end"] = "2024-01-01";
  CHECK(load_error(j).code() == Errc::ValidationError);

  auto s = load_scenario(minimal().dump());
  FaultSpec f;
  f.kind = FaultKind::BatteryReplace;
  f.target = "N9";
  f.start = s.start;
  CHECK(testutil::error_code<Errc>([&] { inject(s, f); }) == Errc::UnknownTarget);
  f.target = "N1";
  CHECK(inject(s, f).faults.size() == 1);
}

TEST_CASE("fixture censuses") {
  const auto gn13 = load_scenario_file(testutil::fixture("gn13.json").string());
  const auto c13 = census(gn13);
  CHECK(c13.nodes == 19);
  CHECK(c13.soil_temperature == 18);
  CHECK(c13.water_content == 1);
  CHECK(c13.gateways == 1);

  CHECK(census(load_scenario_file(testutil::fixture("gn45.json").string())).soil_temperature == 12);
  CHECK(census(load_scenario_file(testutil::fixture("go.json").string())).soil_temperature == 24);

  const auto all = load_scenario_file(testutil::fixture("deployment.json").string());
  const auto c = census(all);
  CHECK(c.nodes == 58);
  CHECK(c.gateways == 3);
  CHECK(c.soil_temperature == 54);
  CHECK(c.water_content == 3);
  CHECK(c.weather == 1);
  CHECK(census(all, "GN13").soil_temperature == 18);
  CHECK(census(all, "GN45").soil_temperature == 12);
  CHECK(census(all, "GO").soil_temperature == 24);
  CHECK(all.find_site("GO")->plots.size() == 4);
}

TEST_CASE("time parsing") {
  CHECK(parse_time("2022-04-20") == 1650412800);
  CHECK(parse_time("2022-04-20T01:00:00Z") == 1650416400);
  CHECK(format_time(1650412800) == "2022-04-20");
  CHECK(format_time(1650416400) == "2022-04-20T01:00:00Z");
  CHECK(testutil::error_code<Errc>([] { parse_time("2022-13-01"); }).has_value());
  CHECK(testutil::error_code<Errc>([] { parse_time("yesterday"); }).has_value());
}

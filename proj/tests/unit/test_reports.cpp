#include <sstream>

#include "borealis/reports.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"

using namespace borealis;
using namespace borealis::reports;
using nlohmann::json;

namespace {

scenario::Scenario three_days() {
  auto s = scenario::load_scenario_file(testutil::fixture("gn13.json").string());
  s.end = s.start + 3 * kSecondsPerDay;
  return s;
}

}  // namespace

TEST_CASE("run directory holds the artifacts and a reloadable trace") {
  testutil::TempDir tmp("reports");
  const auto s = three_days();
  const auto result = sim::run(s);
  const auto a = write_run(s, result, backend::ExportFormat::Csv, tmp.path());
  CHECK(a.dir == tmp.path() / "gn13");
  std::vector<std::string> names;
  for (const auto& f : a.files) {
    CHECK(std::filesystem::is_regular_file(f));
    names.push_back(f.filename().string());
  }
  CHECK(names == std::vector<std::string>{"measurements.csv", "prr_daily.csv", "summary.json", "battery_mv.csv",
                                          "run.trace"});

  const auto text = testutil::slurp(a.dir / "run.trace");
  CHECK(text.starts_with(std::string(kTraceMagic) + "\n"));
  std::istringstream in(text);
  const auto tf = read_trace(in);
  CHECK(tf.scenario == s);
  CHECK(tf.input == result.input);
  CHECK(tf.trace.digest == result.trace.digest);
  CHECK(tf.measurements == result.store.size());

  const auto prr = testutil::slurp(a.dir / "prr_daily.csv");
  CHECK(std::count(prr.begin(), prr.end(), '\n') == 1 + 19);
  const auto summary = json::parse(testutil::slurp(a.dir / "summary.json"));
  CHECK(summary["census"]["nodes"] == 19);
}

TEST_CASE("reports regenerate from the trace alone") {
  testutil::TempDir tmp("regen");
  const auto s = three_days();
  const auto a = write_run(s, sim::run(s), backend::ExportFormat::LineProtocol, tmp.path());
  CHECK(std::filesystem::exists(a.dir / "measurements.lp"));

  const auto prr = regenerate(a.dir, "prr");
  CHECK(std::count(prr.begin(), prr.end(), '\n') == 1 + 19);
  CHECK(std::filesystem::exists(a.dir / "prr.csv"));

  const auto life = json::parse(regenerate(a.dir, "lifetime"));
  CHECK(life["ideal_years"].get<double>() == doctest::Approx(9.70).epsilon(0.02 / 9.70));
  CHECK(life["derated_years_at_20c"].get<double>() == doctest::Approx(5.62).epsilon(0.02 / 5.62));

  const auto energy = json::parse(regenerate(a.dir, "energy"));
  CHECK(energy["closed_form_per_day"]["total_j"].get<double>() == doctest::Approx(69.48).epsilon(0.02 / 69.48));

  const auto transects = regenerate(a.dir, "transects");
  CHECK(transects.starts_with("site,transect,mean_c,node_days,samples\n"));
  CHECK(std::count(transects.begin(), transects.end(), '\n') == 1 + 6);

  CHECK(testutil::error_code<Errc>([&] { regenerate(a.dir, "pixels"); }) == Errc::UnknownReport);
  CHECK(testutil::error_code<Errc>([&] { regenerate(tmp.path() / "nope", "prr"); }) == Errc::MissingArtifacts);
}

TEST_CASE("trace files are checked") {
  std::istringstream bad("NOT-A-TRACE\n{}\n");
  CHECK(testutil::error_code<Errc>([&] { read_trace(bad); }) == Errc::BadTrace);
  std::istringstream truncated(std::string(kTraceMagic) + "\n{\"scenario\": 1}\n");
  CHECK(testutil::error_code<Errc>([&] { read_trace(truncated); }) == Errc::BadTrace);
}

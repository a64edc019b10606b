// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "borealis/alp.hpp"
#include "borealis/analytics.hpp"
#include "borealis/backend.hpp"
#include "borealis/gateway.hpp"
#include "borealis/scenario.hpp"
#include "borealis/simkernel.hpp"

using namespace borealis;

namespace {

constexpr double kEnergyTotalTol = 0.02;
constexpr double kEnergyPartTol = 0.01;
constexpr double kLifetimeTol = 0.02;
constexpr double kBackupDaysTol = 0.1;
constexpr double kTransectTol = 0.01;
constexpr double kWallClockLimitS = 60.0;
constexpr double kTrainRateTol = 0.02;
constexpr int kLossyDays = 20;
constexpr int kCodecFrames = 100'000;
constexpr int kFuzzInputs = 100'000;
constexpr int kQueries = 100;
constexpr int kTrainTrials = 10'000;

std::string fixture(const char* name) {
  return (std::filesystem::path(BOREALIS_SOURCE_DIR) / "fixtures" / name).string();
}

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int number, const char* title, const std::function<Verdict()>& check) {
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  if (!v.pass) ++failures;
  std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", number, title, v.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// One node 10 m from its gateway with deterministic shadowing.
scenario::Scenario lossless_minimal() {
  auto s = scenario::load_scenario_file(fixture("minimal.json"));
  s.link_params.noise_sigma_db = 0.0;
  s.nodes[0].position = Position{10.0, 0.0};
  return s;
}

// --- criteria -------------------------------------------------------------------

Verdict energy_budget() {
  const auto e = analytics::daily_energy(node::EnergyBudget{});
  const bool ok = near(e.total_j, 69.48, kEnergyTotalTol) && near(e.sleep_j, 43.13, kEnergyPartTol) &&
                  near(e.sniff_j, 18.17, kEnergyPartTol) && near(e.sample_j, 8.17, kEnergyPartTol);
  return {ok, fmt("total %.4f J (sleep %.4f, sniff %.4f, sample %.4f)", e.total_j, e.sleep_j, e.sniff_j,
                  e.sample_j)};
}

Verdict lifetime() {
  const node::EnergyBudget budget;
  const analytics::BatteryModel model;
  const double ideal = analytics::ideal_lifetime_years(budget, model);
  const double at_20ma = analytics::derated_capacity(model, 0.020, 20.0);
  const double at_2ma = analytics::derated_capacity(model, 0.002, 20.0);
  const double derated = analytics::lifetime_projection(budget, model, 20.0);
  const double oracle = 11.0 / 19.0 * 9.70;
  const bool ok = near(ideal, 9.70, kLifetimeTol) && at_20ma == 19.0 && at_2ma == 11.0 &&
                  near(derated, oracle, kLifetimeTol) && near(derated, 5.62, kLifetimeTol);
  return {ok, fmt("ideal %.4f y, 20 mA %.3f Ah, 2 mA %.3f Ah, derated %.4f y (expected %.4f)", ideal, at_20ma,
                  at_2ma, derated, oracle)};
}

Verdict gateway_backup() {
  gateway::GatewayState gw;
  constexpr double dt_s = 60.0;
  std::int64_t steps = 0;
  while (gw.online) {
    gw = gateway::step_power(std::move(gw), dt_s, 0.0);
    ++steps;
  }
  const double days = static_cast<double>(steps) * dt_s / 86400.0;
  const bool ok = near(days, 193.8, kBackupDaysTol) && days > 5 * 30.0;
  return {ok, fmt("offline after %.3f days at zero harvest (%lld one-minute steps)", days,
                  static_cast<long long>(steps))};
}

Verdict census() {
  const auto s = scenario::load_scenario_file(fixture("deployment.json"));
  const auto c = scenario::census(s);
  const auto gn13 = scenario::census(s, "GN13").soil_temperature;
  const auto gn45 = scenario::census(s, "GN45").soil_temperature;
  const auto go = scenario::census(s, "GO").soil_temperature;
  const bool ok = c.nodes == 58 && c.gateways == 3 && c.soil_temperature == 54 && gn13 == 18 && gn45 == 12 &&
                  go == 24;
  return {ok, fmt("%zu nodes, %zu gateways, %zu soil (GN13 %zu / GN45 %zu / GO %zu)", c.nodes, c.gateways,
                  c.soil_temperature, gn13, gn45, go)};
}

Verdict cadence() {
  const auto s = lossless_minimal();
  const auto r = sim::run(s);
  const auto prr = analytics::prr_report(r.input, r.store);
  const double overall = prr.overall.at(0).value_or(-1.0);
  const bool ok = r.store.size() == 96 && overall == 100.0;
  return {ok, fmt("%zu measurements, PRR %.1f", r.store.size(), overall)};
}

Verdict prr_oracle() {
  const auto base = scenario::load_scenario_file(fixture("gn13.json"));
  std::mt19937_64 pick(20240601);
  std::size_t cells = 0;
  std::size_t mismatches = 0;
  double lowest = 100.0;
  for (int trial = 0; trial < kLossyDays; ++trial) {
    auto s = base;
    s.seed = pick();
    s.start = base.start + static_cast<std::int64_t>(pick() % 300) * kSecondsPerDay;
    s.end = s.start + kSecondsPerDay;
    for (auto& n : s.nodes) n.deployed_at = s.start;
    for (auto& g : s.gateways) g.deployed_at = s.start;
    sim::SimOptions opt;
    opt.record_events = true;
    const auto r = sim::run(s, opt);

    std::map<std::uint64_t, std::uint32_t> frame_node;  // FrameOnAir seq -> node index
    for (const auto& rec : r.trace.records)
      if (rec.kind == sim::EventKind::FrameOnAir && !rec.downlink) frame_node[rec.seq] = rec.subject;
    std::vector<std::uint64_t> stored(s.nodes.size(), 0);
    for (const auto& rec : r.trace.records)
      if (rec.kind == sim::EventKind::BusDelivery && rec.outcome == sim::Outcome::Stored)
        ++stored.at(frame_node.at(rec.cause));

    const auto prr = analytics::prr_report(r.input, r.store);
    for (std::size_t n = 0; n < s.nodes.size(); ++n) {
      if (prr.nodes[n].id != s.nodes[n].id) return {false, "node order differs between scenario and report"};
      const auto& cell = prr.daily[n][0];
      const double brute = 100.0 * static_cast<double>(stored[n]) / 96.0;
      ++cells;
      if (cell.received != stored[n] || cell.expected != 96 ||
          analytics::daily_prr(cell.received, cell.expected) != brute || cell.percent != brute)
        ++mismatches;
      lowest = std::min(lowest, cell.percent);
    }
  }
  return {mismatches == 0 && lowest < 100.0,
          fmt("%zu node-days over %d seeded days, %zu mismatches, lowest PRR %.2f", cells, kLossyDays, mismatches,
              lowest)};
}

struct DeploymentRun {
  sim::RunResult result;
  std::string csv;
  double seconds = 0.0;
};

DeploymentRun run_deployment() {
  const auto s = scenario::load_scenario_file(fixture("deployment.json"));
  const auto t0 = std::chrono::steady_clock::now();
  DeploymentRun d;
  d.result = sim::run(s);
  d.csv = backend::export_measurements(d.result.store, {}, backend::ExportFormat::Csv);
  d.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return d;
}

std::size_t day_index(const analytics::PrrReport& r, const char* date) {
  return static_cast<std::size_t>((scenario::parse_time(date) - r.epoch) / kSecondsPerDay);
}

Verdict outages(const sim::RunResult& r) {
  const auto prr = analytics::prr_report(r.input, r.store);
  const auto daily = analytics::site_daily_prr(prr, "GN45");
  auto value = [&](std::size_t d) { return daily.at(d).value_or(-1.0); };
  auto all_zero = [&](const char* from, const char* to) {
    for (std::size_t d = day_index(prr, from); d < day_index(prr, to); ++d)
      if (value(d) != 0.0) return false;
    return true;
  };

  const bool antenna = all_zero("2023-04-10", "2023-05-10") && value(day_index(prr, "2023-04-09")) > 0.0 &&
                       value(day_index(prr, "2023-05-10")) > 0.0;
  const bool power = all_zero("2023-11-05", "2024-04-10") && value(day_index(prr, "2023-11-04")) > 0.0 &&
                     value(day_index(prr, "2024-04-10")) > 0.0;

  auto month = [&](int y, unsigned m) {
    return analytics::site_monthly_prr(prr, "GN45", analytics::Month{y, m}).value_or(-1.0);
  };
  const double mar = month(2023, 3), apr = month(2023, 4), jun = month(2023, 6);
  bool gap = true;
  for (auto [y, m] : {std::pair{2023, 12u}, {2024, 1u}, {2024, 2u}, {2024, 3u}}) gap = gap && month(y, m) == 0.0;
  const double nov = month(2023, 11), apr24 = month(2024, 4);
  const bool shape = apr < mar && apr < jun && apr > 0.0 && gap && nov < month(2023, 10) && apr24 > 0.0;

  return {antenna && power && shape,
          fmt("GN45 zero over antenna [2023-04-10, 2023-05-10) %s, power [2023-11-05, 2024-04-10) %s; monthly "
              "Mar %.1f Apr %.1f Jun %.1f Nov %.1f Dec-Mar %s Apr'24 %.1f",
              antenna ? "yes" : "no", power ? "yes" : "no", mar, apr, jun, nov, gap ? "0" : "nonzero", apr24)};
}

Verdict seasonal() {
  auto s = scenario::load_scenario_file(fixture("gn13.json"));
  for (auto& site : s.sites) site.climate.noise_sigma_c = 0.0;
  const auto r = sim::run(s);
  const auto prr = analytics::prr_report(r.input, r.store);
  const auto may = analytics::monthly_prr(prr, {2021, 5});
  const auto jun = analytics::monthly_prr(prr, {2021, 6});
  const auto jul = analytics::monthly_prr(prr, {2021, 7});
  const auto aug = analytics::monthly_prr(prr, {2021, 8});
  const auto jan = analytics::monthly_prr(prr, {2022, 1});
  const auto* site = s.find_site("GN13");

  int far = 0;
  int ok = 0;
  double worst_margin = 1e9;
  for (std::size_t n = 0; n < s.nodes.size(); ++n) {
    if (distance(s.nodes[n].position, site->gateway_position) <= 200.0) continue;
    ++far;
    const double summer = (jun[n].value() + jul[n].value() + aug[n].value()) / 3.0;
    const double margin = std::min(may[n].value() - summer, may[n].value() - jan[n].value());
    worst_margin = std::min(worst_margin, margin);
    if (summer < may[n].value() && jan[n].value() < may[n].value()) ++ok;
  }
  return {far > 0 && ok == far,
          fmt("%d/%d nodes beyond 200 m have summer and January below May (smallest gap %.2f points)", ok, far,
              worst_margin)};
}

Verdict transect_offsets() {
  auto s = scenario::load_scenario_file(fixture("gn13.json"));
  for (auto& site : s.sites) site.climate.noise_sigma_c = 0.0;
  s.link_params.noise_sigma_db = 0.0;
  s.link_params.foliage_peak_db = 0.0;
  s.link_params.snow_peak_db = 0.0;
  const auto r = sim::run(s);
  const auto report = analytics::transect_aggregates(r.store);
  std::map<std::string, double> mean;
  for (const auto& t : report.annual) mean[t.transect] = t.mean_c;
  const double a = mean.at("A");
  const double b = mean.at("B") - a, c = mean.at("C") - a, d = mean.at("D") - a, e = mean.at("E") - a,
               f = mean.at("F") - a;
  const bool ok = near(b, 1.0, kTransectTol) && near(c, 3.0, kTransectTol) && near(d, 5.0, kTransectTol) &&
                  near(f, 10.0, kTransectTol) && a < a + b && b < c && c < d && d < f;
  return {ok, fmt("offsets from A (%.3f C): B %+.4f C %+.4f D %+.4f E %+.4f F %+.4f", a, b, c, d, e, f)};
}

Verdict determinism(const DeploymentRun& first, const DeploymentRun& second) {
  const bool same = first.csv == second.csv && first.result.trace == second.result.trace &&
                    first.result.input == second.result.input;
  const bool fast = first.seconds < kWallClockLimitS && second.seconds < kWallClockLimitS;
  return {same && fast, fmt("exports %s (%zu bytes, %zu rows, digest %016llx); wall clock %.1f s and %.1f s",
                            same ? "identical" : "DIFFER", first.csv.size(), first.result.store.size(),
                            static_cast<unsigned long long>(first.result.trace.digest), first.seconds,
                            second.seconds)};
}

alp::AlpFrame random_frame(std::mt19937_64& rng) {
  alp::AlpFrame f;
  f.origin = NodeId(rng());
  f.counter = static_cast<std::uint16_t>(rng());
  f.op = static_cast<alp::Op>(rng() % 3);
  f.file = alp::FileId{static_cast<std::uint8_t>(rng())};
  f.offset = static_cast<std::uint16_t>(rng());
  if (f.op != alp::Op::ReadFileRequest) {
    f.payload.resize(rng() % (alp::kMaxPayload + 1));
    for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng());
  }
  f.length = static_cast<std::uint16_t>(f.payload.size());
  return f;
}

Verdict codec() {
  std::mt19937_64 rng(11);
  int roundtrip_failures = 0;
  for (int i = 0; i < kCodecFrames; ++i) {
    const auto f = random_frame(rng);
    const auto bytes = alp::encode_frame(f);
    if (bytes.size() > alp::kMaxFrameSize || alp::decode_frame(bytes) != f) ++roundtrip_failures;
  }

  int accepted = 0, structured = 0, unstructured = 0, reencode_failures = 0;
  for (int i = 0; i < kFuzzInputs; ++i) {
    Bytes input;
    if (i % 2 == 0) {
      input.resize(rng() % 300);
      for (auto& b : input) b = static_cast<std::uint8_t>(rng());
    } else {
      input = alp::encode_frame(random_frame(rng));
      const int edits = 1 + static_cast<int>(rng() % 4);
      for (int k = 0; k < edits; ++k) {
        switch (rng() % 3) {
          case 0: input[rng() % input.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8)); break;
          case 1: input.resize(rng() % (input.size() + 1)); break;
          default: input.push_back(static_cast<std::uint8_t>(rng())); break;
        }
        if (input.empty()) break;
      }
    }
    try {
      const auto f = alp::decode_frame(input);
      ++accepted;
      if (alp::encode_frame(f) != input) ++reencode_failures;
    } catch (const alp::Error&) {
      ++structured;
    } catch (...) {
      ++unstructured;
    }
  }
  return {roundtrip_failures == 0 && unstructured == 0 && reencode_failures == 0,
          fmt("%d roundtrips, %d failures; fuzz %d inputs: %d structured errors, %d accepted (%d re-encode "
              "mismatches), %d other failures",
              kCodecFrames, roundtrip_failures, kFuzzInputs, structured, accepted, reencode_failures, unstructured)};
}

struct TrainStats {
  int issued = 0;
  int answered = 0;
};

// Queries issued at seeded random instants, spaced so that trains and replies never overlap.
TrainStats query_burst(scenario::Scenario s, double train_s, int count, std::uint64_t seed) {
  s.gateways[0].train_duration_s = train_s;
  s.end = s.start + kSecondsPerDay;
  sim::Simulation sim(s);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<SimTime> gap(2'500, 7'500);
  std::vector<std::uint64_t> ids;
  SimTime t = 1'000;
  for (int i = 0; i < count; ++i) {
    t += gap(rng);
    sim.run_until(t);
    ids.push_back(sim.query_node(s.nodes[0].id, i % 2 ? alp::kSensorDataFile : alp::kConfigFile));
  }
  sim.run_until(t + sim.backend().timeout() + 10 * kMsPerSecond);
  TrainStats st;
  st.issued = count;
  for (const auto id : ids)
    if (sim.request(id).state == backend::RequestState::Answered) ++st.answered;
  return st;
}

Verdict reachability() {
  const auto s = lossless_minimal();
  const double period_s = s.energy_budget.sniff_period_s;
  const auto full = query_burst(s, s.gateways[0].train_duration_s, kQueries, 100);

  const double half_s = period_s / 2.0;
  const auto half = query_burst(s, half_s, kTrainTrials, 200);
  const double train_ms = std::round(half_s * 1000.0);
  const double analytic = train_ms / (period_s * 1000.0);
  const double rate = static_cast<double>(half.answered) / half.issued;
  const bool ok = s.gateways[0].train_duration_s >= period_s && full.answered == kQueries &&
                  near(rate, analytic, kTrainRateTol);
  return {ok, fmt("train %.4f s >= period %.4f s: %d/%d answered; half-period train: %d/%d = %.4f vs %.4f",
                  s.gateways[0].train_duration_s, period_s, full.answered, full.issued, half.answered, half.issued,
                  rate, analytic)};
}

}  // namespace

int main() {
  report(1, "energy budget", energy_budget);
  report(2, "battery lifetime", lifetime);
  report(3, "gateway backup", gateway_backup);
  report(4, "deployment census", census);
  report(5, "packet cadence", cadence);
  report(6, "PRR oracle equivalence", prr_oracle);

  DeploymentRun first, second;
  bool ran = true;
  std::string failure;
  try {
    first = run_deployment();
    second = run_deployment();
  } catch (const std::exception& e) {
    ran = false;
    failure = e.what();
  }
  report(7, "outage reproduction", [&]() -> Verdict {
    if (!ran) return {false, "deployment run failed: " + failure};
    return outages(first.result);
  });
  report(8, "seasonal PRR shape", seasonal);
  report(9, "transect warming offsets", transect_offsets);
  report(10, "determinism", [&]() -> Verdict {
    if (!ran) return {false, "deployment run failed: " + failure};
    return determinism(first, second);
  });
  report(11, "codec robustness", codec);
  report(12, "downlink reachability", reachability);

  std::printf("%d/12 criteria passed\n", 12 - failures);
  return failures == 0 ? 0 : 1;
}

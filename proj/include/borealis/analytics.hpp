#pragma once

// Derived results over a finished run: packet reception ratios, the daily
// energy budget, battery lifetime with capacity derating, and per-transect
// soil temperature aggregates. All functions are pure.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "borealis/alp.hpp"
#include "borealis/backend.hpp"
#include "borealis/node.hpp"
#include "borealis/types.hpp"

namespace borealis::analytics {

enum class Errc { ZeroExpected, EmptyWindow, NonPositiveCurrent, InvalidInput };
using Error = CodedError<Errc>;

// --- run description ------------------------------------------------------------

struct NodeInfo {
  NodeId id;
  std::string name;
  alp::SensorKind kind = alp::SensorKind::SoilTemp;

  friend bool operator==(const NodeInfo&, const NodeInfo&) = default;
};

/// State of one node at the start of one simulated day.
struct NodeDay {
  bool exists = false;  // deployed by the start of the day
  std::uint16_t site = 0;
  std::uint32_t interval_s = 900;
  std::uint16_t battery_mv = 0;

  friend bool operator==(const NodeDay&, const NodeDay&) = default;
};

/// Everything the reports need besides the measurement store.
struct AnalyticsInput {
  std::int64_t epoch = 0;  // unix seconds of day 0
  std::size_t day_count = 0;
  std::vector<std::string> sites;
  std::vector<NodeInfo> nodes;
  std::vector<std::vector<NodeDay>> days;  // [node][day]
  std::vector<node::EnergyLedger> energy;  // per node, at the end of the run
  node::EnergyBudget budget;

  friend bool operator==(const AnalyticsInput&, const AnalyticsInput&) = default;
};

// --- packet reception ratio -------------------------------------------------------

/// 100 * received / expected, with received clamped to expected.
double daily_prr(std::uint64_t received, std::uint64_t expected);
/// Packets expected in one day at the given interval.
std::uint32_t expected_per_day(std::uint32_t interval_s);

struct PrrCell {
  bool exists = false;
  std::uint32_t received = 0;
  std::uint32_t expected = 0;
  double percent = 0.0;
  bool anomaly = false;  // more received than expected
};

struct PrrReport {
  std::int64_t epoch = 0;
  std::vector<NodeInfo> nodes;
  std::vector<std::string> sites;
  std::vector<std::vector<PrrCell>> daily;       // [node][day]
  std::vector<std::vector<std::uint16_t>> site;  // [node][day] site index
  std::vector<std::optional<double>> overall;    // per node, over existing days

  std::size_t day_count() const { return daily.empty() ? 0 : daily.front().size(); }
};

PrrReport prr_report(const AnalyticsInput& input, const backend::TimeSeriesStore& store);

struct Month {
  int year = 0;
  unsigned month = 1;
  friend auto operator<=>(const Month&, const Month&) = default;
};

/// Calendar months touched by the report window, in order.
std::vector<Month> months(const PrrReport& report);

/// Per-node mean daily PRR over the days of `month` on which the node existed.
/// Throws Error{EmptyWindow} if the month lies outside the report.
std::vector<std::optional<double>> monthly_prr(const PrrReport& report, Month month);

/// Mean PRR over the nodes assigned to `site` on each day (empty when none).
std::vector<std::optional<double>> site_daily_prr(const PrrReport& report, std::string_view site);
std::optional<double> site_monthly_prr(const PrrReport& report, std::string_view site, Month month);

// --- energy and lifetime ------------------------------------------------------------

struct EnergyBreakdown {
  double sleep_j = 0.0;
  double sniff_j = 0.0;
  double sample_j = 0.0;
  double total_j = 0.0;
  std::uint64_t sniffs = 0;
  std::uint64_t samples = 0;
};

EnergyBreakdown daily_energy(const node::EnergyBudget& budget);

struct BatteryModel {
  double rated_ah = 19.0;  // at the reference point
  double reference_current_a = 0.020;
  double reference_temp_c = 20.0;
  double low_current_a = 0.002;
  double low_current_ah = 11.0;
  double temp_slope_per_c = 0.005;
  double min_temp_factor = 0.4;
  double nominal_v = 3.6;
};

double current_factor(const BatteryModel& model, double avg_current_a);
double temperature_factor(const BatteryModel& model, double mean_temp_c);
double derated_capacity(const BatteryModel& model, double avg_current_a, double mean_temp_c);

/// Mean current drawn by a node running `budget`.
double average_current_a(const node::EnergyBudget& budget, double nominal_v);

/// Years until the rated capacity is spent, without derating.
double ideal_lifetime_years(const node::EnergyBudget& budget, const BatteryModel& model);
double lifetime_projection(const node::EnergyBudget& budget, const BatteryModel& model, double mean_temp_c);

// --- soil temperature ---------------------------------------------------------------

struct NodeDayMean {
  NodeId node;
  std::string site;
  std::string transect;
  std::int64_t day = 0;  // unix seconds of the day start
  double mean_c = 0.0;
  std::uint32_t count = 0;
};

struct TransectMean {
  std::string site;
  std::string transect;
  double mean_c = 0.0;
  std::uint32_t node_days = 0;
  std::uint64_t samples = 0;
};

struct TransectReport {
  std::vector<NodeDayMean> daily;       // ordered by (node, day)
  std::vector<TransectMean> annual;     // ordered by (site, transect)
};

/// Soil temperature daily means and per-(site, transect) means of the daily
/// means, restricted to sampled_at in [from, to) when given.
TransectReport transect_aggregates(const backend::TimeSeriesStore& store, std::optional<std::int64_t> from = {},
                                   std::optional<std::int64_t> to = {});
TransectReport transect_aggregates(const std::vector<backend::Measurement>& rows,
                                   std::optional<std::int64_t> from = {}, std::optional<std::int64_t> to = {});

}  // namespace borealis::analytics

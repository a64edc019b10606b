#include "borealis/analytics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <tuple>

namespace borealis::analytics {
namespace {

Month month_of(std::int64_t unix_seconds) {
  using namespace std::chrono;
  const std::int64_t day = unix_seconds >= 0 ? unix_seconds / kSecondsPerDay
                                             : -((-unix_seconds + kSecondsPerDay - 1) / kSecondsPerDay);
  const year_month_day ymd{sys_days{days{day}}};
  return Month{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month())};
}

bool counted(const PrrCell& c) { return c.exists && c.expected > 0; }

std::int64_t day_start(std::int64_t unix_seconds) {
  std::int64_t d = unix_seconds / kSecondsPerDay;
  if (unix_seconds % kSecondsPerDay < 0) --d;
  return d * kSecondsPerDay;
}

struct Accumulator {
  std::int64_t sum = 0;
  std::uint32_t count = 0;
};

using PlaceKey = std::tuple<std::uint64_t, std::int64_t, std::string, std::string>;  // node, day, site, transect

TransectReport finish(const std::map<PlaceKey, Accumulator>& cells) {
  if (cells.empty()) throw Error(Errc::EmptyWindow, "no soil temperature samples in the window");
  TransectReport out;
  struct Annual {
    double sum_of_means = 0.0;
    std::uint32_t node_days = 0;
    std::uint64_t samples = 0;
  };
  std::map<std::pair<std::string, std::string>, Annual> annual;
  for (const auto& [key, acc] : cells) {
    const auto& [node, day, site, transect] = key;
    const double mean = static_cast<double>(acc.sum) / acc.count / 100.0;
    out.daily.push_back(NodeDayMean{NodeId(node), site, transect, day, mean, acc.count});
    auto& a = annual[{site, transect}];
    a.sum_of_means += mean;
    ++a.node_days;
    a.samples += acc.count;
  }
  for (const auto& [key, a] : annual)
    out.annual.push_back(TransectMean{key.first, key.second, a.sum_of_means / a.node_days, a.node_days, a.samples});
  return out;
}

bool in_window(std::int64_t t, std::optional<std::int64_t> from, std::optional<std::int64_t> to) {
  return (!from || t >= *from) && (!to || t < *to);
}

}  // namespace

double daily_prr(std::uint64_t received, std::uint64_t expected) {
  if (expected == 0) throw Error(Errc::ZeroExpected, "expected packet count is zero");
  return 100.0 * static_cast<double>(std::min(received, expected)) / static_cast<double>(expected);
}

std::uint32_t expected_per_day(std::uint32_t interval_s) {
  return interval_s == 0 ? 0 : static_cast<std::uint32_t>(kSecondsPerDay / interval_s);
}

PrrReport prr_report(const AnalyticsInput& input, const backend::TimeSeriesStore& store) {
  if (input.days.size() != input.nodes.size()) throw Error(Errc::InvalidInput, "node/day table size mismatch");
  PrrReport r;
  r.epoch = input.epoch;
  r.nodes = input.nodes;
  r.sites = input.sites;
  r.daily.resize(input.nodes.size());
  r.site.resize(input.nodes.size());
  r.overall.resize(input.nodes.size());
  for (std::size_t n = 0; n < input.nodes.size(); ++n) {
    const auto& days = input.days[n];
    if (days.size() != input.day_count) throw Error(Errc::InvalidInput, "node/day table size mismatch");
    auto& row = r.daily[n];
    row.resize(days.size());
    r.site[n].resize(days.size());
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t d = 0; d < days.size(); ++d) {
      const std::int64_t from = input.epoch + static_cast<std::int64_t>(d) * kSecondsPerDay;
      PrrCell& c = row[d];
      c.exists = days[d].exists;
      c.expected = expected_per_day(days[d].interval_s);
      c.received = static_cast<std::uint32_t>(store.count(input.nodes[n].id, from, from + kSecondsPerDay));
      r.site[n][d] = days[d].site;
      if (!counted(c)) continue;
      c.anomaly = c.received > c.expected;
      c.percent = daily_prr(c.received, c.expected);
      sum += c.percent;
      ++used;
    }
    if (used > 0) r.overall[n] = sum / static_cast<double>(used);
  }
  return r;
}

std::vector<Month> months(const PrrReport& report) {
  std::vector<Month> out;
  for (std::size_t d = 0; d < report.day_count(); ++d) {
    const Month m = month_of(report.epoch + static_cast<std::int64_t>(d) * kSecondsPerDay);
    if (out.empty() || out.back() != m) out.push_back(m);
  }
  return out;
}

std::vector<std::optional<double>> monthly_prr(const PrrReport& report, Month month) {
  std::vector<double> sum(report.nodes.size(), 0.0);
  std::vector<std::size_t> used(report.nodes.size(), 0);
  bool any_day = false;
  for (std::size_t d = 0; d < report.day_count(); ++d) {
    if (month_of(report.epoch + static_cast<std::int64_t>(d) * kSecondsPerDay) != month) continue;
    any_day = true;
    for (std::size_t n = 0; n < report.nodes.size(); ++n) {
      const PrrCell& c = report.daily[n][d];
      if (!counted(c)) continue;
      sum[n] += c.percent;
      ++used[n];
    }
  }
  if (!any_day)
    throw Error(Errc::EmptyWindow, "month " + std::to_string(month.year) + "-" + std::to_string(month.month) +
                                       " is outside the report window");
  std::vector<std::optional<double>> out(report.nodes.size());
  for (std::size_t n = 0; n < out.size(); ++n)
    if (used[n] > 0) out[n] = sum[n] / static_cast<double>(used[n]);
  return out;
}

std::vector<std::optional<double>> site_daily_prr(const PrrReport& report, std::string_view site) {
  const auto it = std::find(report.sites.begin(), report.sites.end(), site);
  std::vector<std::optional<double>> out(report.day_count());
  if (it == report.sites.end()) return out;
  const auto index = static_cast<std::uint16_t>(it - report.sites.begin());
  for (std::size_t d = 0; d < out.size(); ++d) {
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t n = 0; n < report.nodes.size(); ++n) {
      const PrrCell& c = report.daily[n][d];
      if (!counted(c) || report.site[n][d] != index) continue;
      sum += c.percent;
      ++used;
    }
    if (used > 0) out[d] = sum / static_cast<double>(used);
  }
  return out;
}

std::optional<double> site_monthly_prr(const PrrReport& report, std::string_view site, Month month) {
  const auto daily = site_daily_prr(report, site);
  double sum = 0.0;
  std::size_t used = 0;
  bool any_day = false;
  for (std::size_t d = 0; d < daily.size(); ++d) {
    if (month_of(report.epoch + static_cast<std::int64_t>(d) * kSecondsPerDay) != month) continue;
    any_day = true;
    if (!daily[d]) continue;
    sum += *daily[d];
    ++used;
  }
  if (!any_day) throw Error(Errc::EmptyWindow, "month outside the report window");
  if (used == 0) return std::nullopt;
  return sum / static_cast<double>(used);
}

EnergyBreakdown daily_energy(const node::EnergyBudget& budget) {
  node::validate(budget);
  const double day = static_cast<double>(kSecondsPerDay);
  EnergyBreakdown e;
  e.samples = static_cast<std::uint64_t>(std::floor(day / budget.sample_period_s));
  e.sniffs = static_cast<std::uint64_t>(std::floor(day / budget.sniff_period_s));
  e.sample_j = budget.sample_energy_j * static_cast<double>(e.samples);
  e.sniff_j = budget.sniff_energy_j * static_cast<double>(e.sniffs);
  e.sleep_j = budget.sleep_power_w * day;
  e.total_j = e.sleep_j + e.sniff_j + e.sample_j;
  return e;
}

double current_factor(const BatteryModel& model, double avg_current_a) {
  if (!(avg_current_a > 0.0)) throw Error(Errc::NonPositiveCurrent, "average current must be positive");
  const double low = model.low_current_ah / model.rated_ah;
  if (avg_current_a <= model.low_current_a) return low;
  if (avg_current_a >= model.reference_current_a) return 1.0;
  const double t = std::log(avg_current_a / model.low_current_a) /
                   std::log(model.reference_current_a / model.low_current_a);
  return low + (1.0 - low) * t;
}

double temperature_factor(const BatteryModel& model, double mean_temp_c) {
  const double f = 1.0 - model.temp_slope_per_c * std::max(0.0, model.reference_temp_c - mean_temp_c);
  return std::max(f, model.min_temp_factor);
}

double derated_capacity(const BatteryModel& model, double avg_current_a, double mean_temp_c) {
  return model.rated_ah * current_factor(model, avg_current_a) * temperature_factor(model, mean_temp_c);
}

double average_current_a(const node::EnergyBudget& budget, double nominal_v) {
  return daily_energy(budget).total_j / static_cast<double>(kSecondsPerDay) / nominal_v;
}

namespace {
double years_for(double capacity_ah, const node::EnergyBudget& budget, double nominal_v) {
  return capacity_ah * 3600.0 * nominal_v / daily_energy(budget).total_j / 365.25;
}
}  // namespace

double ideal_lifetime_years(const node::EnergyBudget& budget, const BatteryModel& model) {
  return years_for(model.rated_ah, budget, model.nominal_v);
}

double lifetime_projection(const node::EnergyBudget& budget, const BatteryModel& model, double mean_temp_c) {
  const double ah = derated_capacity(model, average_current_a(budget, model.nominal_v), mean_temp_c);
  return years_for(ah, budget, model.nominal_v);
}

TransectReport transect_aggregates(const backend::TimeSeriesStore& store, std::optional<std::int64_t> from,
                                   std::optional<std::int64_t> to) {
  std::map<PlaceKey, Accumulator> cells;
  for (const NodeId node : store.nodes())
    for (const auto& m : store.measurements(node)) {
      if (m.kind != alp::SensorKind::SoilTemp || m.transect.empty() || !in_window(m.sampled_at, from, to)) continue;
      auto& acc = cells[{node.value(), day_start(m.sampled_at), m.site, m.transect}];
      acc.sum += m.value_scaled;
      ++acc.count;
    }
  return finish(cells);
}

TransectReport transect_aggregates(const std::vector<backend::Measurement>& rows, std::optional<std::int64_t> from,
                                   std::optional<std::int64_t> to) {
  std::map<PlaceKey, Accumulator> cells;
  for (const auto& m : rows) {
    if (m.kind != alp::SensorKind::SoilTemp || m.transect.empty() || !in_window(m.sampled_at, from, to)) continue;
    auto& acc = cells[{m.node.value(), day_start(m.sampled_at), m.site, m.transect}];
    acc.sum += m.value_scaled;
    ++acc.count;
  }
  return finish(cells);
}

}  // namespace borealis::analytics

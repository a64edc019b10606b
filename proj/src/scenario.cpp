#include "borealis/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "borealis/rng.hpp"
#include "json.hpp"

namespace borealis::scenario {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& message) {
  throw ScenarioError(Errc::ValidationError, path, message);
}

int parse_digits(std::string_view s, std::size_t at, std::size_t n, bool& ok) {
  int v = 0;
  for (std::size_t i = at; i < at + n; ++i) {
    if (i >= s.size() || s[i] < '0' || s[i] > '9') {
      ok = false;
      return 0;
    }
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

// Strict reader over one JSON object: tracks consumed keys so unknown fields
// can be reported with their full path.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_, "expected an object");
  }

  std::string at(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

  bool has(const char* key) {
    used_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const char* key) {
    if (!has(key)) invalid(at(key), "missing required field");
    return j_.at(key);
  }

  double number(const char* key, double def) { return has(key) ? number(key) : def; }
  double number(const char* key) {
    const json& v = raw(key);
    if (!v.is_number()) invalid(at(key), "expected a number");
    return v.get<double>();
  }

  std::uint64_t unsigned_int(const char* key) {
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      invalid(at(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t unsigned_int(const char* key, std::uint64_t def) { return has(key) ? unsigned_int(key) : def; }

  bool boolean(const char* key, bool def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) invalid(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const char* key) {
    const json& v = raw(key);
    if (!v.is_string()) invalid(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const char* key, std::string def) { return has(key) ? string(key) : def; }

  std::int64_t time(const char* key) {
    const std::string text = string(key);
    try {
      return parse_time(text);
    } catch (const ScenarioError& e) {
      invalid(at(key), e.what());
    }
  }
  std::int64_t time(const char* key, std::int64_t def) { return has(key) ? time(key) : def; }

  Position position(const char* key) {
    const json& v = raw(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      invalid(at(key), "expected [x, y] in metres");
    return Position{v[0].get<double>(), v[1].get<double>()};
  }

  const json& array(const char* key) {
    const json& v = raw(key);
    if (!v.is_array()) invalid(at(key), "expected an array");
    return v;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.contains(key)) invalid(at(key), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

json pos_json(Position p) { return json::array({p.x, p.y}); }

bool valid_label(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

Position synthesize(std::uint64_t seed, NodeId id, std::string_view purpose, const environment::SiteLayout& site) {
  Rng rng = Rng::substream(seed, id.value(), purpose);
  const double radius = 0.5 * site.max_span_m * std::sqrt(rng.uniform());
  const double angle = 2.0 * std::numbers::pi * rng.uniform();
  return Position{site.node_area_center.x + radius * std::cos(angle),
                  site.node_area_center.y + radius * std::sin(angle)};
}

node::EnergyBudget read_budget(Obj o) {
  node::EnergyBudget b;
  b.sample_energy_j = o.number("sample_energy_j", b.sample_energy_j);
  b.sniff_energy_j = o.number("sniff_energy_j", b.sniff_energy_j);
  b.sniff_period_s = o.number("sniff_period_s", b.sniff_period_s);
  b.sleep_power_w = o.number("sleep_power_w", b.sleep_power_w);
  b.sample_period_s = o.number("sample_period_s", b.sample_period_s);
  b.receive_window_s = o.number("receive_window_s", b.receive_window_s);
  o.finish();
  return b;
}

environment::Climate read_climate(Obj o) {
  environment::Climate c;
  c.baseline_mean_c = o.number("baseline_mean_c", c.baseline_mean_c);
  c.baseline_amplitude_c = o.number("baseline_amplitude_c", c.baseline_amplitude_c);
  c.warmest_day_of_year = o.number("warmest_day_of_year", c.warmest_day_of_year);
  c.diurnal_amplitude_c = o.number("diurnal_amplitude_c", c.diurnal_amplitude_c);
  c.diurnal_peak_hour = o.number("diurnal_peak_hour", c.diurnal_peak_hour);
  c.noise_sigma_c = o.number("noise_sigma_c", c.noise_sigma_c);
  if (o.has("transect_offsets_c")) {
    Obj offsets(o.raw("transect_offsets_c"), o.at("transect_offsets_c"));
    for (std::size_t i = 0; i < environment::kTransects.size(); ++i) {
      const char key[2] = {environment::kTransects[i], '\0'};
      c.transect_offsets_c[i] = offsets.number(key, c.transect_offsets_c[i]);
    }
    offsets.finish();
  }
  c.air_mean_c = o.number("air_mean_c", c.air_mean_c);
  c.air_amplitude_c = o.number("air_amplitude_c", c.air_amplitude_c);
  c.air_diurnal_c = o.number("air_diurnal_c", c.air_diurnal_c);
  c.water_mean_pct = o.number("water_mean_pct", c.water_mean_pct);
  c.water_amplitude_pct = o.number("water_amplitude_pct", c.water_amplitude_pct);
  o.finish();
  return c;
}

json climate_json(const environment::Climate& c) {
  json offsets = json::object();
  for (std::size_t i = 0; i < environment::kTransects.size(); ++i)
    offsets[std::string(1, environment::kTransects[i])] = c.transect_offsets_c[i];
  return json{{"baseline_mean_c", c.baseline_mean_c},
              {"baseline_amplitude_c", c.baseline_amplitude_c},
              {"warmest_day_of_year", c.warmest_day_of_year},
              {"diurnal_amplitude_c", c.diurnal_amplitude_c},
              {"diurnal_peak_hour", c.diurnal_peak_hour},
              {"noise_sigma_c", c.noise_sigma_c},
              {"transect_offsets_c", offsets},
              {"air_mean_c", c.air_mean_c},
              {"air_amplitude_c", c.air_amplitude_c},
              {"air_diurnal_c", c.air_diurnal_c},
              {"water_mean_pct", c.water_mean_pct},
              {"water_amplitude_pct", c.water_amplitude_pct}};
}

std::optional<FaultKind> fault_kind_from_string(std::string_view s) {
  for (auto k : {FaultKind::AntennaDetach, FaultKind::PowerStationFailure, FaultKind::BatteryReplace,
                 FaultKind::NodeRelocation, FaultKind::SnowBurial})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

void check_fault_target(const Scenario& s, const FaultSpec& f, const std::string& path) {
  const bool is_node = s.find_node(f.target) != nullptr;
  const bool is_gateway = s.find_gateway(f.target) != nullptr;
  const bool is_site = s.find_site(f.target) != nullptr;
  bool ok = false;
  switch (f.kind) {
    case FaultKind::AntennaDetach:
    case FaultKind::PowerStationFailure: ok = is_gateway; break;
    case FaultKind::BatteryReplace: ok = is_node || is_gateway; break;
    case FaultKind::NodeRelocation: ok = is_node; break;
    case FaultKind::SnowBurial: ok = is_node || is_site; break;
  }
  if (!ok)
    throw ScenarioError(Errc::UnknownTarget, path + ".target",
                        "no suitable target '" + f.target + "' for " + std::string(to_string(f.kind)));
}

}  // namespace

std::int64_t parse_time(std::string_view text) {
  bool ok = text.size() == 10 || text.size() == 20;
  const int y = parse_digits(text, 0, 4, ok);
  const int mo = parse_digits(text, 5, 2, ok);
  const int d = parse_digits(text, 8, 2, ok);
  int hh = 0, mm = 0, ss = 0;
  if (ok && (text[4] != '-' || text[7] != '-')) ok = false;
  if (ok && text.size() == 20) {
    hh = parse_digits(text, 11, 2, ok);
    mm = parse_digits(text, 14, 2, ok);
    ss = parse_digits(text, 17, 2, ok);
    ok = ok && text[10] == 'T' && text[13] == ':' && text[16] == ':' && text[19] == 'Z' && hh < 24 && mm < 60 &&
         ss < 60;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ok || !ymd.ok())
    throw ScenarioError(Errc::ParseError, "", "bad date '" + std::string(text) + "' (want YYYY-MM-DD[THH:MM:SSZ])");
  return sys_days{ymd}.time_since_epoch().count() * kSecondsPerDay + hh * 3600 + mm * 60 + ss;
}

std::string format_time(std::int64_t unix_seconds) {
  using namespace std::chrono;
  std::int64_t days = unix_seconds / kSecondsPerDay;
  std::int64_t rem = unix_seconds % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  if (rem == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                  static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
  }
  return buf;
}

std::string_view to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::AntennaDetach: return "AntennaDetach";
    case FaultKind::PowerStationFailure: return "PowerStationFailure";
    case FaultKind::BatteryReplace: return "BatteryReplace";
    case FaultKind::NodeRelocation: return "NodeRelocation";
    case FaultKind::SnowBurial: return "SnowBurial";
  }
  return "Unknown";
}

const environment::SiteLayout* Scenario::find_site(std::string_view id) const {
  for (const auto& s : sites)
    if (s.id == id) return &s;
  return nullptr;
}

const NodeSpec* Scenario::find_node(std::string_view n) const {
  for (const auto& s : nodes)
    if (s.name == n) return &s;
  return nullptr;
}

const NodeSpec* Scenario::find_node(NodeId id) const {
  for (const auto& s : nodes)
    if (s.id == id) return &s;
  return nullptr;
}

const GatewaySpec* Scenario::find_gateway(std::string_view n) const {
  for (const auto& g : gateways)
    if (g.name == n) return &g;
  return nullptr;
}

const GatewaySpec* Scenario::gateway_for_site(std::string_view site) const {
  for (const auto& g : gateways)
    if (g.site == site) return &g;
  return nullptr;
}

Scenario load_scenario(std::string_view json_text, std::string name) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(Errc::ParseError, "", e.what());
  }

  Scenario s;
  s.name = std::move(name);
  Obj top(root, "");
  s.seed = top.unsigned_int("seed");
  s.start = top.time("start");
  s.end = top.time("end");
  if (top.has("energy_budget")) s.energy_budget = read_budget(Obj(top.raw("energy_budget"), "energy_budget"));

  if (top.has("link_params")) {
    Obj o(top.raw("link_params"), "link_params");
    auto& p = s.link_params;
    p.tx_power_dbm = o.number("tx_power_dbm", p.tx_power_dbm);
    p.reference_loss_db = o.number("reference_loss_db", p.reference_loss_db);
    p.path_loss_exponent = o.number("path_loss_exponent", p.path_loss_exponent);
    p.rssi_floor_dbm = o.number("rssi_floor_dbm", p.rssi_floor_dbm);
    p.noise_sigma_db = o.number("noise_sigma_db", p.noise_sigma_db);
    p.foliage_peak_db = o.number("foliage_peak_db", p.foliage_peak_db);
    p.snow_peak_db = o.number("snow_peak_db", p.snow_peak_db);
    s.downlink_timeout_s = o.number("downlink_timeout_s", s.downlink_timeout_s);
    o.finish();
  }

  const json& sites = top.array("sites");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    Obj o(sites[i], "sites[" + std::to_string(i) + "]");
    environment::SiteLayout site;
    site.id = o.string("id");
    for (std::size_t k = 0; const auto& plot : o.array("plots")) {
      if (!plot.is_string()) invalid(o.at("plots") + "[" + std::to_string(k) + "]", "expected a string");
      site.plots.push_back(plot.get<std::string>());
      ++k;
    }
    site.gateway_position = o.has("gateway_position") ? o.position("gateway_position") : Position{};
    site.node_area_center = o.has("node_area_center") ? o.position("node_area_center") : site.gateway_position;
    site.max_span_m = o.number("max_span_m", site.max_span_m);
    site.foliage_blockage = o.boolean("foliage_blockage", false);
    site.snow_scale = o.number("snow_scale", 1.0);
    if (o.has("climate")) site.climate = read_climate(Obj(o.raw("climate"), o.at("climate")));
    o.finish();
    s.sites.push_back(std::move(site));
  }

  if (top.has("nodes")) {
    const json& nodes = top.array("nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const std::string path = "nodes[" + std::to_string(i) + "]";
      Obj o(nodes[i], path);
      NodeSpec n;
      n.id = NodeId(o.unsigned_int("id"));
      n.name = o.string("name");
      n.site = o.string("site");
      n.plot = o.string("plot", "");
      n.transect = o.string("transect", "");
      const std::string kind = o.string("kind", "SoilTemp");
      const auto k = alp::sensor_kind_from_string(kind);
      if (!k) invalid(o.at("kind"), "unknown sensor kind '" + kind + "'");
      n.kind = *k;
      n.battery_ah = o.number("battery_ah", n.battery_ah);
      n.battery_v = o.number("battery_v", n.battery_v);
      n.deployed_at = o.time("deployed_at", s.start);
      n.sampling_interval_s = static_cast<std::uint32_t>(
          o.unsigned_int("sampling_interval_s", static_cast<std::uint64_t>(std::llround(s.energy_budget.sample_period_s))));
      n.resolution_bits = static_cast<std::uint8_t>(o.unsigned_int("resolution_bits", 12));
      const environment::SiteLayout* site = s.find_site(n.site);
      if (!site) invalid(o.at("site"), "unknown site '" + n.site + "'");
      n.position = o.has("position") ? o.position("position") : synthesize(s.seed, n.id, "position", *site);
      o.finish();
      s.nodes.push_back(std::move(n));
    }
  }

  if (top.has("gateways")) {
    const json& gws = top.array("gateways");
    for (std::size_t i = 0; i < gws.size(); ++i) {
      Obj o(gws[i], "gateways[" + std::to_string(i) + "]");
      GatewaySpec g;
      g.id = NodeId(o.unsigned_int("id"));
      g.name = o.string("name");
      g.site = o.string("site");
      g.antenna_attached = o.boolean("antenna_attached", true);
      g.train_duration_s = o.number("train_duration_s", s.energy_budget.sniff_period_s + 0.1);
      g.deployed_at = o.time("deployed_at", s.start);
      if (o.has("power")) {
        Obj p(o.raw("power"), o.at("power"));
        auto& ps = g.power;
        ps.capacity_ah = p.number("capacity_ah", ps.capacity_ah);
        ps.charge_ah = p.number("charge_ah", ps.capacity_ah);
        ps.load_ma = p.number("load_ma", ps.load_ma);
        ps.system_v = p.number("system_v", ps.system_v);
        ps.panel_w = p.number("panel_w", ps.panel_w);
        if (p.has("solar")) {
          Obj so(p.raw("solar"), p.at("solar"));
          ps.solar.min_fraction = so.number("min_fraction", ps.solar.min_fraction);
          ps.solar.max_fraction = so.number("max_fraction", ps.solar.max_fraction);
          so.finish();
        }
        ps.battery_damaged = p.boolean("battery_damaged", false);
        p.finish();
      }
      o.finish();
      s.gateways.push_back(std::move(g));
    }
  }

  if (top.has("faults")) {
    const json& faults = top.array("faults");
    for (std::size_t i = 0; i < faults.size(); ++i) {
      Obj o(faults[i], "faults[" + std::to_string(i) + "]");
      FaultSpec f;
      const std::string kind = o.string("kind");
      const auto k = fault_kind_from_string(kind);
      if (!k) invalid(o.at("kind"), "unknown fault kind '" + kind + "'");
      f.kind = *k;
      f.target = o.string("target");
      f.start = o.time("start");
      if (o.has("end")) f.end = o.time("end");
      f.to_site = o.string("to_site", "");
      f.to_plot = o.string("to_plot", "");
      if (o.has("to_position")) f.to_position = o.position("to_position");
      f.attenuation_db = o.number("attenuation_db", f.kind == FaultKind::SnowBurial ? s.link_params.snow_peak_db : 0.0);
      o.finish();
      if (f.kind == FaultKind::NodeRelocation && !f.to_position) {
        const auto* node = s.find_node(f.target);
        const auto* dest = s.find_site(f.to_site);
        if (node && dest) f.to_position = synthesize(s.seed, node->id, "relocation", *dest);
      }
      s.faults.push_back(std::move(f));
    }
  }

  if (top.has("live_bridge")) {
    Obj o(top.raw("live_bridge"), "live_bridge");
    s.live_bridge = LiveBridge{o.string("broker")};
    o.finish();
  }
  top.finish();
  validate(s);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(Errc::ParseError, "", "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string stem = path;
  if (const auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (const auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
  return load_scenario(buf.str(), stem);
}

void validate(const Scenario& s) {
  if (s.end <= s.start) invalid("end", "must be after start");
  try {
    node::validate(s.energy_budget);
  } catch (const std::invalid_argument& e) {
    invalid("energy_budget", e.what());
  }
  if (!(s.link_params.noise_sigma_db >= 0.0)) invalid("link_params.noise_sigma_db", "must be non-negative");
  if (!(s.link_params.path_loss_exponent > 0.0)) invalid("link_params.path_loss_exponent", "must be positive");
  if (!(s.link_params.foliage_peak_db >= 0.0)) invalid("link_params.foliage_peak_db", "must be non-negative");
  if (!(s.link_params.snow_peak_db >= 0.0)) invalid("link_params.snow_peak_db", "must be non-negative");
  if (!(s.downlink_timeout_s > 0.0)) invalid("link_params.downlink_timeout_s", "must be positive");

  std::set<std::string> site_ids;
  for (std::size_t i = 0; i < s.sites.size(); ++i) {
    const auto& site = s.sites[i];
    const std::string path = "sites[" + std::to_string(i) + "]";
    if (!valid_label(site.id)) invalid(path + ".id", "site ids use [A-Za-z0-9_-]");
    if (!site_ids.insert(site.id).second) invalid(path + ".id", "duplicate site '" + site.id + "'");
    std::set<std::string> plots;
    for (std::size_t k = 0; k < site.plots.size(); ++k) {
      if (!valid_label(site.plots[k])) invalid(path + ".plots[" + std::to_string(k) + "]", "plot labels use [A-Za-z0-9_-]");
      if (!plots.insert(site.plots[k]).second)
        invalid(path + ".plots[" + std::to_string(k) + "]", "duplicate plot '" + site.plots[k] + "'");
    }
    if (!(site.max_span_m > 0.0)) invalid(path + ".max_span_m", "must be positive");
    if (!(site.snow_scale >= 0.0)) invalid(path + ".snow_scale", "must be non-negative");
    if (!(site.climate.noise_sigma_c >= 0.0)) invalid(path + ".climate.noise_sigma_c", "must be non-negative");
  }

  std::set<std::uint64_t> ids;
  std::set<std::string> names;
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    const auto& n = s.nodes[i];
    const std::string path = "nodes[" + std::to_string(i) + "]";
    if (!n.id.valid()) invalid(path + ".id", "node id must be nonzero");
    if (!ids.insert(n.id.value()).second) invalid(path + ".id", "duplicate id " + std::to_string(n.id.value()));
    if (!valid_label(n.name)) invalid(path + ".name", "names use [A-Za-z0-9_-]");
    if (!names.insert(n.name).second) invalid(path + ".name", "duplicate name '" + n.name + "'");
    const auto* site = s.find_site(n.site);
    if (!site) invalid(path + ".site", "unknown site '" + n.site + "'");
    if (!n.plot.empty() && !site->has_plot(n.plot)) invalid(path + ".plot", "site " + n.site + " has no plot '" + n.plot + "'");
    if (!n.transect.empty() && (n.transect.size() != 1 || std::find(environment::kTransects.begin(),
                                                                     environment::kTransects.end(),
                                                                     n.transect[0]) == environment::kTransects.end()))
      invalid(path + ".transect", "transect must be one of A..F");
    if (n.kind == alp::SensorKind::SoilTemp && (n.plot.empty() || n.transect.empty()))
      invalid(path + ".transect", "soil temperature nodes need a plot and a transect");
    if (!(n.battery_ah > 0.0)) invalid(path + ".battery_ah", "must be positive");
    if (!(n.battery_v > 0.0)) invalid(path + ".battery_v", "must be positive");
    try {
      alp::validate(alp::NodeConfig{n.kind, n.sampling_interval_s, n.resolution_bits});
    } catch (const alp::Error& e) {
      invalid(path + ".sampling_interval_s", e.what());
    }
    if (n.deployed_at < s.start || n.deployed_at >= s.end) invalid(path + ".deployed_at", "outside [start, end)");
  }

  std::set<std::string> gw_sites;
  for (std::size_t i = 0; i < s.gateways.size(); ++i) {
    const auto& g = s.gateways[i];
    const std::string path = "gateways[" + std::to_string(i) + "]";
    if (!g.id.valid()) invalid(path + ".id", "gateway id must be nonzero");
    if (!ids.insert(g.id.value()).second) invalid(path + ".id", "duplicate id " + std::to_string(g.id.value()));
    if (!valid_label(g.name)) invalid(path + ".name", "names use [A-Za-z0-9_-]");
    if (!names.insert(g.name).second) invalid(path + ".name", "duplicate name '" + g.name + "'");
    if (!s.find_site(g.site)) invalid(path + ".site", "unknown site '" + g.site + "'");
    if (!gw_sites.insert(g.site).second) invalid(path + ".site", "one gateway per site (star network)");
    const auto& p = g.power;
    if (!(p.capacity_ah > 0.0)) invalid(path + ".power.capacity_ah", "must be positive");
    if (p.charge_ah < 0.0 || p.charge_ah > p.capacity_ah) invalid(path + ".power.charge_ah", "outside [0, capacity_ah]");
    if (!(p.load_ma >= 0.0)) invalid(path + ".power.load_ma", "must be non-negative");
    if (!(p.system_v > 0.0)) invalid(path + ".power.system_v", "must be positive");
    if (!(p.panel_w >= 0.0)) invalid(path + ".power.panel_w", "must be non-negative");
    if (!(g.train_duration_s > 0.0)) invalid(path + ".train_duration_s", "must be positive");
    if (g.deployed_at < s.start || g.deployed_at >= s.end) invalid(path + ".deployed_at", "outside [start, end)");
  }

  for (std::size_t i = 0; i < s.faults.size(); ++i) {
    const auto& f = s.faults[i];
    const std::string path = "faults[" + std::to_string(i) + "]";
    if (f.end && *f.end <= f.start) invalid(path + ".end", "must be after start");
    check_fault_target(s, f, path);
    if (f.kind == FaultKind::NodeRelocation) {
      const auto* dest = s.find_site(f.to_site);
      if (!dest) invalid(path + ".to_site", "unknown site '" + f.to_site + "'");
      if (!f.to_plot.empty() && !dest->has_plot(f.to_plot)) invalid(path + ".to_plot", "unknown plot '" + f.to_plot + "'");
      const auto* node = s.find_node(f.target);
      if (f.to_plot.empty() && !node->plot.empty() && !dest->has_plot(node->plot))
        invalid(path + ".to_plot", "site " + f.to_site + " has no plot '" + node->plot + "'; name a destination plot");
    }
    if (f.attenuation_db < 0.0) invalid(path + ".attenuation_db", "must be non-negative");
  }
  if (s.live_bridge && s.live_bridge->broker.empty()) invalid("live_bridge.broker", "must not be empty");
}

std::string to_json(const Scenario& s, int indent) {
  json root;
  root["seed"] = s.seed;
  root["start"] = format_time(s.start);
  root["end"] = format_time(s.end);
  const auto& b = s.energy_budget;
  root["energy_budget"] = {{"sample_energy_j", b.sample_energy_j}, {"sniff_energy_j", b.sniff_energy_j},
                           {"sniff_period_s", b.sniff_period_s},   {"sleep_power_w", b.sleep_power_w},
                           {"sample_period_s", b.sample_period_s}, {"receive_window_s", b.receive_window_s}};
  const auto& p = s.link_params;
  root["link_params"] = {{"tx_power_dbm", p.tx_power_dbm},
                         {"reference_loss_db", p.reference_loss_db},
                         {"path_loss_exponent", p.path_loss_exponent},
                         {"rssi_floor_dbm", p.rssi_floor_dbm},
                         {"noise_sigma_db", p.noise_sigma_db},
                         {"foliage_peak_db", p.foliage_peak_db},
                         {"snow_peak_db", p.snow_peak_db},
                         {"downlink_timeout_s", s.downlink_timeout_s}};
  root["sites"] = json::array();
  for (const auto& site : s.sites)
    root["sites"].push_back({{"id", site.id},
                             {"plots", site.plots},
                             {"gateway_position", pos_json(site.gateway_position)},
                             {"node_area_center", pos_json(site.node_area_center)},
                             {"max_span_m", site.max_span_m},
                             {"foliage_blockage", site.foliage_blockage},
                             {"snow_scale", site.snow_scale},
                             {"climate", climate_json(site.climate)}});
  root["nodes"] = json::array();
  for (const auto& n : s.nodes) {
    json j{{"id", n.id.value()},
           {"name", n.name},
           {"site", n.site},
           {"kind", std::string(alp::to_string(n.kind))},
           {"position", pos_json(n.position)},
           {"battery_ah", n.battery_ah},
           {"battery_v", n.battery_v},
           {"deployed_at", format_time(n.deployed_at)},
           {"sampling_interval_s", n.sampling_interval_s},
           {"resolution_bits", n.resolution_bits}};
    if (!n.plot.empty()) j["plot"] = n.plot;
    if (!n.transect.empty()) j["transect"] = n.transect;
    root["nodes"].push_back(std::move(j));
  }
  root["gateways"] = json::array();
  for (const auto& g : s.gateways) {
    const auto& ps = g.power;
    root["gateways"].push_back(
        {{"id", g.id.value()},
         {"name", g.name},
         {"site", g.site},
         {"antenna_attached", g.antenna_attached},
         {"train_duration_s", g.train_duration_s},
         {"deployed_at", format_time(g.deployed_at)},
         {"power",
          {{"charge_ah", ps.charge_ah},
           {"capacity_ah", ps.capacity_ah},
           {"load_ma", ps.load_ma},
           {"system_v", ps.system_v},
           {"panel_w", ps.panel_w},
           {"battery_damaged", ps.battery_damaged},
           {"solar", {{"min_fraction", ps.solar.min_fraction}, {"max_fraction", ps.solar.max_fraction}}}}}});
  }
  root["faults"] = json::array();
  for (const auto& f : s.faults) {
    json j{{"kind", std::string(to_string(f.kind))}, {"target", f.target}, {"start", format_time(f.start)},
           {"attenuation_db", f.attenuation_db}};
    if (f.end) j["end"] = format_time(*f.end);
    if (!f.to_site.empty()) j["to_site"] = f.to_site;
    if (!f.to_plot.empty()) j["to_plot"] = f.to_plot;
    if (f.to_position) j["to_position"] = pos_json(*f.to_position);
    root["faults"].push_back(std::move(j));
  }
  if (s.live_bridge) root["live_bridge"] = {{"broker", s.live_bridge->broker}};
  return root.dump(indent);
}

Scenario inject(Scenario s, FaultSpec fault) {
  const std::string path = "faults[" + std::to_string(s.faults.size()) + "]";
  if (fault.end && *fault.end <= fault.start) invalid(path + ".end", "must be after start");
  check_fault_target(s, fault, path);
  if (fault.kind == FaultKind::NodeRelocation) {
    const auto* dest = s.find_site(fault.to_site);
    if (!dest) invalid(path + ".to_site", "unknown site '" + fault.to_site + "'");
    if (!fault.to_position) fault.to_position = synthesize(s.seed, s.find_node(fault.target)->id, "relocation", *dest);
  }
  if (fault.kind == FaultKind::SnowBurial && fault.attenuation_db == 0.0) fault.attenuation_db = s.link_params.snow_peak_db;
  s.faults.push_back(std::move(fault));
  return s;
}

Census census(const Scenario& s, std::string_view site) {
  Census c;
  for (const auto& n : s.nodes) {
    if (!site.empty() && n.site != site) continue;
    ++c.nodes;
    switch (n.kind) {
      case alp::SensorKind::SoilTemp: ++c.soil_temperature; break;
      case alp::SensorKind::WaterContent: ++c.water_content; break;
      case alp::SensorKind::Weather: ++c.weather; break;
      case alp::SensorKind::AmbientTRH: ++c.ambient; break;
    }
  }
  for (const auto& g : s.gateways)
    if (site.empty() || g.site == site) ++c.gateways;
  return c;
}

Census census(const Scenario& s) { return census(s, ""); }

}  // namespace borealis::scenario

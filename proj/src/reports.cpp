#include "borealis/reports.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace borealis::reports {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string day_label(std::int64_t epoch, std::size_t d) {
  return scenario::format_time(epoch + static_cast<std::int64_t>(d) * kSecondsPerDay);
}

void write_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingArtifacts, "missing artifact " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json ledger_json(const node::EnergyLedger& e) {
  return json{{"sleep_j", e.sleep_j},       {"sniff_j", e.sniff_j}, {"sample_j", e.sample_j},
              {"response_j", e.response_j}, {"sniffs", e.sniffs},   {"samples", e.samples}};
}

node::EnergyLedger ledger_from(const json& j) {
  node::EnergyLedger e;
  e.sleep_j = j.at("sleep_j").get<double>();
  e.sniff_j = j.at("sniff_j").get<double>();
  e.sample_j = j.at("sample_j").get<double>();
  e.response_j = j.at("response_j").get<double>();
  e.sniffs = j.at("sniffs").get<std::uint64_t>();
  e.samples = j.at("samples").get<std::uint64_t>();
  return e;
}

std::string format_name(backend::ExportFormat f) { return f == backend::ExportFormat::Csv ? "csv" : "lp"; }

analytics::PrrReport prr_from_dir(const fs::path& dir, const TraceFile& tf) {
  const std::string text = read_file(dir / measurements_file(tf.format));
  backend::TimeSeriesStore store;
  for (const auto& m : backend::parse_export(text, tf.format)) store.append(m);
  return analytics::prr_report(tf.input, store);
}

}  // namespace

std::string measurements_file(backend::ExportFormat format) {
  return format == backend::ExportFormat::Csv ? "measurements.csv" : "measurements.lp";
}

void write_trace(std::ostream& out, const TraceFile& file) {
  const auto& in = file.input;
  json doc;
  doc["scenario_name"] = file.scenario.name;
  doc["scenario"] = json::parse(scenario::to_json(file.scenario, -1));
  doc["export"] = format_name(file.format);
  doc["measurements"] = file.measurements;
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(file.trace.digest));
  doc["trace"] = {{"digest", digest}, {"events", file.trace.events}, {"by_kind", file.trace.by_kind}};
  json nodes = json::array();
  for (std::size_t n = 0; n < in.nodes.size(); ++n) {
    json days = json::array();
    for (const auto& d : in.days[n]) days.push_back(json::array({d.exists ? 1 : 0, d.site, d.interval_s, d.battery_mv}));
    nodes.push_back({{"id", in.nodes[n].id.value()},
                     {"name", in.nodes[n].name},
                     {"kind", std::string(alp::to_string(in.nodes[n].kind))},
                     {"days", days},
                     {"energy", ledger_json(in.energy.at(n))}});
  }
  doc["input"] = {{"epoch", in.epoch}, {"day_count", in.day_count}, {"sites", in.sites}, {"nodes", nodes}};
  out << kTraceMagic << '\n' << doc.dump() << '\n';
}

TraceFile read_trace(std::istream& in) {
  std::string magic;
  std::getline(in, magic);
  if (magic != kTraceMagic) throw Error(Errc::BadTrace, "not a trace file (bad magic header)");
  TraceFile tf;
  try {
    const json doc = json::parse(in);
    tf.scenario = scenario::load_scenario(doc.at("scenario").dump(), doc.at("scenario_name").get<std::string>());
    tf.format = backend::parse_format(doc.at("export").get<std::string>());
    tf.measurements = doc.at("measurements").get<std::size_t>();
    const auto& t = doc.at("trace");
    tf.trace.digest = std::stoull(t.at("digest").get<std::string>(), nullptr, 16);
    tf.trace.events = t.at("events").get<std::uint64_t>();
    tf.trace.by_kind = t.at("by_kind").get<std::vector<std::uint64_t>>();
    const auto& i = doc.at("input");
    tf.input.epoch = i.at("epoch").get<std::int64_t>();
    tf.input.day_count = i.at("day_count").get<std::size_t>();
    tf.input.sites = i.at("sites").get<std::vector<std::string>>();
    for (const auto& n : i.at("nodes")) {
      const auto kind = alp::sensor_kind_from_string(n.at("kind").get<std::string>());
      if (!kind) throw Error(Errc::BadTrace, "unknown sensor kind in trace");
      tf.input.nodes.push_back(analytics::NodeInfo{NodeId(n.at("id").get<std::uint64_t>()),
                                                   n.at("name").get<std::string>(), *kind});
      std::vector<analytics::NodeDay> days;
      for (const auto& d : n.at("days"))
        days.push_back(analytics::NodeDay{d.at(0).get<int>() != 0, d.at(1).get<std::uint16_t>(),
                                          d.at(2).get<std::uint32_t>(), d.at(3).get<std::uint16_t>()});
      tf.input.days.push_back(std::move(days));
      tf.input.energy.push_back(ledger_from(n.at("energy")));
    }
    tf.input.budget = tf.scenario.energy_budget;
  } catch (const json::exception& e) {
    throw Error(Errc::BadTrace, std::string("corrupt trace: ") + e.what());
  }
  return tf;
}

std::string prr_daily_csv(const analytics::PrrReport& report) {
  std::string out = "node";
  for (std::size_t d = 0; d < report.day_count(); ++d) out += "," + day_label(report.epoch, d);
  out += '\n';
  for (std::size_t n = 0; n < report.nodes.size(); ++n) {
    out += report.nodes[n].name;
    for (const auto& c : report.daily[n]) {
      out += ',';
      if (c.exists && c.expected > 0) out += fixed(c.percent, 2);
    }
    out += '\n';
  }
  return out;
}

std::string prr_monthly_csv(const analytics::PrrReport& report) {
  const auto ms = analytics::months(report);
  std::vector<std::vector<std::optional<double>>> columns;
  std::string out = "node";
  for (const auto& m : ms) {
    char label[16];
    std::snprintf(label, sizeof label, "%04d-%02u", m.year, m.month);
    out += std::string(",") + label;
    columns.push_back(analytics::monthly_prr(report, m));
  }
  out += '\n';
  for (std::size_t n = 0; n < report.nodes.size(); ++n) {
    out += report.nodes[n].name;
    for (const auto& col : columns) {
      out += ',';
      if (col[n]) out += fixed(*col[n], 2);
    }
    out += '\n';
  }
  return out;
}

std::string battery_csv(const analytics::AnalyticsInput& input) {
  std::string out = "node";
  for (std::size_t d = 0; d < input.day_count; ++d) out += "," + day_label(input.epoch, d);
  out += '\n';
  for (std::size_t n = 0; n < input.nodes.size(); ++n) {
    out += input.nodes[n].name;
    for (const auto& day : input.days[n]) {
      out += ',';
      if (day.exists) out += std::to_string(day.battery_mv);
    }
    out += '\n';
  }
  return out;
}

std::string transects_csv(const analytics::TransectReport& report) {
  std::string out = "site,transect,mean_c,node_days,samples\n";
  for (const auto& a : report.annual)
    out += a.site + "," + a.transect + "," + fixed(a.mean_c, 3) + "," + std::to_string(a.node_days) + "," +
           std::to_string(a.samples) + "\n";
  return out;
}

std::string energy_json(const analytics::AnalyticsInput& input) {
  const auto e = analytics::daily_energy(input.budget);
  json doc;
  doc["closed_form_per_day"] = {{"sleep_j", e.sleep_j}, {"sniff_j", e.sniff_j}, {"sample_j", e.sample_j},
                                {"total_j", e.total_j}, {"sniffs", e.sniffs},   {"samples", e.samples}};
  json nodes = json::object();
  for (std::size_t n = 0; n < input.nodes.size(); ++n) nodes[input.nodes[n].name] = ledger_json(input.energy.at(n));
  doc["simulated_totals"] = nodes;
  return doc.dump(2) + "\n";
}

std::string lifetime_json(const node::EnergyBudget& budget, double mean_temp_c) {
  const analytics::BatteryModel model;
  const double current = analytics::average_current_a(budget, model.nominal_v);
  json doc;
  doc["rated_ah"] = model.rated_ah;
  doc["average_current_a"] = current;
  doc["ideal_years"] = analytics::ideal_lifetime_years(budget, model);
  doc["derated_ah_at_20c"] = analytics::derated_capacity(model, current, model.reference_temp_c);
  doc["derated_years_at_20c"] = analytics::lifetime_projection(budget, model, model.reference_temp_c);
  doc["mean_temp_c"] = mean_temp_c;
  doc["derated_ah_at_mean_temp"] = analytics::derated_capacity(model, current, mean_temp_c);
  doc["derated_years_at_mean_temp"] = analytics::lifetime_projection(budget, model, mean_temp_c);
  return doc.dump(2) + "\n";
}

double mean_site_temperature(const scenario::Scenario& s) {
  if (s.sites.empty()) return environment::Climate{}.baseline_mean_c;
  double sum = 0.0;
  for (const auto& site : s.sites) sum += site.climate.baseline_mean_c;
  return sum / static_cast<double>(s.sites.size());
}

std::string summary_json(const TraceFile& file, const analytics::PrrReport& prr) {
  const auto c = scenario::census(file.scenario);
  json doc;
  doc["scenario"] = file.scenario.name;
  doc["seed"] = file.scenario.seed;
  doc["start"] = scenario::format_time(file.scenario.start);
  doc["end"] = scenario::format_time(file.scenario.end);
  doc["census"] = {{"nodes", c.nodes},
                   {"gateways", c.gateways},
                   {"soil_temperature", c.soil_temperature},
                   {"water_content", c.water_content},
                   {"weather", c.weather},
                   {"ambient", c.ambient}};
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(file.trace.digest));
  doc["trace"] = {{"digest", digest}, {"events", file.trace.events}};
  doc["measurements"] = file.measurements;
  doc["energy"] = json::parse(energy_json(file.input))["closed_form_per_day"];
  doc["lifetime"] = json::parse(lifetime_json(file.input.budget, mean_site_temperature(file.scenario)));
  json overall = json::object();
  for (std::size_t n = 0; n < prr.nodes.size(); ++n)
    overall[prr.nodes[n].name] = prr.overall[n] ? json(*prr.overall[n]) : json(nullptr);
  doc["prr_overall"] = overall;
  return doc.dump(2) + "\n";
}

RunArtifacts write_run(const scenario::Scenario& scenario, const sim::RunResult& result,
                       backend::ExportFormat format, const fs::path& out_root) {
  RunArtifacts a;
  a.dir = out_root / scenario.name;
  std::error_code ec;
  fs::create_directories(a.dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + a.dir.string() + ": " + ec.message());

  const fs::path measurements = a.dir / measurements_file(format);
  {
    std::ofstream out(measurements, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + measurements.string());
    backend::export_to(out, result.store, backend::Selector{}, format);
    if (!out) throw Error(Errc::Io, "write failed for " + measurements.string());
  }
  a.files.push_back(measurements);

  TraceFile tf{scenario, result.trace, result.input, format, result.store.size()};
  tf.trace.records.clear();
  const auto prr = analytics::prr_report(result.input, result.store);

  a.files.push_back(a.dir / "prr_daily.csv");
  write_file(a.files.back(), prr_daily_csv(prr));
  a.files.push_back(a.dir / "summary.json");
  write_file(a.files.back(), summary_json(tf, prr));
  a.files.push_back(a.dir / "battery_mv.csv");
  write_file(a.files.back(), battery_csv(result.input));

  std::ostringstream trace;
  write_trace(trace, tf);
  a.files.push_back(a.dir / kTraceFile);
  write_file(a.files.back(), trace.str());
  return a;
}

std::string regenerate(const fs::path& run_dir, std::string_view which) {
  if (!fs::is_directory(run_dir)) throw Error(Errc::MissingArtifacts, "no run directory " + run_dir.string());
  std::ifstream in(run_dir / kTraceFile, std::ios::binary);
  if (!in) throw Error(Errc::MissingArtifacts, "missing " + (run_dir / kTraceFile).string());
  const TraceFile tf = read_trace(in);

  std::string text;
  fs::path target;
  if (which == "prr") {
    text = prr_monthly_csv(prr_from_dir(run_dir, tf));
    target = run_dir / "prr.csv";
  } else if (which == "energy") {
    text = energy_json(tf.input);
    target = run_dir / "energy.json";
  } else if (which == "lifetime") {
    text = lifetime_json(tf.input.budget, mean_site_temperature(tf.scenario));
    target = run_dir / "lifetime.json";
  } else if (which == "transects") {
    const std::string raw = read_file(run_dir / measurements_file(tf.format));
    text = transects_csv(analytics::transect_aggregates(backend::parse_export(raw, tf.format)));
    target = run_dir / "transects.csv";
  } else {
    throw Error(Errc::UnknownReport, "unknown report '" + std::string(which) + "' (prr|energy|lifetime|transects)");
  }
  write_file(target, text);
  return text;
}

}  // namespace borealis::reports

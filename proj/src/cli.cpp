#include "borealis/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <ostream>

#include "borealis/reports.hpp"
#include "borealis/scenario.hpp"
#include "borealis/simkernel.hpp"

namespace borealis::cli {
namespace {

namespace fs = std::filesystem;

std::string default_out_dir() {
  const char* env = std::getenv("BOREALIS_OUT");
  return env && *env ? env : "out";
}

std::optional<std::uint64_t> parse_number(std::string_view s) {
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

NodeId resolve_node(const scenario::Scenario& s, const std::string& text) {
  if (const auto* n = s.find_node(text)) return n->id;
  if (const auto v = parse_number(text))
    if (const auto* n = s.find_node(NodeId(*v))) return n->id;
  throw sim::Error(sim::Errc::UnknownNode, "unknown node '" + text + "'");
}

struct Options {
  std::string scenario_path;
  std::string out_dir;
  std::string until;
  std::optional<std::uint64_t> seed;
  std::string export_format = "csv";
  std::string node;
  std::string file = "0x41";
  std::string at;
  std::string live_bridge;
  std::string run_dir;
  std::string which;
};

int cmd_validate(const Options& o, std::ostream& out) {
  const auto s = scenario::load_scenario_file(o.scenario_path);
  const auto c = scenario::census(s);
  out << scenario::to_json(s, 2) << "\n";
  out << "nodes: " << c.nodes << "\n";
  out << "gateways: " << c.gateways << "\n";
  return kOk;
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  auto s = scenario::load_scenario_file(o.scenario_path);
  if (s.live_bridge)
    err << "warning: live_bridge " << s.live_bridge->broker
        << " ignored; no MQTT client is built into this binary, the bus runs in-process\n";
  if (o.seed) s.seed = *o.seed;
  if (!o.until.empty()) {
    const auto until = scenario::parse_time(o.until);
    if (until <= s.start || until > s.end)
      throw scenario::ScenarioError(scenario::Errc::ValidationError, "--until", "must lie in (start, end]");
    s.end = until;
  }
  const auto format = backend::parse_format(o.export_format);
  scenario::validate(s);
  const auto result = sim::run(s);
  const auto artifacts = reports::write_run(s, result, format, o.out_dir.empty() ? default_out_dir() : o.out_dir);
  for (const auto& f : artifacts.files) out << f.string() << "\n";
  return kOk;
}

void print_answer(std::ostream& out, alp::FileId file, const Bytes& answer) {
  out << "bytes: " << (answer.empty() ? "(empty)" : alp::to_hex(answer)) << "\n";
  if (file == alp::kSensorDataFile && !answer.empty()) {
    const auto r = alp::parse_sensor_record(answer);
    out << "timestamp_s: " << r.timestamp << "\n";
    out << "kind: " << alp::to_string(r.kind) << "\n";
    out << "value: " << backend::format_centi(r.value_scaled) << "\n";
    out << "battery_mv: " << r.battery_mv << "\n";
  } else if (file == alp::kConfigFile && !answer.empty()) {
    const auto c = alp::parse_config(answer);
    out << "kind: " << alp::to_string(c.kind) << "\n";
    out << "sampling_interval_s: " << c.sampling_interval_s << "\n";
    out << "resolution_bits: " << static_cast<int>(c.resolution_bits) << "\n";
  }
}

int cmd_query(const Options& o, std::ostream& out, std::ostream& err) {
  if (!o.live_bridge.empty()) {
    err << "error: no MQTT client is built into this binary; use an in-process query (omit --live-bridge)\n";
    return kRuntimeError;
  }
  const auto s = scenario::load_scenario_file(o.scenario_path);
  const auto raw = parse_number(o.file);
  if (!raw || *raw > 0xFF) throw scenario::ScenarioError(scenario::Errc::ValidationError, "--file", "not a file id");
  const alp::FileId file = alp::registered_file(static_cast<std::uint8_t>(*raw));
  const NodeId target = resolve_node(s, o.node);

  sim::Simulation sim(s);
  const std::int64_t when = o.at.empty() ? s.start + kSecondsPerDay : scenario::parse_time(o.at);
  sim.run_until(std::min(sim.at(when), sim.end()));
  const auto id = sim.query_node(target, file);
  sim.run_until(sim.now() + sim.backend().timeout() + kMsPerSecond);
  const auto req = sim.request(id);
  out << "request: " << id << "\n";
  out << "node: " << s.find_node(target)->name << "\n";
  out << "file: 0x" << std::hex << static_cast<int>(file.value) << std::dec << "\n";
  out << "state: " << backend::to_string(req.state) << "\n";
  if (req.state != backend::RequestState::Answered) return kRuntimeError;
  out << "answered_at: " << scenario::format_time(s.start + *req.answered_at / kMsPerSecond) << "\n";
  print_answer(out, file, req.answer);
  return kOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  out << reports::regenerate(o.run_dir, o.which);
  return kOk;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deterministic sensor-network simulator: validate, run, query, report", "borealis"};
  app.require_subcommand(1);
  Options o;

  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario; print materialised defaults");
  validate->add_option("scenario", o.scenario_path, "Scenario JSON file")->required();

  auto* run = app.add_subcommand("run", "Simulate a scenario and write run artifacts");
  run->add_option("scenario", o.scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", o.out_dir, "Output directory (default: $BOREALIS_OUT or ./out)");
  run->add_option("--until", o.until, "Stop at this date (YYYY-MM-DD)");
  run->add_option("--seed", o.seed, "Override the scenario seed");
  run->add_option("--export", o.export_format, "Measurement export format")->check(CLI::IsMember({"csv", "lp"}));

  auto* query = app.add_subcommand("query", "Read a node file through the backend downlink");
  query->add_option("scenario", o.scenario_path, "Scenario JSON file")->required();
  query->add_option("--node", o.node, "Node name or numeric id")->required();
  query->add_option("--file", o.file, "File id (0x40 sensor data, 0x41 configuration)");
  query->add_option("--at", o.at, "Simulated date to issue the query (default: one day after start)");
  query->add_option("--live-bridge", o.live_bridge, "Broker address of a live run");

  auto* report = app.add_subcommand("report", "Regenerate a report from a run directory");
  report->add_option("run_dir", o.run_dir, "Run directory (<out>/<scenario>)")->required();
  report->add_option("which", o.which, "Report name")->required()->check(
      CLI::IsMember({"prr", "energy", "lifetime", "transects"}));

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationError;
  }

  try {
    if (*validate) return cmd_validate(o, out);
    if (*run) return cmd_run(o, out, err);
    if (*query) return cmd_query(o, out, err);
    if (*report) return cmd_report(o, out);
  } catch (const scenario::ScenarioError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kRuntimeError;
}

}  // namespace borealis::cli

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "borealis/alp.hpp"
#include "borealis/analytics.hpp"
#include "borealis/backend.hpp"
#include "borealis/cli.hpp"
#include "borealis/reports.hpp"
#include "borealis/scenario.hpp"
#include "borealis/simkernel.hpp"

namespace py = pybind11;
using namespace borealis;

namespace {

Bytes to_bytes(const py::bytes& b) {
  const std::string s = b;
  return Bytes(s.begin(), s.end());
}

py::bytes from_bytes(const Bytes& b) { return py::bytes(reinterpret_cast<const char*>(b.data()), b.size()); }

py::dict request_dict(const backend::DownlinkRequest& r) {
  py::dict d;
  d["id"] = r.id;
  d["target"] = r.target.value();
  d["state"] = std::string(backend::to_string(r.state));
  d["issued_at"] = r.issued_at;
  d["on_air_at"] = r.on_air_at;
  d["answered_at"] = r.answered_at;
  d["answer"] = from_bytes(r.answer);
  return d;
}

}  // namespace

PYBIND11_MODULE(_borealis, m) {
  m.doc() = "Sensor-network simulator core: frame codec, scenarios, simulation and analytics";

  py::register_exception<alp::Error>(m, "FrameError", PyExc_ValueError);
  py::register_exception<scenario::ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<sim::Error>(m, "SimulationError", PyExc_RuntimeError);
  py::register_exception<analytics::Error>(m, "AnalyticsError", PyExc_ValueError);

  py::enum_<alp::Op>(m, "Op")
      .value("Read", alp::Op::ReadFileRequest)
      .value("Write", alp::Op::WriteFileRequest)
      .value("Return", alp::Op::ReturnFileData);

  py::enum_<alp::SensorKind>(m, "SensorKind")
      .value("SoilTemp", alp::SensorKind::SoilTemp)
      .value("WaterContent", alp::SensorKind::WaterContent)
      .value("Weather", alp::SensorKind::Weather)
      .value("AmbientTRH", alp::SensorKind::AmbientTRH);

  py::class_<alp::AlpFrame>(m, "AlpFrame")
      .def(py::init<>())
      .def_readwrite("version", &alp::AlpFrame::version)
      .def_property(
          "origin", [](const alp::AlpFrame& f) { return f.origin.value(); },
          [](alp::AlpFrame& f, std::uint64_t v) { f.origin = NodeId(v); })
      .def_readwrite("counter", &alp::AlpFrame::counter)
      .def_readwrite("op", &alp::AlpFrame::op)
      .def_property(
          "file", [](const alp::AlpFrame& f) { return f.file.value; },
          [](alp::AlpFrame& f, std::uint8_t v) { f.file = alp::FileId{v}; })
      .def_readwrite("offset", &alp::AlpFrame::offset)
      .def_readwrite("length", &alp::AlpFrame::length)
      .def_property(
          "payload", [](const alp::AlpFrame& f) { return from_bytes(f.payload); },
          [](alp::AlpFrame& f, const py::bytes& b) { f.payload = to_bytes(b); })
      .def("__eq__", [](const alp::AlpFrame& a, const alp::AlpFrame& b) { return a == b; });

  m.def("crc16", [](const py::bytes& data) { return alp::crc16_ccitt_false(to_bytes(data)); },
        "CRC-16/CCITT-FALSE of a byte string");
  m.def("encode_frame", [](const alp::AlpFrame& f) { return from_bytes(alp::encode_frame(f)); });
  m.def("decode_frame", [](const py::bytes& b) { return alp::decode_frame(to_bytes(b)); });
  m.def("make_sensor_report", [](std::uint64_t origin, std::uint16_t counter, std::uint32_t timestamp,
                                 alp::SensorKind kind, double value, std::uint16_t battery_mv) {
    return alp::make_sensor_report(NodeId(origin), counter,
                                   alp::SensorDataRecord{timestamp, kind, alp::scale_to_centi(value), battery_mv});
  });
  m.def("scale_to_centi", &alp::scale_to_centi);

  m.def("daily_energy", [] {
    const auto e = analytics::daily_energy(node::EnergyBudget{});
    py::dict d;
    d["sleep_j"] = e.sleep_j;
    d["sniff_j"] = e.sniff_j;
    d["sample_j"] = e.sample_j;
    d["total_j"] = e.total_j;
    return d;
  }, "Closed-form daily energy of the default budget");
  m.def("ideal_lifetime_years", [] { return analytics::ideal_lifetime_years({}, {}); });
  m.def("lifetime_projection", [](double mean_temp_c) { return analytics::lifetime_projection({}, {}, mean_temp_c); },
        py::arg("mean_temp_c") = 20.0);
  m.def("derated_capacity", [](double current_a, double temp_c) {
    return analytics::derated_capacity({}, current_a, temp_c);
  });
  m.def("daily_prr", &analytics::daily_prr);

  py::class_<scenario::Scenario>(m, "Scenario")
      .def_readonly("name", &scenario::Scenario::name)
      .def_readwrite("seed", &scenario::Scenario::seed)
      .def_readwrite("start", &scenario::Scenario::start)
      .def_readwrite("end", &scenario::Scenario::end)
      .def("to_json", [](const scenario::Scenario& s) { return scenario::to_json(s, 2); })
      .def("census", [](const scenario::Scenario& s) {
        const auto c = scenario::census(s);
        py::dict d;
        d["nodes"] = c.nodes;
        d["gateways"] = c.gateways;
        d["soil_temperature"] = c.soil_temperature;
        d["water_content"] = c.water_content;
        d["weather"] = c.weather;
        d["ambient"] = c.ambient;
        return d;
      })
      .def("node_id", [](const scenario::Scenario& s, const std::string& name) {
        const auto* n = s.find_node(name);
        if (!n) throw py::key_error(name);
        return n->id.value();
      });

  m.def("load_scenario", &scenario::load_scenario, py::arg("text"), py::arg("name") = "scenario");
  m.def("load_scenario_file", &scenario::load_scenario_file);
  m.def("parse_time", &scenario::parse_time);

  py::class_<sim::Simulation>(m, "Simulation")
      .def(py::init<scenario::Scenario>())
      .def_property_readonly("now", &sim::Simulation::now)
      .def_property_readonly("end", &sim::Simulation::end)
      .def("at", &sim::Simulation::at)
      .def("run", &sim::Simulation::run, py::call_guard<py::gil_scoped_release>())
      .def("run_until", &sim::Simulation::run_until, py::call_guard<py::gil_scoped_release>())
      .def("query_node", [](sim::Simulation& s, std::uint64_t node, std::uint8_t file) {
        return s.query_node(NodeId(node), alp::FileId{file});
      })
      .def("update_config", [](sim::Simulation& s, std::uint64_t node, alp::SensorKind kind, std::uint32_t interval,
                               std::uint8_t bits) {
        return s.update_config(NodeId(node), alp::NodeConfig{kind, interval, bits});
      })
      .def("request", [](const sim::Simulation& s, std::uint64_t id) { return request_dict(s.request(id)); })
      .def("stored", [](const sim::Simulation& s) { return s.backend().stored(); })
      .def("trace_digest", [](const sim::Simulation& s) { return s.trace().digest; })
      .def("export", [](const sim::Simulation& s, const std::string& format) {
        return backend::export_measurements(s.backend().snapshot(), backend::Selector{}, backend::parse_format(format));
      }, py::arg("format") = "csv");

  m.def("run_scenario", [](const scenario::Scenario& s, const std::string& out_dir, const std::string& format) {
    const auto fmt = backend::parse_format(format);
    std::vector<std::string> files;
    py::gil_scoped_release release;
    const auto result = sim::run(s);
    for (const auto& f : reports::write_run(s, result, fmt, out_dir).files)
      files.push_back(f.string());
    return files;
  }, py::arg("scenario"), py::arg("out_dir"), py::arg("format") = "csv");

  m.def("cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "borealis");
    std::ostringstream out, err;
    const int code = cli::main(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, "Run the command-line interface in-process; returns (exit_code, stdout, stderr)");
}

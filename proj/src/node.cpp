#include "borealis/node.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace borealis::node {
namespace {

std::int64_t ceil_div(std::int64_t num, std::int64_t den) {
  const std::int64_t q = num / den;
  return (num % den != 0 && ((num > 0) == (den > 0))) ? q + 1 : q;
}

// Drains `energy_j` and returns what the battery actually delivered.
double take(BatteryState& battery, double energy_j) {
  const double before = battery.drained_j;
  battery = drain(battery, energy_j);
  return battery.drained_j - before;
}

struct CurvePoint {
  double fraction;
  double mv;
};

constexpr std::array<CurvePoint, 5> kCurve{{
    {0.0, 2000.0},
    {0.02, 2800.0},
    {0.1, 3400.0},
    {0.5, 3580.0},
    {1.0, 3650.0},
}};

NodeState apply_config(NodeState state, const alp::NodeConfig& cfg) {
  state.config = cfg;
  state.files[alp::kConfigFile] = alp::serialize(cfg);
  if (state.last_sample_at >= 0)
    state.next_sample_at = state.last_sample_at + static_cast<SimTime>(cfg.sampling_interval_s) * kMsPerSecond;
  return state;
}

}  // namespace

void validate(const EnergyBudget& b) {
  const std::array<std::pair<const char*, double>, 6> fields{{
      {"sample_energy_j", b.sample_energy_j},
      {"sniff_energy_j", b.sniff_energy_j},
      {"sniff_period_s", b.sniff_period_s},
      {"sleep_power_w", b.sleep_power_w},
      {"sample_period_s", b.sample_period_s},
      {"receive_window_s", b.receive_window_s},
  }};
  for (const auto& [name, value] : fields)
    if (!(value > 0.0) || !std::isfinite(value))
      throw std::invalid_argument(std::string("energy_budget.") + name + " must be strictly positive");
}

std::int64_t sniff_period_us(const EnergyBudget& budget) {
  return std::max<std::int64_t>(1, std::llround(budget.sniff_period_s * 1e6));
}

BatteryState BatteryState::fresh(double capacity_ah, double nominal_v) {
  BatteryState b;
  b.nominal_v = nominal_v;
  b.full_j = capacity_ah * 3600.0 * nominal_v;
  b.capacity_j = b.full_j;
  b.voltage_mv = voltage_for_fraction(1.0);
  return b;
}

std::uint16_t voltage_for_fraction(double fraction) {
  fraction = std::clamp(fraction, 0.0, 1.0);
  for (std::size_t i = 1; i < kCurve.size(); ++i) {
    if (fraction <= kCurve[i].fraction) {
      const auto& lo = kCurve[i - 1];
      const auto& hi = kCurve[i];
      const double t = (fraction - lo.fraction) / (hi.fraction - lo.fraction);
      return static_cast<std::uint16_t>(std::lround(lo.mv + t * (hi.mv - lo.mv)));
    }
  }
  return static_cast<std::uint16_t>(kCurve.back().mv);
}

BatteryState drain(BatteryState battery, double energy_j) {
  if (energy_j < 0.0) throw std::invalid_argument("drain: negative energy");
  if (energy_j == 0.0) return battery;
  const double actual = std::min(energy_j, battery.capacity_j);
  battery.capacity_j -= actual;
  battery.drained_j += actual;
  if (battery.capacity_j <= 0.0) battery.capacity_j = 0.0;
  battery.voltage_mv = voltage_for_fraction(battery.full_j > 0.0 ? battery.capacity_j / battery.full_j : 0.0);
  return battery;
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Sleep: return "Sleep";
    case Phase::Sniff: return "Sniff";
    case Phase::SampleAndTransmit: return "SampleAndTransmit";
    case Phase::ReceiveWindow: return "ReceiveWindow";
  }
  return "Unknown";
}

std::int64_t NodeState::first_sniff_at_or_after(SimTime t) const {
  return std::max<std::int64_t>(0, ceil_div(t * 1000 - sniff_origin_us, sniff_period_us));
}

NodeState make_node(const NodeSetup& setup) {
  validate(setup.budget);
  alp::validate(setup.config);
  NodeState s;
  s.id = setup.id;
  s.config = setup.config;
  s.next_sample_at = setup.first_sample_at;
  s.sniff_period_us = sniff_period_us(setup.budget);
  s.sniff_origin_us = setup.sniff_origin_us;
  s.battery = setup.battery;
  s.position = setup.position;
  s.budget = setup.budget;
  s.settled_at = std::min<SimTime>(setup.first_sample_at, setup.sniff_origin_us / 1000);
  s.next_sniff_index = s.first_sniff_at_or_after(s.settled_at);
  s.files[alp::kSensorDataFile] = {};
  s.files[alp::kConfigFile] = alp::serialize(setup.config);
  return s;
}

NodeState settle(NodeState s, SimTime now) {
  if (now <= s.settled_at) return s;
  if (!s.battery.exhausted()) {
    s.spent.sleep_j += take(s.battery, s.budget.sleep_power_w * static_cast<double>(now - s.settled_at) / 1000.0);
    const std::int64_t due = s.first_sniff_at_or_after(now) - s.next_sniff_index;
    if (due > 0) {
      s.spent.sniff_j += take(s.battery, s.budget.sniff_energy_j * static_cast<double>(due));
      s.spent.sniffs += static_cast<std::uint64_t>(due);
    }
  }
  // A dead node skips its missed wake-ups; a replaced battery starts clean.
  s.next_sniff_index = std::max(s.next_sniff_index, s.first_sniff_at_or_after(now));
  s.settled_at = now;
  return s;
}

const SensorDriver& driver_for(SensorKind kind) {
  static constexpr std::array<SensorDriver, 4> kDrivers{{
      {SensorKind::SoilTemp, "1-Wire", -55.0, 125.0},
      {SensorKind::WaterContent, "SDI-12", 0.0, 100.0},
      {SensorKind::Weather, "SDI-12", -50.0, 60.0},
      {SensorKind::AmbientTRH, "I2C", -40.0, 125.0},
  }};
  return kDrivers.at(static_cast<std::size_t>(kind) - 1);
}

alp::SensorDataRecord sample_sensor(const NodeState& state, const EnvReading& reading, SimTime now) {
  if (reading.kind != state.config.kind)
    throw Error(Errc::SensorMismatch, std::string("reading for ") + std::string(alp::to_string(reading.kind)) +
                                          " offered to a " + std::string(alp::to_string(state.config.kind)) +
                                          " driver");
  const SensorDriver& driver = driver_for(state.config.kind);
  alp::SensorDataRecord r;
  r.timestamp = static_cast<std::uint32_t>(now / kMsPerSecond);
  r.kind = driver.kind;
  r.value_scaled = alp::scale_to_centi(std::clamp(reading.value, driver.min_value, driver.max_value));
  r.battery_mv = std::min(state.battery.voltage_mv, alp::kMaxBatteryMv);
  return r;
}

DownlinkResult handle_downlink(NodeState state, const alp::AlpFrame& frame) {
  DownlinkResult out{std::move(state), std::nullopt, std::nullopt};
  auto& s = out.state;
  auto fail = [&out](Errc code) {
    out.error = code;
    ++out.state.downlink_errors;
    return out;
  };

  switch (frame.op) {
    case alp::Op::ReadFileRequest: {
      if (!alp::is_registered(frame.file)) return fail(Errc::UnknownFile);
      const Bytes& content = s.files.at(frame.file);
      const std::size_t from = std::min<std::size_t>(frame.offset, content.size());
      Bytes slice(content.begin() + static_cast<std::ptrdiff_t>(from), content.end());
      out.response = alp::make_return_data(s.id, s.counter++, frame.file, frame.offset, std::move(slice));
      return out;
    }
    case alp::Op::WriteFileRequest: {
      if (frame.file == alp::kSensorDataFile) return fail(Errc::ReadOnlyFile);
      if (frame.file != alp::kConfigFile) return fail(Errc::UnknownFile);
      if (frame.offset != 0) return fail(Errc::InvalidConfig);
      alp::NodeConfig cfg;
      try {
        cfg = alp::parse_config(frame.payload);
      } catch (const alp::Error&) {
        return fail(Errc::InvalidConfig);
      }
      s = apply_config(std::move(s), cfg);
      out.response = alp::make_return_data(s.id, s.counter++, alp::kConfigFile, 0, s.files.at(alp::kConfigFile));
      return out;
    }
    case alp::Op::ReturnFileData:
      ++s.ignored_events;
      return out;
  }
  return out;
}

namespace {

struct Stepper {
  SimTime now;

  StepResult operator()(NodeState s, const SampleTimer& ev) const {
    StepResult r{std::move(s), {}};
    auto& st = r.state;
    if (now < st.next_sample_at) {
      ++st.ignored_events;
      return r;
    }
    const SimTime interval = static_cast<SimTime>(st.config.sampling_interval_s) * kMsPerSecond;
    st.last_sample_at = now;
    st.next_sample_at = now + interval;

    alp::SensorDataRecord record;
    try {
      record = sample_sensor(st, ev.reading, now);
    } catch (const Error&) {
      ++st.ignored_events;
      return r;
    }
    const bool affordable = st.battery.capacity_j >= st.budget.sample_energy_j;
    st.spent.sample_j += take(st.battery, st.budget.sample_energy_j);
    if (!affordable) return r;
    ++st.spent.samples;
    st.files[alp::kSensorDataFile] = alp::serialize(record);
    r.actions.push_back(Transmit{alp::make_sensor_report(st.id, st.counter++, record), false});
    if (st.phase != Phase::ReceiveWindow) st.phase = Phase::Sleep;
    return r;
  }

  StepResult operator()(NodeState s, const SniffTimer& ev) const {
    StepResult r{std::move(s), {}};
    auto& st = r.state;
    if (st.next_sniff_at() != now) {
      ++st.ignored_events;
      return r;
    }
    st.spent.sniff_j += take(st.battery, st.budget.sniff_energy_j);
    ++st.spent.sniffs;
    ++st.next_sniff_index;
    st.phase = (ev.train_detected && !st.battery.exhausted()) ? Phase::ReceiveWindow : Phase::Sleep;
    return r;
  }

  StepResult operator()(NodeState s, const FrameArrival& ev) const {
    StepResult r{std::move(s), {}};
    if (r.state.phase != Phase::ReceiveWindow) {
      ++r.state.ignored_events;
      return r;
    }
    auto handled = handle_downlink(std::move(r.state), ev.frame);
    r.state = std::move(handled.state);
    r.state.phase = Phase::Sleep;
    if (handled.response) {
      const bool affordable = r.state.battery.capacity_j >= r.state.budget.sample_energy_j;
      r.state.spent.response_j += take(r.state.battery, r.state.budget.sample_energy_j);
      if (affordable) r.actions.push_back(Transmit{std::move(*handled.response), true});
    }
    return r;
  }

  StepResult operator()(NodeState s, const BatteryReplace&) const {
    StepResult r{std::move(s), {}};
    auto& st = r.state;
    const double drained = st.battery.drained_j;
    st.battery = BatteryState::fresh(st.battery.full_j / (3600.0 * st.battery.nominal_v), st.battery.nominal_v);
    st.battery.drained_j = drained;
    st.next_sniff_index = st.first_sniff_at_or_after(now);
    return r;
  }
};

}  // namespace

StepResult node_step(NodeState state, const NodeEvent& event, SimTime now) {
  const bool was_dead = state.battery.exhausted();
  state = settle(std::move(state), now);
  if (std::holds_alternative<BatteryReplace>(event)) return Stepper{now}(std::move(state), BatteryReplace{});
  if (was_dead || state.battery.exhausted()) return StepResult{std::move(state), {}};
  return std::visit([&](const auto& ev) { return Stepper{now}(std::move(state), ev); }, event);
}

}  // namespace borealis::node

#pragma once

// Sensor-node firmware model. Transitions are pure: a NodeState and an event
// go in, the next NodeState and the frames to put on air come out.

#include <map>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "borealis/alp.hpp"
#include "borealis/types.hpp"

namespace borealis::node {

using alp::SensorKind;

/// Per-activity energy constants of the node.
struct EnergyBudget {
  double sample_energy_j = 0.08516;   // one acquisition + transmission
  double sniff_energy_j = 201.13e-6;  // one low-power wake-up
  double sniff_period_s = 0.9564;
  double sleep_power_w = 499.2e-6;
  double sample_period_s = 900.0;
  double receive_window_s = 0.75;

  friend bool operator==(const EnergyBudget&, const EnergyBudget&) = default;
};

/// Throws std::invalid_argument naming the first non-positive field.
void validate(const EnergyBudget& budget);

/// Sniff period rounded to whole microseconds, the resolution of the sniff schedule.
std::int64_t sniff_period_us(const EnergyBudget& budget);

struct BatteryState {
  double capacity_j = 0.0;  // remaining
  double full_j = 0.0;      // at last replacement
  double nominal_v = 3.6;
  double drained_j = 0.0;   // cumulative across replacements
  std::uint16_t voltage_mv = 0;

  static BatteryState fresh(double capacity_ah, double nominal_v = 3.6);
  bool exhausted() const { return capacity_j <= 0.0; }
  friend bool operator==(const BatteryState&, const BatteryState&) = default;
};

/// LiSOCl2-shaped open-circuit curve: flat, then a cliff near empty.
std::uint16_t voltage_for_fraction(double fraction_remaining);

/// Removes up to `energy_j` (floor at empty) and refreshes the reported voltage.
BatteryState drain(BatteryState battery, double energy_j);

struct EnergyLedger {
  double sleep_j = 0.0;
  double sniff_j = 0.0;
  double sample_j = 0.0;
  double response_j = 0.0;
  std::uint64_t sniffs = 0;
  std::uint64_t samples = 0;

  double total() const { return sleep_j + sniff_j + sample_j + response_j; }
  friend bool operator==(const EnergyLedger&, const EnergyLedger&) = default;
};

enum class Phase { Sleep, Sniff, SampleAndTransmit, ReceiveWindow };

std::string_view to_string(Phase phase);

struct NodeState {
  NodeId id;
  alp::NodeConfig config;
  Phase phase = Phase::Sleep;
  SimTime next_sample_at = 0;
  SimTime last_sample_at = -1;
  // Sniff k happens at floor((sniff_origin_us + k * sniff_period_us) / 1000) ms.
  std::int64_t sniff_origin_us = 0;
  std::int64_t sniff_period_us = 956'400;
  std::int64_t next_sniff_index = 0;
  std::uint16_t counter = 0;
  std::map<alp::FileId, Bytes> files;
  BatteryState battery;
  Position position;
  EnergyBudget budget;
  EnergyLedger spent;
  SimTime settled_at = 0;
  std::uint32_t downlink_errors = 0;
  std::uint32_t ignored_events = 0;

  SimTime sniff_time(std::int64_t k) const { return (sniff_origin_us + k * sniff_period_us) / 1000; }
  SimTime next_sniff_at() const { return sniff_time(next_sniff_index); }
  /// Index of the first sniff at or after `t`.
  std::int64_t first_sniff_at_or_after(SimTime t) const;

  friend bool operator==(const NodeState&, const NodeState&) = default;
};

struct NodeSetup {
  NodeId id;
  alp::NodeConfig config;
  BatteryState battery;
  Position position;
  EnergyBudget budget;
  SimTime first_sample_at = 0;
  std::int64_t sniff_origin_us = 0;
};

NodeState make_node(const NodeSetup& setup);

/// Physical value offered by the environment for one sensor kind.
struct EnvReading {
  SensorKind kind = SensorKind::SoilTemp;
  double value = 0.0;
};

struct SampleTimer {
  EnvReading reading;
};
struct SniffTimer {
  bool train_detected = false;
};
struct FrameArrival {
  alp::AlpFrame frame;
};
struct BatteryReplace {};

using NodeEvent = std::variant<SampleTimer, SniffTimer, FrameArrival, BatteryReplace>;

struct Transmit {
  alp::AlpFrame frame;
  bool response = false;  // answer to a downlink rather than a periodic report
};

using NodeAction = Transmit;

struct StepResult {
  NodeState state;
  std::vector<NodeAction> actions;
};

StepResult node_step(NodeState state, const NodeEvent& event, SimTime now);

/// Accounts sleep power and every idle sniff strictly before `now`.
NodeState settle(NodeState state, SimTime now);

enum class Errc { SensorMismatch, UnknownFile, InvalidConfig, ReadOnlyFile, NotListening };
using Error = CodedError<Errc>;

struct SensorDriver {
  SensorKind kind;
  std::string_view bus;
  double min_value;
  double max_value;
};

/// Driver table lookup; the active driver is a pure function of the kind.
const SensorDriver& driver_for(SensorKind kind);

/// Throws Error{SensorMismatch} when the reading is for a different kind.
alp::SensorDataRecord sample_sensor(const NodeState& state, const EnvReading& reading, SimTime now);

struct DownlinkResult {
  NodeState state;
  std::optional<alp::AlpFrame> response;
  std::optional<Errc> error;
};

DownlinkResult handle_downlink(NodeState state, const alp::AlpFrame& frame);

}  // namespace borealis::node

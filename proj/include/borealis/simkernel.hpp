#pragma once

// Discrete-event engine. Owns every node, gateway and the backend, advances
// simulated time in integer milliseconds since the scenario start, and applies
// scheduled faults. Identical scenarios give identical traces.

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "borealis/alp.hpp"
#include "borealis/analytics.hpp"
#include "borealis/backend.hpp"
#include "borealis/gateway.hpp"
#include "borealis/node.hpp"
#include "borealis/scenario.hpp"
#include "borealis/types.hpp"

namespace borealis::sim {

enum class EventKind : std::uint8_t {
  SampleTimer,
  SniffTimer,
  FrameOnAir,
  BusDelivery,
  FaultStart,
  FaultEnd,
  PowerStep,
  Snapshot
};
std::string_view to_string(EventKind kind);

enum class Outcome : std::uint8_t {
  None,
  Transmitted,  // sample taken and report put on air
  Skipped,      // stale timer, dead node, or nothing to do
  Lost,         // radio link failed or no gateway in range
  Dropped,      // gateway offline
  Forwarded,    // gateway pushed the frame onto the bus
  Received,     // downlink frame reached the node
  Stored,
  Answered,
  Duplicate,
  Rejected,
  Detected,     // sniff overlapped an advertising train
  Missed,
  Applied       // fault or power step applied
};
std::string_view to_string(Outcome outcome);

struct Event {
  SimTime at = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Snapshot;
  std::uint32_t subject = 0;  // node, gateway, fault or day index depending on kind
  std::uint64_t ref = 0;      // frame or train handle
};

struct TraceRecord {
  SimTime at = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Snapshot;
  Outcome outcome = Outcome::None;
  bool downlink = false;
  std::uint32_t subject = 0;
  std::uint16_t counter = 0;
  std::uint64_t cause = 0;  // seq of the FrameOnAir that fed a BusDelivery

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct Trace {
  std::uint64_t digest = 0xcbf29ce484222325ULL;
  std::uint64_t events = 0;
  std::vector<std::uint64_t> by_kind = std::vector<std::uint64_t>(8, 0);
  std::vector<TraceRecord> records;  // only with SimOptions::record_events

  friend bool operator==(const Trace&, const Trace&) = default;
};

struct SimOptions {
  bool record_events = false;
  SimTime bus_latency = 200;  // gateway to backend
  SimTime air_gap = 25;       // sniff to frame, frame to response
  SimTime power_step = 3'600'000;
};

enum class Errc { InvalidScenario, UnknownNode, FaultInPast };
using Error = CodedError<Errc>;

class Simulation {
 public:
  explicit Simulation(scenario::Scenario scenario, SimOptions options = {});
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  SimTime now() const;
  SimTime end() const;
  /// Simulated time of a unix timestamp.
  SimTime at(std::int64_t unix_seconds) const;

  /// Processes every event strictly before `t` and leaves the clock at `t`.
  void run_until(SimTime t);
  void run();

  /// Issue a downlink at the current time; returns the backend request id.
  std::uint64_t query_node(NodeId target, alp::FileId file);
  std::uint64_t update_config(NodeId target, const alp::NodeConfig& config);
  backend::DownlinkRequest request(std::uint64_t id) const;

  /// Schedules a fault that starts at or after the current time.
  void inject(const scenario::FaultSpec& fault);

  const scenario::Scenario& scenario() const;
  const backend::Backend& backend() const;
  const node::NodeState& node(NodeId id) const;
  const gateway::GatewayState& gateway(std::string_view site) const;
  const Trace& trace() const;
  analytics::AnalyticsInput analytics_input() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct RunResult {
  Trace trace;
  backend::TimeSeriesStore store;
  analytics::AnalyticsInput input;
};

/// Runs the whole scenario window.
RunResult run(const scenario::Scenario& scenario, SimOptions options = {});

}  // namespace borealis::sim

#pragma once

// Declarative description of a deployment: sites, node and gateway registry,
// link and energy parameters, faults. Loaded from JSON with every default
// materialised, so downstream code never falls back on hidden values.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "borealis/alp.hpp"
#include "borealis/environment.hpp"
#include "borealis/gateway.hpp"
#include "borealis/node.hpp"
#include "borealis/types.hpp"

namespace borealis::scenario {

enum class Errc { ParseError, ValidationError, UnknownTarget };

class ScenarioError : public CodedError<Errc> {
 public:
  ScenarioError(Errc code, std::string path, const std::string& message)
      : CodedError<Errc>(code, (path.empty() ? "" : path + ": ") + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Parses "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SSZ" into unix seconds.
std::int64_t parse_time(std::string_view text);
/// "YYYY-MM-DD" at midnight, full ISO-8601 otherwise.
std::string format_time(std::int64_t unix_seconds);

struct NodeSpec {
  NodeId id;
  std::string name;
  std::string site;
  std::string plot;      // empty for site-wide sensors
  std::string transect;  // "A".."F", empty for site-wide sensors
  alp::SensorKind kind = alp::SensorKind::SoilTemp;
  Position position;
  double battery_ah = 19.0;
  double battery_v = 3.6;
  std::int64_t deployed_at = 0;
  std::uint32_t sampling_interval_s = 900;
  std::uint8_t resolution_bits = 12;

  friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

struct GatewaySpec {
  NodeId id;
  std::string name;
  std::string site;
  gateway::PowerStation power;
  bool antenna_attached = true;
  double train_duration_s = 0.0;
  std::int64_t deployed_at = 0;

  friend bool operator==(const GatewaySpec&, const GatewaySpec&) = default;
};

enum class FaultKind { AntennaDetach, PowerStationFailure, BatteryReplace, NodeRelocation, SnowBurial };
std::string_view to_string(FaultKind kind);

struct FaultSpec {
  FaultKind kind = FaultKind::AntennaDetach;
  std::string target;  // gateway name, node name, or (SnowBurial) site id
  std::int64_t start = 0;
  std::optional<std::int64_t> end;
  // NodeRelocation destination.
  std::string to_site;
  std::string to_plot;
  std::optional<Position> to_position;
  // SnowBurial extra attenuation.
  double attenuation_db = 0.0;

  friend bool operator==(const FaultSpec&, const FaultSpec&) = default;
};

struct LiveBridge {
  std::string broker;
  friend bool operator==(const LiveBridge&, const LiveBridge&) = default;
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  std::int64_t start = 0;  // unix seconds, also the simulation epoch
  std::int64_t end = 0;
  node::EnergyBudget energy_budget;
  environment::LinkModelParams link_params;
  double downlink_timeout_s = 60.0;
  std::vector<environment::SiteLayout> sites;
  std::vector<NodeSpec> nodes;
  std::vector<GatewaySpec> gateways;
  std::vector<FaultSpec> faults;
  std::optional<LiveBridge> live_bridge;

  const environment::SiteLayout* find_site(std::string_view id) const;
  const NodeSpec* find_node(std::string_view name) const;
  const NodeSpec* find_node(NodeId id) const;
  const GatewaySpec* find_gateway(std::string_view name) const;
  const GatewaySpec* gateway_for_site(std::string_view site) const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Parses and validates; throws ScenarioError with the offending field path.
Scenario load_scenario(std::string_view json_text, std::string name = "scenario");
Scenario load_scenario_file(const std::string& path);

/// Full materialised JSON; load_scenario(to_json(s)) == s.
std::string to_json(const Scenario& s, int indent = 2);

/// Re-checks all invariants of an in-memory scenario.
void validate(const Scenario& s);

/// Adds a fault, checking that its target exists (Errc::UnknownTarget).
Scenario inject(Scenario s, FaultSpec fault);

struct Census {
  std::size_t nodes = 0;
  std::size_t gateways = 0;
  std::size_t soil_temperature = 0;
  std::size_t water_content = 0;
  std::size_t weather = 0;
  std::size_t ambient = 0;
};

Census census(const Scenario& s);
Census census(const Scenario& s, std::string_view site);

}  // namespace borealis::scenario

#pragma once

// Transparent relay between the node radio side and the backend bus, plus the
// solar power station that keeps it alive. The gateway never looks inside a
// frame: this library does not link against the application-layer codec.

#include <deque>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "borealis/types.hpp"

namespace borealis::gateway {

/// Seasonal daily harvest as a fraction of nameplate-hours (panel_w x 24 h).
struct SolarProfile {
  double min_fraction = 0.02;  // December
  double max_fraction = 0.25;  // June
  friend bool operator==(const SolarProfile&, const SolarProfile&) = default;
};

double daily_harvest_wh(const SolarProfile& profile, double panel_w, double day_of_year);

struct PowerStation {
  double charge_ah = 100.0;
  double capacity_ah = 100.0;
  double load_ma = 21.5;
  double system_v = 12.0;
  double panel_w = 100.0;
  SolarProfile solar;
  bool battery_damaged = false;

  friend bool operator==(const PowerStation&, const PowerStation&) = default;
};

/// Zero-harvest backup time from the current charge.
double hours_to_empty(const PowerStation& power);

struct BusMessage {
  NodeId gateway_id;
  SimTime received_at = 0;
  std::int16_t rssi_dbm = 0;
  Bytes raw_frame;

  friend bool operator==(const BusMessage&, const BusMessage&) = default;
};

struct PendingDownlink {
  std::uint64_t request_id = 0;
  NodeId target;
  Bytes frame;
};

/// Continuous on-air emission long enough to overlap one of the target's sniffs.
struct AdvertisingTrain {
  std::uint64_t request_id = 0;
  NodeId target;
  SimTime start = 0;
  SimTime duration = 0;
  Bytes frame;

  SimTime end() const { return start + duration; }
};

struct GatewayState {
  NodeId id;
  std::string site;
  Position position;
  std::deque<BusMessage> uplink_queue;
  std::deque<PendingDownlink> downlink_queue;
  PowerStation power;
  bool antenna_attached = true;
  bool deployed = true;
  bool online = true;
  SimTime train_duration = 1056;
};

/// Recomputes `online` from power, antenna and deployment.
GatewayState refresh(GatewayState gw);

enum class DropReason { Offline };

struct Dropped {
  DropReason reason = DropReason::Offline;
};

using ForwardResult = std::variant<BusMessage, Dropped>;

ForwardResult forward_uplink(const GatewayState& gw, std::span<const std::uint8_t> frame_bytes,
                             std::int16_t rssi_dbm, SimTime now);

struct DownlinkOutcome {
  GatewayState state;
  std::optional<AdvertisingTrain> train;  // empty when offline; request then stays queued
};

DownlinkOutcome start_downlink(GatewayState gw, PendingDownlink request, SimTime now);

/// Emits trains for everything queued while the gateway was offline.
std::pair<GatewayState, std::vector<AdvertisingTrain>> flush_downlinks(GatewayState gw, SimTime now);

/// Integrates charge over `dt_s` seconds at `harvest_w` mean harvest.
GatewayState step_power(GatewayState gw, double dt_s, double harvest_w);

GatewayState set_antenna(GatewayState gw, bool attached);
/// Damaged station battery: holds no charge until replaced.
GatewayState fail_power_station(GatewayState gw);
GatewayState replace_station_battery(GatewayState gw);

// Bus wire form used by the live bridge.
std::string uplink_topic(std::string_view site, NodeId gateway);
/// 8-byte gateway id LE, 4-byte unix seconds LE, 2-byte signed rssi LE, raw frame.
Bytes encode_bus_payload(const BusMessage& msg, std::int64_t unix_seconds);
struct DecodedBusPayload {
  NodeId gateway_id;
  std::uint32_t unix_seconds = 0;
  std::int16_t rssi_dbm = 0;
  Bytes raw_frame;
};
DecodedBusPayload decode_bus_payload(std::span<const std::uint8_t> payload);

}  // namespace borealis::gateway

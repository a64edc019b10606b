#include "borealis/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace borealis::gateway {

double daily_harvest_wh(const SolarProfile& profile, double panel_w, double day_of_year) {
  // Peak at the June solstice (day 172), trough half a year later.
  const double mid = 0.5 * (profile.max_fraction + profile.min_fraction);
  const double amp = 0.5 * (profile.max_fraction - profile.min_fraction);
  const double frac = mid + amp * std::cos(2.0 * std::numbers::pi * (day_of_year - 172.0) / 365.25);
  return panel_w * 24.0 * frac;
}

double hours_to_empty(const PowerStation& power) { return power.charge_ah / (power.load_ma / 1000.0); }

GatewayState refresh(GatewayState gw) {
  gw.online = gw.deployed && gw.antenna_attached && gw.power.charge_ah > 0.0;
  return gw;
}

ForwardResult forward_uplink(const GatewayState& gw, std::span<const std::uint8_t> frame_bytes,
                             std::int16_t rssi_dbm, SimTime now) {
  if (!gw.online) return Dropped{DropReason::Offline};
  return BusMessage{gw.id, now, rssi_dbm, Bytes(frame_bytes.begin(), frame_bytes.end())};
}

DownlinkOutcome start_downlink(GatewayState gw, PendingDownlink request, SimTime now) {
  if (!gw.online) {
    gw.downlink_queue.push_back(std::move(request));
    return {std::move(gw), std::nullopt};
  }
  AdvertisingTrain train{request.request_id, request.target, now, gw.train_duration, std::move(request.frame)};
  return {std::move(gw), std::move(train)};
}

std::pair<GatewayState, std::vector<AdvertisingTrain>> flush_downlinks(GatewayState gw, SimTime now) {
  std::vector<AdvertisingTrain> trains;
  if (!gw.online) return {std::move(gw), std::move(trains)};
  while (!gw.downlink_queue.empty()) {
    auto req = std::move(gw.downlink_queue.front());
    gw.downlink_queue.pop_front();
    trains.push_back(AdvertisingTrain{req.request_id, req.target, now, gw.train_duration, std::move(req.frame)});
  }
  return {std::move(gw), std::move(trains)};
}

GatewayState step_power(GatewayState gw, double dt_s, double harvest_w) {
  if (!(dt_s > 0.0)) throw std::invalid_argument("step_power: dt_s must be positive");
  if (harvest_w < 0.0) throw std::invalid_argument("step_power: negative harvest");
  auto& p = gw.power;
  if (p.battery_damaged) {
    p.charge_ah = 0.0;
  } else {
    const double net_a = harvest_w / p.system_v - p.load_ma / 1000.0;
    p.charge_ah = std::clamp(p.charge_ah + net_a * dt_s / 3600.0, 0.0, p.capacity_ah);
  }
  return refresh(std::move(gw));
}

GatewayState set_antenna(GatewayState gw, bool attached) {
  gw.antenna_attached = attached;
  return refresh(std::move(gw));
}

GatewayState fail_power_station(GatewayState gw) {
  gw.power.battery_damaged = true;
  gw.power.charge_ah = 0.0;
  return refresh(std::move(gw));
}

GatewayState replace_station_battery(GatewayState gw) {
  gw.power.battery_damaged = false;
  gw.power.charge_ah = gw.power.capacity_ah;
  return refresh(std::move(gw));
}

std::string uplink_topic(std::string_view site, NodeId gateway) {
  return "site/" + std::string(site) + "/gw/" + std::to_string(gateway.value()) + "/up";
}

Bytes encode_bus_payload(const BusMessage& msg, std::int64_t unix_seconds) {
  Bytes out;
  out.reserve(14 + msg.raw_frame.size());
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(msg.gateway_id.value() >> (8 * i)));
  const auto t = static_cast<std::uint32_t>(unix_seconds);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(t >> (8 * i)));
  const auto r = static_cast<std::uint16_t>(msg.rssi_dbm);
  out.push_back(static_cast<std::uint8_t>(r & 0xFF));
  out.push_back(static_cast<std::uint8_t>(r >> 8));
  out.insert(out.end(), msg.raw_frame.begin(), msg.raw_frame.end());
  return out;
}

DecodedBusPayload decode_bus_payload(std::span<const std::uint8_t> payload) {
  if (payload.size() < 14) throw std::invalid_argument("bus payload shorter than 14 bytes");
  DecodedBusPayload d;
  std::uint64_t id = 0;
  for (int i = 7; i >= 0; --i) id = (id << 8) | payload[static_cast<std::size_t>(i)];
  d.gateway_id = NodeId(id);
  for (int i = 11; i >= 8; --i) d.unix_seconds = (d.unix_seconds << 8) | payload[static_cast<std::size_t>(i)];
  d.rssi_dbm = static_cast<std::int16_t>(payload[12] | (payload[13] << 8));
  d.raw_frame.assign(payload.begin() + 14, payload.end());
  return d;
}

}  // namespace borealis::gateway

#include "borealis/simkernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <unordered_map>

#include "borealis/environment.hpp"
#include "borealis/rng.hpp"

namespace borealis::sim {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::SampleTimer: return "SampleTimer";
    case EventKind::SniffTimer: return "SniffTimer";
    case EventKind::FrameOnAir: return "FrameOnAir";
    case EventKind::BusDelivery: return "BusDelivery";
    case EventKind::FaultStart: return "FaultStart";
    case EventKind::FaultEnd: return "FaultEnd";
    case EventKind::PowerStep: return "PowerStep";
    case EventKind::Snapshot: return "Snapshot";
  }
  return "Unknown";
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::None: return "None";
    case Outcome::Transmitted: return "Transmitted";
    case Outcome::Skipped: return "Skipped";
    case Outcome::Lost: return "Lost";
    case Outcome::Dropped: return "Dropped";
    case Outcome::Forwarded: return "Forwarded";
    case Outcome::Received: return "Received";
    case Outcome::Stored: return "Stored";
    case Outcome::Answered: return "Answered";
    case Outcome::Duplicate: return "Duplicate";
    case Outcome::Rejected: return "Rejected";
    case Outcome::Detected: return "Detected";
    case Outcome::Missed: return "Missed";
    case Outcome::Applied: return "Applied";
  }
  return "Unknown";
}

namespace {

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    return a.at != b.at ? a.at > b.at : a.seq > b.seq;
  }
};

struct NodeSlot {
  std::uint32_t spec = 0;  // index into scenario nodes
  node::NodeState state;
  std::size_t site = 0;
  std::string plot;
  char transect = '-';
  SimTime deployed_at = 0;
  Rng uplink{0};
  Rng downlink{0};
  std::map<std::uint32_t, double> burials;  // fault index -> extra attenuation
  double extra_db = 0.0;
  std::optional<SimTime> pending_sample;  // the one live SampleTimer
};

struct GatewaySlot {
  gateway::GatewayState state;
  SimTime deployed_at = 0;
};

struct AirFrame {
  std::uint32_t node = 0;
  bool downlink = false;
  std::uint16_t counter = 0;
  Bytes bytes;
};

struct Train {
  std::uint64_t request = 0;
  SimTime end = 0;
  Bytes frame;
};

// Resolved fault target.
struct FaultTarget {
  std::int64_t node = -1;
  std::int64_t gateway = -1;
  std::int64_t site = -1;
};

void fold(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xFF;
    h *= 0x100000001b3ULL;
  }
}

std::uint16_t frame_counter(const Bytes& raw) {
  if (raw.size() < 11) return 0;
  return static_cast<std::uint16_t>(raw[9] | (raw[10] << 8));
}

}  // namespace

struct Simulation::Impl {
  scenario::Scenario sc;
  SimOptions opt;
  SimTime end = 0;
  SimTime now = 0;
  std::uint64_t next_seq = 0;
  std::uint64_t next_handle = 1;
  std::priority_queue<Event, std::vector<Event>, Later> queue;
  std::vector<NodeSlot> nodes;
  std::unordered_map<std::uint64_t, std::uint32_t> node_index;
  std::vector<GatewaySlot> gateways;
  std::vector<std::int64_t> site_gateway;
  std::vector<FaultTarget> fault_targets;
  std::vector<std::vector<std::uint32_t>> buried;  // per fault, nodes affected
  backend::Backend backend;
  std::unordered_map<std::uint64_t, AirFrame> in_flight;
  std::unordered_map<std::uint64_t, Train> trains;
  std::set<std::uint64_t> outstanding;
  std::size_t day_count = 0;
  std::vector<std::vector<analytics::NodeDay>> days;
  Trace trace;

  Impl(scenario::Scenario scenario, SimOptions options)
      : sc(std::move(scenario)),
        opt(options),
        backend(sc.start, registry(sc), static_cast<SimTime>(std::llround(sc.downlink_timeout_s * 1000.0))) {
    end = (sc.end - sc.start) * kMsPerSecond;
    day_count = static_cast<std::size_t>((end + kMsPerDay - 1) / kMsPerDay);

    for (std::size_t i = 0; i < sc.sites.size(); ++i) site_gateway.push_back(-1);

    for (std::size_t i = 0; i < sc.gateways.size(); ++i) {
      const auto& g = sc.gateways[i];
      GatewaySlot slot;
      slot.deployed_at = at(g.deployed_at);
      slot.state.id = g.id;
      slot.state.site = g.site;
      slot.state.position = sc.find_site(g.site)->gateway_position;
      slot.state.power = g.power;
      slot.state.antenna_attached = g.antenna_attached;
      slot.state.deployed = slot.deployed_at <= 0;
      slot.state.train_duration = static_cast<SimTime>(std::llround(g.train_duration_s * 1000.0));
      slot.state = gateway::refresh(std::move(slot.state));
      site_gateway[site_of(g.site)] = static_cast<std::int64_t>(i);
      gateways.push_back(std::move(slot));
      schedule(0, EventKind::PowerStep, static_cast<std::uint32_t>(i));
    }

    const std::int64_t period_us = node::sniff_period_us(sc.energy_budget);
    for (std::size_t i = 0; i < sc.nodes.size(); ++i) {
      const auto& spec = sc.nodes[i];
      NodeSlot slot;
      slot.spec = static_cast<std::uint32_t>(i);
      slot.site = site_of(spec.site);
      slot.plot = spec.plot;
      slot.transect = spec.transect.empty() ? '-' : spec.transect[0];
      slot.deployed_at = at(spec.deployed_at);
      slot.uplink = Rng::substream(sc.seed, spec.id.value(), "uplink");
      slot.downlink = Rng::substream(sc.seed, spec.id.value(), "downlink");
      Rng phase = Rng::substream(sc.seed, spec.id.value(), "phase");
      const auto offset_ms = static_cast<SimTime>(phase.below(spec.sampling_interval_s)) * kMsPerSecond;
      const auto sniff_phase_us = static_cast<std::int64_t>(phase.below(static_cast<std::uint64_t>(period_us)));

      node::NodeSetup setup;
      setup.id = spec.id;
      setup.config = alp::NodeConfig{spec.kind, spec.sampling_interval_s, spec.resolution_bits};
      setup.battery = node::BatteryState::fresh(spec.battery_ah, spec.battery_v);
      setup.position = spec.position;
      setup.budget = sc.energy_budget;
      setup.first_sample_at = slot.deployed_at + offset_ms;
      setup.sniff_origin_us = slot.deployed_at * 1000 + sniff_phase_us;
      slot.state = node::make_node(setup);
      node_index.emplace(spec.id.value(), static_cast<std::uint32_t>(i));
      nodes.push_back(std::move(slot));
      schedule_sample(static_cast<std::uint32_t>(i), nodes.back().state.next_sample_at);
    }

    days.assign(nodes.size(), std::vector<analytics::NodeDay>(day_count));
    for (std::size_t f = 0; f < sc.faults.size(); ++f) arm_fault(static_cast<std::uint32_t>(f));
    if (day_count > 0) schedule(0, EventKind::Snapshot, 0);
  }

  static backend::NodeRegistry registry(const scenario::Scenario& s) {
    backend::NodeRegistry r;
    for (const auto& n : s.nodes) r.emplace(n.id, backend::NodeLabels{n.name, n.site, n.plot, n.transect});
    return r;
  }

  SimTime at(std::int64_t unix_seconds) const { return (unix_seconds - sc.start) * kMsPerSecond; }
  std::int64_t unix_at(SimTime t) const {
    SimTime s = t / kMsPerSecond;
    if (t % kMsPerSecond < 0) --s;
    return sc.start + s;
  }

  std::size_t site_of(std::string_view id) const {
    for (std::size_t i = 0; i < sc.sites.size(); ++i)
      if (sc.sites[i].id == id) return i;
    throw Error(Errc::InvalidScenario, "unknown site '" + std::string(id) + "'");
  }

  void schedule(SimTime t, EventKind kind, std::uint32_t subject, std::uint64_t ref = 0) {
    if (t >= end) return;
    queue.push(Event{t, next_seq++, kind, subject, ref});
  }

  void schedule_sample(std::uint32_t n, SimTime t) {
    nodes[n].pending_sample.reset();
    if (t >= end) return;
    nodes[n].pending_sample = t;
    schedule(t, EventKind::SampleTimer, n);
  }

  // Keeps the sample timer in step with next_sample_at after a config change.
  void resync_sample(std::uint32_t n, SimTime t) {
    const auto& slot = nodes[n];
    if (slot.state.battery.exhausted()) return;
    const SimTime want = std::max(slot.state.next_sample_at, t);
    if (slot.pending_sample != want) schedule_sample(n, want);
  }

  void record(const Event& e, Outcome outcome, std::uint16_t counter = 0, bool downlink = false,
              std::uint64_t cause = 0) {
    ++trace.events;
    ++trace.by_kind[static_cast<std::size_t>(e.kind)];
    std::uint64_t& h = trace.digest;
    fold(h, static_cast<std::uint64_t>(e.at));
    fold(h, e.seq);
    fold(h, (static_cast<std::uint64_t>(e.kind) << 16) | (static_cast<std::uint64_t>(outcome) << 8) |
                static_cast<std::uint64_t>(downlink));
    fold(h, (static_cast<std::uint64_t>(e.subject) << 16) | counter);
    fold(h, cause);
    if (opt.record_events) trace.records.push_back(TraceRecord{e.at, e.seq, e.kind, outcome, downlink, e.subject, counter, cause});
  }

  environment::LinkBudget link_for(const NodeSlot& n, SimTime t) const {
    const auto& site = sc.sites[n.site];
    const double d = std::max(1.0, distance(n.state.position, site.gateway_position));
    return environment::link_budget(d, environment::season_at(unix_at(t)), sc.link_params, site, n.extra_db);
  }

  void expire_due(SimTime t) {
    if (outstanding.empty()) return;
    for (const auto id : backend.expire(t)) outstanding.erase(id);
  }

  // --- downlink ---------------------------------------------------------------

  void begin_train(const gateway::AdvertisingTrain& train) {
    if (backend.request(train.request_id).state != backend::RequestState::Queued) return;
    backend.mark_on_air(train.request_id, train.start);
    const auto it = node_index.find(train.target.value());
    if (it == node_index.end()) return;
    const auto& st = nodes[it->second].state;
    const SimTime first = st.sniff_time(std::max(st.next_sniff_index, st.first_sniff_at_or_after(train.start)));
    if (first >= train.end()) return;
    const std::uint64_t handle = next_handle++;
    trains.emplace(handle, Train{train.request_id, train.end(), train.frame});
    schedule(first, EventKind::SniffTimer, it->second, handle);
  }

  void flush(std::size_t g) {
    auto& gw = gateways[g];
    if (!gw.state.online || gw.state.downlink_queue.empty()) return;
    auto [state, trains_out] = gateway::flush_downlinks(std::move(gw.state), now);
    gw.state = std::move(state);
    for (const auto& t : trains_out) begin_train(t);
  }

  std::uint64_t issue(std::uint32_t n, const backend::DownlinkRequest& req) {
    outstanding.insert(req.id);
    const std::int64_t g = site_gateway[nodes[n].site];
    if (g < 0) return req.id;
    auto& gw = gateways[static_cast<std::size_t>(g)];
    auto out = gateway::start_downlink(std::move(gw.state),
                                       gateway::PendingDownlink{req.id, req.target, alp::encode_frame(req.frame)}, now);
    gw.state = std::move(out.state);
    if (out.train) begin_train(*out.train);
    return req.id;
  }

  // --- faults -----------------------------------------------------------------

  void arm_fault(std::uint32_t f) {
    const auto& spec = sc.faults[f];
    FaultTarget t;
    for (std::size_t i = 0; i < sc.nodes.size(); ++i)
      if (sc.nodes[i].name == spec.target) t.node = static_cast<std::int64_t>(i);
    for (std::size_t i = 0; i < sc.gateways.size(); ++i)
      if (sc.gateways[i].name == spec.target) t.gateway = static_cast<std::int64_t>(i);
    for (std::size_t i = 0; i < sc.sites.size(); ++i)
      if (sc.sites[i].id == spec.target) t.site = static_cast<std::int64_t>(i);
    fault_targets.push_back(t);
    buried.emplace_back();
    schedule(std::max<SimTime>(at(spec.start), now), EventKind::FaultStart, f);
    if (spec.end) schedule(std::max<SimTime>(at(*spec.end), now), EventKind::FaultEnd, f);
  }

  void refresh_gateway(std::size_t g) {
    auto& gw = gateways[g];
    gw.state = gateway::refresh(std::move(gw.state));
    flush(g);
  }

  void replace_node_battery(std::uint32_t n, SimTime t) {
    auto& slot = nodes[n];
    auto r = node::node_step(std::move(slot.state), node::BatteryReplace{}, t);
    slot.state = std::move(r.state);
    if (!slot.pending_sample) schedule_sample(n, std::max(slot.state.next_sample_at, t));
  }

  void set_burial(std::uint32_t n, std::uint32_t f, std::optional<double> db) {
    auto& slot = nodes[n];
    if (db)
      slot.burials[f] = *db;
    else
      slot.burials.erase(f);
    slot.extra_db = 0.0;
    for (const auto& [_, v] : slot.burials) slot.extra_db += v;
  }

  void apply_fault(const Event& e, bool starting) {
    const auto& spec = sc.faults[e.subject];
    const auto& t = fault_targets[e.subject];
    switch (spec.kind) {
      case scenario::FaultKind::AntennaDetach: {
        auto& gw = gateways[static_cast<std::size_t>(t.gateway)];
        gw.state = gateway::set_antenna(std::move(gw.state), !starting);
        refresh_gateway(static_cast<std::size_t>(t.gateway));
        break;
      }
      case scenario::FaultKind::PowerStationFailure: {
        auto& gw = gateways[static_cast<std::size_t>(t.gateway)];
        gw.state = starting ? gateway::fail_power_station(std::move(gw.state))
                            : gateway::replace_station_battery(std::move(gw.state));
        refresh_gateway(static_cast<std::size_t>(t.gateway));
        break;
      }
      case scenario::FaultKind::BatteryReplace:
        if (!starting) break;
        if (t.node >= 0) {
          replace_node_battery(static_cast<std::uint32_t>(t.node), e.at);
        } else if (t.gateway >= 0) {
          auto& gw = gateways[static_cast<std::size_t>(t.gateway)];
          gw.state = gateway::replace_station_battery(std::move(gw.state));
          refresh_gateway(static_cast<std::size_t>(t.gateway));
        }
        break;
      case scenario::FaultKind::NodeRelocation: {
        if (!starting) break;
        auto& slot = nodes[static_cast<std::size_t>(t.node)];
        const auto& node_spec = sc.nodes[slot.spec];
        slot.state = node::settle(std::move(slot.state), e.at);
        slot.site = site_of(spec.to_site);
        if (!spec.to_plot.empty()) slot.plot = spec.to_plot;
        if (spec.to_position) slot.state.position = *spec.to_position;
        backend.relabel(node_spec.id, backend::NodeLabels{node_spec.name, spec.to_site, slot.plot, node_spec.transect});
        break;
      }
      case scenario::FaultKind::SnowBurial:
        if (starting) {
          auto& list = buried[e.subject];
          list.clear();
          for (std::uint32_t n = 0; n < nodes.size(); ++n)
            if ((t.node >= 0 && n == static_cast<std::uint32_t>(t.node)) ||
                (t.node < 0 && t.site >= 0 && nodes[n].site == static_cast<std::size_t>(t.site)))
              list.push_back(n);
          for (const auto n : list) set_burial(n, e.subject, spec.attenuation_db);
        } else {
          for (const auto n : buried[e.subject]) set_burial(n, e.subject, std::nullopt);
        }
        break;
    }
    record(e, Outcome::Applied);
  }

  // --- dispatch ---------------------------------------------------------------

  void on_sample(const Event& e) {
    auto& slot = nodes[e.subject];
    if (slot.pending_sample != e.at) {
      record(e, Outcome::Skipped);
      return;
    }
    slot.pending_sample.reset();
    const auto kind = slot.state.config.kind;
    const double value = environment::sensor_reading(sc.sites[slot.site], kind, slot.plot, slot.transect,
                                                     unix_at(e.at), sc.seed);
    auto r = node::node_step(std::move(slot.state), node::SampleTimer{{kind, value}}, e.at);
    slot.state = std::move(r.state);
    std::uint16_t counter = 0;
    for (auto& action : r.actions) {
      counter = action.frame.counter;
      const std::uint64_t handle = next_handle++;
      in_flight.emplace(handle, AirFrame{e.subject, false, counter, alp::encode_frame(action.frame)});
      schedule(e.at, EventKind::FrameOnAir, e.subject, handle);
    }
    record(e, r.actions.empty() ? Outcome::Skipped : Outcome::Transmitted, counter);
    if (slot.state.next_sample_at > e.at) schedule_sample(e.subject, slot.state.next_sample_at);
  }

  void on_sniff(const Event& e) {
    const auto it = trains.find(e.ref);
    if (it == trains.end()) {
      record(e, Outcome::Skipped);
      return;
    }
    if (backend.request(it->second.request).state != backend::RequestState::OnAir) {
      trains.erase(it);
      record(e, Outcome::Skipped);
      return;
    }
    auto& slot = nodes[e.subject];
    const bool heard = environment::draw_delivery(slot.downlink, link_for(slot, e.at)).delivered;
    const bool was_listening = slot.state.phase == node::Phase::ReceiveWindow;
    auto r = node::node_step(std::move(slot.state), node::SniffTimer{heard}, e.at);
    slot.state = std::move(r.state);
    if (heard && !was_listening && slot.state.phase == node::Phase::ReceiveWindow) {
      const std::uint64_t handle = next_handle++;
      Bytes frame = std::move(it->second.frame);
      const auto counter = frame_counter(frame);
      in_flight.emplace(handle, AirFrame{e.subject, true, counter, std::move(frame)});
      trains.erase(it);
      schedule(e.at + opt.air_gap, EventKind::FrameOnAir, e.subject, handle);
      record(e, Outcome::Detected, counter, true);
      return;
    }
    const SimTime next = slot.state.next_sniff_at();
    if (next > e.at && next < it->second.end)
      schedule(next, EventKind::SniffTimer, e.subject, e.ref);
    else
      trains.erase(it);
    record(e, Outcome::Missed, 0, true);
  }

  void on_frame(const Event& e) {
    auto node_it = in_flight.find(e.ref);
    AirFrame air = std::move(node_it->second);
    in_flight.erase(node_it);
    auto& slot = nodes[air.node];

    if (air.downlink) {
      alp::AlpFrame frame = alp::decode_frame(air.bytes);
      auto r = node::node_step(std::move(slot.state), node::FrameArrival{std::move(frame)}, e.at);
      slot.state = std::move(r.state);
      for (auto& action : r.actions) {
        const std::uint64_t handle = next_handle++;
        in_flight.emplace(handle, AirFrame{air.node, false, action.frame.counter, alp::encode_frame(action.frame)});
        schedule(e.at + opt.air_gap, EventKind::FrameOnAir, air.node, handle);
      }
      resync_sample(air.node, e.at);
      record(e, r.actions.empty() ? Outcome::Skipped : Outcome::Received, air.counter, true);
      return;
    }

    const auto delivery = environment::draw_delivery(slot.uplink, link_for(slot, e.at));
    const std::int64_t g = site_gateway[slot.site];
    if (g < 0 || !delivery.delivered) {
      record(e, Outcome::Lost, air.counter);
      return;
    }
    auto& gw = gateways[static_cast<std::size_t>(g)];
    const auto rssi = static_cast<std::int16_t>(std::clamp<long>(std::lround(delivery.rssi_dbm), -32768, 32767));
    auto forwarded = gateway::forward_uplink(gw.state, air.bytes, rssi, e.at);
    if (auto* msg = std::get_if<gateway::BusMessage>(&forwarded)) {
      gw.state.uplink_queue.push_back(std::move(*msg));
      schedule(e.at + opt.bus_latency, EventKind::BusDelivery, static_cast<std::uint32_t>(g), e.seq);
      record(e, Outcome::Forwarded, air.counter);
    } else {
      record(e, Outcome::Dropped, air.counter);
    }
  }

  void on_bus(const Event& e) {
    auto& gw = gateways[e.subject];
    gateway::BusMessage msg = std::move(gw.state.uplink_queue.front());
    gw.state.uplink_queue.pop_front();
    expire_due(e.at);
    const auto counter = frame_counter(msg.raw_frame);
    const auto result = backend.ingest(msg);
    Outcome outcome = Outcome::Rejected;
    switch (result.status) {
      case backend::IngestStatus::Stored: outcome = Outcome::Stored; break;
      case backend::IngestStatus::Answered: outcome = Outcome::Answered; break;
      case backend::IngestStatus::Duplicate: outcome = Outcome::Duplicate; break;
      case backend::IngestStatus::Rejected: outcome = Outcome::Rejected; break;
    }
    if (result.answered_request) outstanding.erase(*result.answered_request);
    record(e, outcome, counter, false, e.ref);
  }

  void on_power(const Event& e) {
    auto& gw = gateways[e.subject];
    const double dt_s = static_cast<double>(opt.power_step) / 1000.0;
    if (e.at > 0 && gw.state.deployed) {
      const double doy = environment::annual_day(unix_at(e.at - opt.power_step / 2));
      const double harvest_w = gateway::daily_harvest_wh(gw.state.power.solar, gw.state.power.panel_w, doy) / 24.0;
      gw.state = gateway::step_power(std::move(gw.state), dt_s, harvest_w);
    }
    gw.state.deployed = e.at >= gw.deployed_at;
    refresh_gateway(e.subject);
    record(e, Outcome::Applied);
    schedule(e.at + opt.power_step, EventKind::PowerStep, e.subject);
  }

  void on_snapshot(const Event& e) {
    const std::size_t d = e.subject;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      auto& slot = nodes[n];
      analytics::NodeDay day;
      day.exists = slot.deployed_at <= e.at;
      day.site = static_cast<std::uint16_t>(slot.site);
      day.interval_s = slot.state.config.sampling_interval_s;
      if (day.exists) {
        slot.state = node::settle(std::move(slot.state), e.at);
        day.battery_mv = slot.state.battery.voltage_mv;
      }
      days[n][d] = day;
    }
    record(e, Outcome::Applied);
    if (d + 1 < day_count) schedule(static_cast<SimTime>(d + 1) * kMsPerDay, EventKind::Snapshot, e.subject + 1);
  }

  void dispatch(const Event& e) {
    switch (e.kind) {
      case EventKind::SampleTimer: on_sample(e); break;
      case EventKind::SniffTimer: on_sniff(e); break;
      case EventKind::FrameOnAir: on_frame(e); break;
      case EventKind::BusDelivery: on_bus(e); break;
      case EventKind::FaultStart: apply_fault(e, true); break;
      case EventKind::FaultEnd: apply_fault(e, false); break;
      case EventKind::PowerStep: on_power(e); break;
      case EventKind::Snapshot: on_snapshot(e); break;
    }
  }

  void run_until(SimTime t) {
    t = std::min(t, end);
    while (!queue.empty() && queue.top().at < t) {
      const Event e = queue.top();
      queue.pop();
      now = e.at;
      dispatch(e);
    }
    now = std::max(now, t);
    expire_due(now);
  }

  std::uint32_t index_of(NodeId id) const {
    const auto it = node_index.find(id.value());
    if (it == node_index.end()) throw Error(Errc::UnknownNode, "unknown node " + std::to_string(id.value()));
    return it->second;
  }
};

Simulation::Simulation(scenario::Scenario scenario, SimOptions options) {
  try {
    scenario::validate(scenario);
  } catch (const scenario::ScenarioError& e) {
    throw Error(Errc::InvalidScenario, e.what());
  }
  impl_ = std::make_unique<Impl>(std::move(scenario), options);
}

Simulation::~Simulation() = default;

SimTime Simulation::now() const { return impl_->now; }
SimTime Simulation::end() const { return impl_->end; }
SimTime Simulation::at(std::int64_t unix_seconds) const { return impl_->at(unix_seconds); }
void Simulation::run_until(SimTime t) { impl_->run_until(t); }
void Simulation::run() { impl_->run_until(impl_->end); }

std::uint64_t Simulation::query_node(NodeId target, alp::FileId file) {
  const auto n = impl_->index_of(target);
  return impl_->issue(n, impl_->backend.query_node(target, file, impl_->now));
}

std::uint64_t Simulation::update_config(NodeId target, const alp::NodeConfig& config) {
  const auto n = impl_->index_of(target);
  return impl_->issue(n, impl_->backend.update_config(target, config, impl_->now));
}

backend::DownlinkRequest Simulation::request(std::uint64_t id) const { return impl_->backend.request(id); }

void Simulation::inject(const scenario::FaultSpec& fault) {
  if (impl_->at(fault.start) < impl_->now)
    throw Error(Errc::FaultInPast, "fault starts before the current simulated time");
  impl_->sc = scenario::inject(std::move(impl_->sc), fault);
  impl_->arm_fault(static_cast<std::uint32_t>(impl_->sc.faults.size() - 1));
}

const scenario::Scenario& Simulation::scenario() const { return impl_->sc; }
const backend::Backend& Simulation::backend() const { return impl_->backend; }
const node::NodeState& Simulation::node(NodeId id) const { return impl_->nodes[impl_->index_of(id)].state; }

const gateway::GatewayState& Simulation::gateway(std::string_view site) const {
  for (const auto& g : impl_->gateways)
    if (g.state.site == site) return g.state;
  throw Error(Errc::UnknownNode, "no gateway at site '" + std::string(site) + "'");
}

const Trace& Simulation::trace() const { return impl_->trace; }

analytics::AnalyticsInput Simulation::analytics_input() const {
  const auto& im = *impl_;
  analytics::AnalyticsInput in;
  in.epoch = im.sc.start;
  in.day_count = im.day_count;
  for (const auto& s : im.sc.sites) in.sites.push_back(s.id);
  for (const auto& n : im.sc.nodes) in.nodes.push_back(analytics::NodeInfo{n.id, n.name, n.kind});
  in.days = im.days;
  for (const auto& slot : im.nodes) {
    if (slot.deployed_at <= im.now)
      in.energy.push_back(node::settle(slot.state, im.now).spent);
    else
      in.energy.push_back(slot.state.spent);
  }
  in.budget = im.sc.energy_budget;
  return in;
}

RunResult run(const scenario::Scenario& scenario, SimOptions options) {
  Simulation sim(scenario, options);
  sim.run();
  return RunResult{sim.trace(), sim.backend().snapshot(), sim.analytics_input()};
}

}  // namespace borealis::sim

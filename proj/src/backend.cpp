#include "borealis/backend.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <sstream>

namespace borealis::backend {

// --- store --------------------------------------------------------------------

std::uint32_t TimeSeriesStore::intern(const Measurement& m) {
  Place p{m.site, m.plot, m.transect};
  const auto it = place_index_.find(p);
  if (it != place_index_.end()) return it->second;
  const auto idx = static_cast<std::uint32_t>(places_.size());
  places_.push_back(p);
  place_index_.emplace(std::move(p), idx);
  return idx;
}

bool TimeSeriesStore::append(const Measurement& m) {
  auto& series = series_[m.node];
  const auto pos = std::lower_bound(series.begin(), series.end(), m.sampled_at,
                                    [](const Sample& s, std::int64_t t) { return s.sampled_at < t; });
  if (pos != series.end() && pos->sampled_at == m.sampled_at) return false;
  Sample s{m.sampled_at, m.received_at, m.gateway_id.value(), m.value_scaled, m.battery_mv, m.rssi_dbm, m.kind,
           intern(m)};
  series.insert(pos, s);
  ++size_;
  return true;
}

bool TimeSeriesStore::contains(NodeId node, std::int64_t sampled_at) const {
  const auto it = series_.find(node);
  if (it == series_.end()) return false;
  return std::binary_search(it->second.begin(), it->second.end(), Sample{sampled_at},
                            [](const Sample& a, const Sample& b) { return a.sampled_at < b.sampled_at; });
}

std::vector<NodeId> TimeSeriesStore::nodes() const {
  std::vector<NodeId> out;
  out.reserve(series_.size());
  for (const auto& [id, series] : series_)
    if (!series.empty()) out.push_back(id);
  return out;
}

const std::vector<TimeSeriesStore::Sample>& TimeSeriesStore::series(NodeId node) const {
  static const std::vector<Sample> kEmpty;
  const auto it = series_.find(node);
  return it == series_.end() ? kEmpty : it->second;
}

Measurement TimeSeriesStore::materialize(NodeId node, const Sample& s) const {
  const Place& p = places_.at(s.place);
  return Measurement{node,         p.site,      p.plot,       p.transect, s.kind, s.value_scaled, s.sampled_at,
                     s.received_at, s.rssi_dbm, s.battery_mv, NodeId(s.gateway)};
}

std::vector<Measurement> TimeSeriesStore::measurements(NodeId node) const {
  std::vector<Measurement> out;
  const auto& s = series(node);
  out.reserve(s.size());
  for (const auto& sample : s) out.push_back(materialize(node, sample));
  return out;
}

std::vector<Measurement> TimeSeriesStore::all() const {
  std::vector<Measurement> out;
  out.reserve(size_);
  for (const auto& [id, series] : series_)
    for (const auto& sample : series) out.push_back(materialize(id, sample));
  return out;
}

std::size_t TimeSeriesStore::count(NodeId node, std::int64_t from, std::int64_t to) const {
  const auto& s = series(node);
  auto by_time = [](const Sample& a, std::int64_t t) { return a.sampled_at < t; };
  const auto lo = std::lower_bound(s.begin(), s.end(), from, by_time);
  const auto hi = std::lower_bound(lo, s.end(), to, by_time);
  return static_cast<std::size_t>(hi - lo);
}

// --- dedup ----------------------------------------------------------------------

bool DedupWindow::accept(std::uint16_t counter) {
  if (!any_) {
    any_ = true;
    highest_ = counter;
    seen_.reset();
    seen_.set(0);
    return true;
  }
  const auto ahead = static_cast<std::uint16_t>(counter - highest_);
  if (ahead == 0) return false;
  if (ahead < 0x8000) {
    if (ahead >= kWidth)
      seen_.reset();
    else
      seen_ <<= ahead;
    seen_.set(0);
    highest_ = counter;
    return true;
  }
  const auto behind = static_cast<std::uint16_t>(highest_ - counter);
  // Anything older than the window is treated as a stale replay.
  if (behind >= kWidth || seen_.test(behind)) return false;
  seen_.set(behind);
  return true;
}

// --- backend --------------------------------------------------------------------

std::string_view to_string(RequestState s) {
  switch (s) {
    case RequestState::Queued: return "Queued";
    case RequestState::OnAir: return "OnAir";
    case RequestState::Answered: return "Answered";
    case RequestState::Expired: return "Expired";
  }
  return "Unknown";
}

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::BadCrc: return "BadCrc";
    case RejectReason::UnknownOp: return "UnknownOp";
    case RejectReason::UnknownFile: return "UnknownFile";
    case RejectReason::TooShort: return "TooShort";
    case RejectReason::Malformed: return "Malformed";
    case RejectReason::UnknownNode: return "UnknownNode";
    case RejectReason::BadRecord: return "BadRecord";
  }
  return "Unknown";
}

Measurement to_measurement(const alp::AlpFrame& frame, const NodeLabels& labels, const gateway::BusMessage& msg,
                           std::int64_t epoch_unix_s) {
  const alp::SensorDataRecord record = alp::parse_sensor_record(frame.payload);
  Measurement m;
  m.node = frame.origin;
  m.site = labels.site;
  m.plot = labels.plot;
  m.transect = labels.transect;
  m.kind = record.kind;
  m.value_scaled = record.value_scaled;
  m.sampled_at = epoch_unix_s + record.timestamp;
  m.received_at = epoch_unix_s * 1000 + msg.received_at;
  m.rssi_dbm = msg.rssi_dbm;
  m.battery_mv = record.battery_mv;
  m.gateway_id = msg.gateway_id;
  return m;
}

Backend::Backend(std::int64_t epoch_unix_s, NodeRegistry registry, SimTime downlink_timeout)
    : epoch_(epoch_unix_s), registry_(std::move(registry)), timeout_(downlink_timeout) {}

IngestResult Backend::reject(NodeId gateway, RejectReason reason) {
  ++rejections_[gateway][reason];
  IngestResult r;
  r.status = IngestStatus::Rejected;
  r.reason = reason;
  return r;
}

std::optional<std::uint64_t> Backend::resolve(NodeId node, alp::FileId file, const Bytes& payload, SimTime now) {
  // A missed train leaves its request on air until it expires, so the newest
  // in-flight request is the one the node can have answered.
  for (auto it = requests_.rbegin(); it != requests_.rend(); ++it) {
    auto& [id, req] = *it;
    if (req.target != node || req.frame.file != file) continue;
    if (req.state != RequestState::OnAir) continue;
    req.state = RequestState::Answered;
    req.answered_at = now;
    req.answer = payload;
    return id;
  }
  return std::nullopt;
}

IngestResult Backend::ingest(const gateway::BusMessage& msg) {
  std::lock_guard lock(mutex_);
  alp::AlpFrame frame;
  try {
    frame = alp::decode_frame(msg.raw_frame);
  } catch (const alp::Error& e) {
    switch (e.code()) {
      case alp::Errc::BadCrc: return reject(msg.gateway_id, RejectReason::BadCrc);
      case alp::Errc::UnknownOp: return reject(msg.gateway_id, RejectReason::UnknownOp);
      case alp::Errc::TooShort: return reject(msg.gateway_id, RejectReason::TooShort);
      default: return reject(msg.gateway_id, RejectReason::Malformed);
    }
  }
  const auto known = registry_.find(frame.origin);
  if (known == registry_.end()) return reject(msg.gateway_id, RejectReason::UnknownNode);
  if (!alp::is_registered(frame.file)) return reject(msg.gateway_id, RejectReason::UnknownFile);
  if (frame.op != alp::Op::ReturnFileData) return reject(msg.gateway_id, RejectReason::UnknownOp);

  std::optional<Measurement> m;
  if (frame.file == alp::kSensorDataFile && !frame.payload.empty()) {
    try {
      m = to_measurement(frame, known->second, msg, epoch_);
    } catch (const alp::Error&) {
      return reject(msg.gateway_id, RejectReason::BadRecord);
    }
  }

  IngestResult result;
  result.status = IngestStatus::Duplicate;
  if (!dedup_[frame.origin].accept(frame.counter)) return result;

  result.answered_request = resolve(frame.origin, frame.file, frame.payload, msg.received_at);
  if (result.answered_request) result.status = IngestStatus::Answered;
  if (m && store_.append(*m)) {
    result.status = IngestStatus::Stored;
    result.measurement = std::move(m);
  }
  return result;
}

DownlinkRequest& Backend::enqueue(NodeId target, alp::AlpFrame frame, SimTime now) {
  DownlinkRequest req;
  req.id = next_request_++;
  req.target = target;
  req.frame = std::move(frame);
  req.issued_at = now;
  return requests_.emplace(req.id, std::move(req)).first->second;
}

DownlinkRequest Backend::query_node(NodeId target, alp::FileId file, SimTime now) {
  std::lock_guard lock(mutex_);
  if (!registry_.contains(target)) throw Error(Errc::UnknownNode, "unknown node " + std::to_string(target.value()));
  return enqueue(target, alp::make_read_request(kBackendId, counter_++, file), now);
}

DownlinkRequest Backend::update_config(NodeId target, const alp::NodeConfig& cfg, SimTime now) {
  std::lock_guard lock(mutex_);
  if (!registry_.contains(target)) throw Error(Errc::UnknownNode, "unknown node " + std::to_string(target.value()));
  try {
    alp::validate(cfg);
  } catch (const alp::Error& e) {
    throw Error(Errc::InvalidConfig, e.what());
  }
  return enqueue(target, alp::make_config_write(kBackendId, counter_++, cfg), now);
}

DownlinkRequest Backend::request(std::uint64_t id) const {
  std::lock_guard lock(mutex_);
  const auto it = requests_.find(id);
  if (it == requests_.end()) throw Error(Errc::UnknownRequest, "unknown request " + std::to_string(id));
  return it->second;
}

std::vector<DownlinkRequest> Backend::requests() const {
  std::lock_guard lock(mutex_);
  std::vector<DownlinkRequest> out;
  for (const auto& [id, req] : requests_) out.push_back(req);
  return out;
}

void Backend::mark_on_air(std::uint64_t id, SimTime now) {
  std::lock_guard lock(mutex_);
  auto it = requests_.find(id);
  if (it == requests_.end()) throw Error(Errc::UnknownRequest, "unknown request " + std::to_string(id));
  if (it->second.state == RequestState::Queued) {
    it->second.state = RequestState::OnAir;
    it->second.on_air_at = now;
  }
}

std::vector<std::uint64_t> Backend::expire(SimTime now) {
  std::lock_guard lock(mutex_);
  std::vector<std::uint64_t> out;
  for (auto& [id, req] : requests_) {
    const bool open = req.state == RequestState::Queued || req.state == RequestState::OnAir;
    if (open && now - req.issued_at >= timeout_) {
      req.state = RequestState::Expired;
      out.push_back(id);
    }
  }
  return out;
}

TimeSeriesStore Backend::snapshot() const {
  std::lock_guard lock(mutex_);
  return store_;
}

std::size_t Backend::stored() const {
  std::lock_guard lock(mutex_);
  return store_.size();
}

std::map<RejectReason, std::uint64_t> Backend::rejections(NodeId gateway) const {
  std::lock_guard lock(mutex_);
  const auto it = rejections_.find(gateway);
  return it == rejections_.end() ? std::map<RejectReason, std::uint64_t>{} : it->second;
}

void Backend::relabel(NodeId node, NodeLabels labels) {
  std::lock_guard lock(mutex_);
  registry_[node] = std::move(labels);
}

// --- export ---------------------------------------------------------------------

ExportFormat parse_format(std::string_view name) {
  if (name == "csv") return ExportFormat::Csv;
  if (name == "lp" || name == "line-protocol") return ExportFormat::LineProtocol;
  throw Error(Errc::UnknownFormat, "unknown export format '" + std::string(name) + "'");
}

bool Selector::matches(const Measurement& m) const {
  if (nodes && std::find(nodes->begin(), nodes->end(), m.node) == nodes->end()) return false;
  if (site && m.site != *site) return false;
  if (from && m.sampled_at < *from) return false;
  if (to && m.sampled_at >= *to) return false;
  return true;
}

std::string format_centi(std::int32_t value_scaled) {
  const std::int64_t v = value_scaled;
  const std::int64_t mag = v < 0 ? -v : v;
  std::string out = v < 0 ? "-" : "";
  out += std::to_string(mag / 100);
  out.push_back('.');
  out.push_back(static_cast<char>('0' + (mag % 100) / 10));
  out.push_back(static_cast<char>('0' + mag % 10));
  return out;
}

namespace {

void write_row(std::string& buf, const Measurement& m, ExportFormat format) {
  if (format == ExportFormat::Csv) {
    buf += std::to_string(m.node.value());
    buf += ',';
    buf += m.site;
    buf += ',';
    buf += m.plot;
    buf += ',';
    buf += m.transect;
    buf += ',';
    buf += alp::to_string(m.kind);
    buf += ',';
    buf += std::to_string(m.sampled_at);
    buf += ',';
    buf += format_centi(m.value_scaled);
    buf += ',';
    buf += std::to_string(m.battery_mv);
    buf += ',';
    buf += std::to_string(m.rssi_dbm);
    buf += ',';
    buf += std::to_string(m.gateway_id.value());
    buf += '\n';
    return;
  }
  buf += alp::to_string(m.kind);
  buf += ",node=";
  buf += std::to_string(m.node.value());
  auto tag = [&buf](std::string_view key, const std::string& value) {
    if (value.empty()) return;
    buf += ',';
    buf += key;
    buf += '=';
    buf += value;
  };
  tag("site", m.site);
  tag("plot", m.plot);
  tag("transect", m.transect);
  buf += " value=";
  buf += format_centi(m.value_scaled);
  buf += ",battery_mv=";
  buf += std::to_string(m.battery_mv);
  buf += "i,rssi_dbm=";
  buf += std::to_string(m.rssi_dbm);
  buf += "i ";
  buf += std::to_string(m.sampled_at);
  buf += "000000000\n";
}

void write_header(std::ostream& out, ExportFormat format) {
  if (format == ExportFormat::Csv) out << kCsvHeader << '\n';
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_int(std::string_view s, std::string_view what) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw Error(Errc::ParseError, "bad " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

std::int32_t parse_centi(std::string_view s) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw Error(Errc::ParseError, "bad value '" + std::string(s) + "'");
  return alp::scale_to_centi(v);
}

alp::SensorKind parse_kind(std::string_view s) {
  const auto k = alp::sensor_kind_from_string(s);
  if (!k) throw Error(Errc::ParseError, "unknown sensor kind '" + std::string(s) + "'");
  return *k;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto line : split(text, '\n'))
    if (!line.empty()) out.push_back(line);
  return out;
}

}  // namespace

void export_to(std::ostream& out, const TimeSeriesStore& store, const Selector& selector, ExportFormat format) {
  write_header(out, format);
  std::string buf;
  for (NodeId node : store.nodes()) {
    if (selector.nodes && std::find(selector.nodes->begin(), selector.nodes->end(), node) == selector.nodes->end())
      continue;
    buf.clear();
    for (const auto& m : store.measurements(node))
      if (selector.matches(m)) write_row(buf, m, format);
    out << buf;
  }
}

std::string export_measurements(const TimeSeriesStore& store, const Selector& selector, ExportFormat format) {
  std::ostringstream out;
  export_to(out, store, selector, format);
  return std::move(out).str();
}

void export_to(std::ostream& out, const std::vector<Measurement>& rows, ExportFormat format) {
  write_header(out, format);
  std::string buf;
  for (const auto& m : rows) write_row(buf, m, format);
  out << buf;
}

std::string export_measurements(const std::vector<Measurement>& rows, ExportFormat format) {
  std::ostringstream out;
  export_to(out, rows, format);
  return std::move(out).str();
}

std::vector<Measurement> parse_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != kCsvHeader) throw Error(Errc::ParseError, "missing CSV header");
  std::vector<Measurement> out;
  out.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 10) throw Error(Errc::ParseError, "line " + std::to_string(i + 1) + ": expected 10 fields");
    Measurement m;
    m.node = NodeId(parse_int<std::uint64_t>(f[0], "node"));
    m.site = f[1];
    m.plot = f[2];
    m.transect = f[3];
    m.kind = parse_kind(f[4]);
    m.sampled_at = parse_int<std::int64_t>(f[5], "sampled_at");
    m.value_scaled = parse_centi(f[6]);
    m.battery_mv = parse_int<std::uint16_t>(f[7], "battery_mv");
    m.rssi_dbm = parse_int<std::int16_t>(f[8], "rssi_dbm");
    m.gateway_id = NodeId(parse_int<std::uint64_t>(f[9], "gateway_id"));
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<Measurement> parse_line_protocol(std::string_view text) {
  std::vector<Measurement> out;
  for (auto line : lines_of(text)) {
    const auto parts = split(line, ' ');
    if (parts.size() != 3) throw Error(Errc::ParseError, "line protocol: expected 3 sections");
    Measurement m;
    const auto tags = split(parts[0], ',');
    m.kind = parse_kind(tags[0]);
    for (std::size_t i = 1; i < tags.size(); ++i) {
      const auto eq = tags[i].find('=');
      if (eq == std::string_view::npos) throw Error(Errc::ParseError, "line protocol: bad tag");
      const auto key = tags[i].substr(0, eq);
      const auto value = tags[i].substr(eq + 1);
      if (key == "node") m.node = NodeId(parse_int<std::uint64_t>(value, "node"));
      else if (key == "site") m.site = value;
      else if (key == "plot") m.plot = value;
      else if (key == "transect") m.transect = value;
      else throw Error(Errc::ParseError, "line protocol: unknown tag " + std::string(key));
    }
    for (auto field : split(parts[1], ',')) {
      const auto eq = field.find('=');
      if (eq == std::string_view::npos) throw Error(Errc::ParseError, "line protocol: bad field");
      const auto key = field.substr(0, eq);
      auto value = field.substr(eq + 1);
      if (key == "value") {
        m.value_scaled = parse_centi(value);
        continue;
      }
      if (value.empty() || value.back() != 'i') throw Error(Errc::ParseError, "line protocol: expected integer");
      value.remove_suffix(1);
      if (key == "battery_mv") m.battery_mv = parse_int<std::uint16_t>(value, "battery_mv");
      else if (key == "rssi_dbm") m.rssi_dbm = parse_int<std::int16_t>(value, "rssi_dbm");
      else throw Error(Errc::ParseError, "line protocol: unknown field " + std::string(key));
    }
    const auto ns = parse_int<std::int64_t>(parts[2], "timestamp");
    if (ns % 1'000'000'000 != 0) throw Error(Errc::ParseError, "line protocol: sub-second timestamp");
    m.sampled_at = ns / 1'000'000'000;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<Measurement> parse_export(std::string_view text, ExportFormat format) {
  return format == ExportFormat::Csv ? parse_csv(text) : parse_line_protocol(text);
}

}  // namespace borealis::backend

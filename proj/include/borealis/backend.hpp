#pragma once

// Backend half of the split stack: decodes raw frames forwarded by gateways,
// keeps the measurement store, and drives file reads/writes to field nodes.

#include <bitset>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "borealis/alp.hpp"
#include "borealis/gateway.hpp"
#include "borealis/types.hpp"

namespace borealis::backend {

/// Static registry entry naming where a node sits.
struct NodeLabels {
  std::string name;
  std::string site;
  std::string plot;
  std::string transect;

  friend bool operator==(const NodeLabels&, const NodeLabels&) = default;
};

using NodeRegistry = std::map<NodeId, NodeLabels>;

struct Measurement {
  NodeId node;
  std::string site;
  std::string plot;
  std::string transect;
  alp::SensorKind kind = alp::SensorKind::SoilTemp;
  std::int32_t value_scaled = 0;
  std::int64_t sampled_at = 0;   // unix seconds
  std::int64_t received_at = 0;  // unix milliseconds
  std::int16_t rssi_dbm = 0;
  std::uint16_t battery_mv = 0;
  NodeId gateway_id;

  double value() const { return value_scaled / 100.0; }
  friend bool operator==(const Measurement&, const Measurement&) = default;
};

/// Append-only store indexed by (node, sampled_at), iterated in time order per node.
class TimeSeriesStore {
 public:
  struct Sample {
    std::int64_t sampled_at = 0;
    std::int64_t received_at = 0;
    std::uint64_t gateway = 0;
    std::int32_t value_scaled = 0;
    std::uint16_t battery_mv = 0;
    std::int16_t rssi_dbm = 0;
    alp::SensorKind kind = alp::SensorKind::SoilTemp;
    std::uint32_t place = 0;  // index into the interned (site, plot, transect) table

    friend bool operator==(const Sample&, const Sample&) = default;
  };

  /// False (and no change) when (node, sampled_at) is already present.
  bool append(const Measurement& m);
  bool contains(NodeId node, std::int64_t sampled_at) const;

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::vector<NodeId> nodes() const;
  const std::vector<Sample>& series(NodeId node) const;
  /// Measurements of one node in sampled_at order.
  std::vector<Measurement> measurements(NodeId node) const;
  std::vector<Measurement> all() const;
  /// Samples of `node` with sampled_at in [from, to).
  std::size_t count(NodeId node, std::int64_t from, std::int64_t to) const;

  friend bool operator==(const TimeSeriesStore&, const TimeSeriesStore&) = default;

 private:
  struct Place {
    std::string site, plot, transect;
    auto operator<=>(const Place&) const = default;
  };

  Measurement materialize(NodeId node, const Sample& s) const;
  std::uint32_t intern(const Measurement& m);

  std::map<NodeId, std::vector<Sample>> series_;
  std::vector<Place> places_;
  std::map<Place, std::uint32_t> place_index_;
  std::size_t size_ = 0;
};

/// Sliding duplicate filter over 16-bit wrapping frame counters.
class DedupWindow {
 public:
  static constexpr std::size_t kWidth = 1024;
  /// True if the counter is new; marks it seen.
  bool accept(std::uint16_t counter);

  friend bool operator==(const DedupWindow&, const DedupWindow&) = default;

 private:
  bool any_ = false;
  std::uint16_t highest_ = 0;
  std::bitset<kWidth> seen_;  // bit i: counter (highest_ - i) seen
};

enum class RequestState { Queued, OnAir, Answered, Expired };
std::string_view to_string(RequestState s);

struct DownlinkRequest {
  std::uint64_t id = 0;
  NodeId target;
  alp::AlpFrame frame;
  RequestState state = RequestState::Queued;
  SimTime issued_at = 0;
  std::optional<SimTime> on_air_at;
  std::optional<SimTime> answered_at;
  Bytes answer;  // file bytes returned by the node
};

enum class RejectReason { BadCrc, UnknownOp, UnknownFile, TooShort, Malformed, UnknownNode, BadRecord };
std::string_view to_string(RejectReason r);

enum class IngestStatus { Stored, Answered, Duplicate, Rejected };

struct IngestResult {
  IngestStatus status = IngestStatus::Rejected;
  std::optional<Measurement> measurement;
  std::optional<std::uint64_t> answered_request;
  std::optional<RejectReason> reason;
};

enum class Errc { UnknownNode, InvalidConfig, UnknownRequest, UnknownFormat, ParseError };
using Error = CodedError<Errc>;

/// Pure decode of a forwarded sensor report into a Measurement. Shared by the
/// backend ingest path and by anyone re-deriving measurements from raw frames.
Measurement to_measurement(const alp::AlpFrame& frame, const NodeLabels& labels, const gateway::BusMessage& msg,
                           std::int64_t epoch_unix_s);

class Backend {
 public:
  static constexpr NodeId kBackendId{0xBAC0};
  static constexpr SimTime kDefaultTimeout = 60'000;

  Backend(std::int64_t epoch_unix_s, NodeRegistry registry, SimTime downlink_timeout = kDefaultTimeout);

  IngestResult ingest(const gateway::BusMessage& msg);

  DownlinkRequest query_node(NodeId target, alp::FileId file, SimTime now);
  DownlinkRequest update_config(NodeId target, const alp::NodeConfig& cfg, SimTime now);

  DownlinkRequest request(std::uint64_t id) const;
  std::vector<DownlinkRequest> requests() const;
  void mark_on_air(std::uint64_t id, SimTime now);
  /// Expires Queued/OnAir requests older than the timeout; returns their ids.
  std::vector<std::uint64_t> expire(SimTime now);

  /// Consistent copy of the store, safe to read while ingest continues.
  TimeSeriesStore snapshot() const;
  std::size_t stored() const;
  std::map<RejectReason, std::uint64_t> rejections(NodeId gateway) const;
  const NodeRegistry& registry() const { return registry_; }
  std::int64_t epoch() const { return epoch_; }
  SimTime timeout() const { return timeout_; }

  /// Plugs a node into the registry after relocation (labels only).
  void relabel(NodeId node, NodeLabels labels);

 private:
  DownlinkRequest& enqueue(NodeId target, alp::AlpFrame frame, SimTime now);
  IngestResult reject(NodeId gateway, RejectReason reason);
  std::optional<std::uint64_t> resolve(NodeId node, alp::FileId file, const Bytes& payload, SimTime now);

  mutable std::mutex mutex_;
  std::int64_t epoch_;
  NodeRegistry registry_;
  SimTime timeout_;
  TimeSeriesStore store_;
  std::map<NodeId, DedupWindow> dedup_;
  std::map<std::uint64_t, DownlinkRequest> requests_;
  std::map<NodeId, std::map<RejectReason, std::uint64_t>> rejections_;
  std::uint64_t next_request_ = 1;
  std::uint16_t counter_ = 0;
};

// --- export -----------------------------------------------------------------

enum class ExportFormat { Csv, LineProtocol };
ExportFormat parse_format(std::string_view name);  // throws Error{UnknownFormat}

struct Selector {
  std::optional<std::vector<NodeId>> nodes;  // empty vector selects nothing
  std::optional<std::string> site;
  std::optional<std::int64_t> from;  // unix seconds, inclusive
  std::optional<std::int64_t> to;    // exclusive

  bool matches(const Measurement& m) const;
};

inline constexpr std::string_view kCsvHeader =
    "node,site,plot,transect,sensor_kind,sampled_at,value,battery_mv,rssi_dbm,gateway_id";

void export_to(std::ostream& out, const TimeSeriesStore& store, const Selector& selector, ExportFormat format);
std::string export_measurements(const TimeSeriesStore& store, const Selector& selector, ExportFormat format);
void export_to(std::ostream& out, const std::vector<Measurement>& rows, ExportFormat format);
std::string export_measurements(const std::vector<Measurement>& rows, ExportFormat format);

std::string format_centi(std::int32_t value_scaled);
std::vector<Measurement> parse_csv(std::string_view text);
std::vector<Measurement> parse_line_protocol(std::string_view text);
std::vector<Measurement> parse_export(std::string_view text, ExportFormat format);

}  // namespace borealis::backend

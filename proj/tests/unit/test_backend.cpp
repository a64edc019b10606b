#include <random>
#include <thread>

#include "borealis/backend.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace borealis;
using namespace borealis::backend;
using testutil::error_code;

namespace {

constexpr std::int64_t kEpoch = 1650412800;  // 2022-04-20
const NodeId kNode{0x1000};
const NodeId kOther{0x1001};
const NodeId kGw{0x2001};

Backend make_backend(SimTime timeout = Backend::kDefaultTimeout) {
  return Backend(kEpoch, NodeRegistry{{kNode, {"GN1A", "GN13", "GN1", "A"}}, {kOther, {"GN1B", "GN13", "GN1", "B"}}},
                 timeout);
}

gateway::BusMessage report(NodeId node, std::uint16_t counter, std::uint32_t t, std::int32_t scaled,
                           SimTime received_at = 0) {
  const auto f = alp::make_sensor_report(node, counter, {t, alp::SensorKind::SoilTemp, scaled, 3600});
  return {kGw, received_at ? received_at : static_cast<SimTime>(t) * 1000 + 30, -90, alp::encode_frame(f)};
}

std::vector<Measurement> fixture_rows(std::size_t n) {
  std::mt19937_64 rng(11);
  std::vector<Measurement> rows;
  const char* sites[] = {"GN13", "GN45", "GO"};
  for (std::size_t i = 0; i < n; ++i) {
    Measurement m;
    m.node = NodeId(0x1000 + rng() % 58);
    m.site = sites[rng() % 3];
    m.plot = "P" + std::to_string(rng() % 5);
    m.transect = std::string(1, static_cast<char>('A' + rng() % 6));
    m.kind = static_cast<alp::SensorKind>(1 + rng() % 4);
    m.value_scaled = static_cast<std::int32_t>(rng() % 20001) - 10000;
    m.sampled_at = kEpoch + static_cast<std::int64_t>(i) * 900;
    m.battery_mv = static_cast<std::uint16_t>(2000 + rng() % 1651);
    m.rssi_dbm = static_cast<std::int16_t>(-130 + static_cast<int>(rng() % 80));
    m.gateway_id = NodeId(0x2001 + rng() % 3);
    rows.push_back(m);
  }
  return rows;
}

}  // namespace

TEST_CASE("valid report becomes one measurement") {
  auto b = make_backend();
  const auto r = b.ingest(report(kNode, 0, 900, 737));
  REQUIRE(r.status == IngestStatus::Stored);
  REQUIRE(r.measurement);
  const auto& m = *r.measurement;
  CHECK(m.value() == doctest::Approx(7.37));
  CHECK(m.site == "GN13");
  CHECK(m.plot == "GN1");
  CHECK(m.transect == "A");
  CHECK(m.sampled_at == kEpoch + 900);
  CHECK(m.received_at == kEpoch * 1000 + 900'030);
  CHECK(m.received_at >= m.sampled_at * 1000);
  CHECK(m.gateway_id == kGw);
  CHECK(b.stored() == 1);
}

TEST_CASE("redelivery is a no-op") {
  auto b = make_backend();
  const auto msg = report(kNode, 5, 900, 100);
  CHECK(b.ingest(msg).status == IngestStatus::Stored);
  const auto before = b.snapshot();
  CHECK(b.ingest(msg).status == IngestStatus::Duplicate);
  CHECK(b.snapshot() == before);
}

TEST_CASE("corrupted and foreign frames are rejected") {
  auto b = make_backend();
  auto msg = report(kNode, 0, 900, 100);
  msg.raw_frame[20] ^= 0x10;
  const auto r = b.ingest(msg);
  CHECK(r.status == IngestStatus::Rejected);
  CHECK(r.reason == RejectReason::BadCrc);
  CHECK(b.stored() == 0);
  CHECK(b.rejections(kGw).at(RejectReason::BadCrc) == 1);

  CHECK(b.ingest(report(NodeId(0x9999), 0, 900, 1)).reason == RejectReason::UnknownNode);
  auto unknown_file = alp::make_return_data(kNode, 1, alp::FileId{0x07}, 0, Bytes{1});
  CHECK(b.ingest({kGw, 0, 0, alp::encode_frame(unknown_file)}).reason == RejectReason::UnknownFile);
  CHECK(b.ingest({kGw, 0, 0, Bytes{1, 2, 3}}).reason == RejectReason::TooShort);
}

TEST_CASE("split-stack equivalence") {
  auto b = make_backend();
  std::mt19937_64 rng(3);
  for (std::uint16_t c = 0; c < 200; ++c) {
    const auto msg = report(kNode, c, 900u * c, static_cast<std::int32_t>(rng() % 5000) - 2500);
    const auto at_gateway = to_measurement(alp::decode_frame(msg.raw_frame), b.registry().at(kNode), msg, kEpoch);
    const auto r = b.ingest(msg);
    REQUIRE(r.measurement);
    REQUIRE(*r.measurement == at_gateway);
  }
}

TEST_CASE("downlink request lifecycle") {
  auto b = make_backend();
  CHECK(error_code<Errc>([&] { b.query_node(NodeId(0x9999), alp::kSensorDataFile, 0); }) == Errc::UnknownNode);
  CHECK(error_code<Errc>([&] { b.update_config(NodeId(0x9999), alp::NodeConfig{}, 0); }) == Errc::UnknownNode);
  CHECK(error_code<Errc>([&] {
          b.update_config(kNode, alp::NodeConfig{alp::SensorKind::SoilTemp, 30, 12}, 0);
        }) == Errc::InvalidConfig);

  const auto q = b.query_node(kNode, alp::kConfigFile, 1000);
  CHECK(q.state == RequestState::Queued);
  CHECK(q.frame.op == alp::Op::ReadFileRequest);
  b.mark_on_air(q.id, 1100);
  CHECK(b.request(q.id).state == RequestState::OnAir);

  const Bytes cfg = alp::serialize(alp::NodeConfig{});
  const auto answer = alp::make_return_data(kNode, 1, alp::kConfigFile, 0, cfg);
  const auto r = b.ingest({kGw, 1500, -80, alp::encode_frame(answer)});
  CHECK(r.status == IngestStatus::Answered);
  CHECK(r.answered_request == q.id);
  const auto done = b.request(q.id);
  CHECK(done.state == RequestState::Answered);
  CHECK(done.answered_at == 1500);
  CHECK(done.answer == cfg);

  const auto lost = b.query_node(kOther, alp::kSensorDataFile, 2000);
  CHECK(b.expire(2000 + Backend::kDefaultTimeout - 1).empty());
  CHECK(b.expire(2000 + Backend::kDefaultTimeout) == std::vector<std::uint64_t>{lost.id});
  CHECK(b.request(lost.id).state == RequestState::Expired);
  CHECK(b.request(q.id).state == RequestState::Answered);
  CHECK(error_code<Errc>([&] { b.request(999); }) == Errc::UnknownRequest);
}

TEST_CASE("an answer resolves the newest request on air") {
  auto b = make_backend();
  const auto missed = b.query_node(kNode, alp::kConfigFile, 1000);
  b.mark_on_air(missed.id, 1000);
  const auto heard = b.query_node(kNode, alp::kConfigFile, 4000);
  b.mark_on_air(heard.id, 4000);
  const auto answer = alp::make_return_data(kNode, 7, alp::kConfigFile, 0, alp::serialize(alp::NodeConfig{}));
  CHECK(b.ingest({kGw, 4500, -80, alp::encode_frame(answer)}).answered_request == heard.id);
  CHECK(b.request(missed.id).state == RequestState::OnAir);
}

TEST_CASE("dedup window across counter wraparound") {
  DedupWindow w;
  CHECK(w.accept(65534));
  CHECK(w.accept(65535));
  CHECK(w.accept(0));
  CHECK(w.accept(1));
  CHECK_FALSE(w.accept(65535));
  CHECK_FALSE(w.accept(0));
  CHECK(w.accept(10));
  CHECK(w.accept(5));
  CHECK_FALSE(w.accept(5));
  CHECK(w.accept(2000));
  CHECK_FALSE(w.accept(10));  // fell out of the window
}

TEST_CASE("store iterates per node in sampled_at order") {
  TimeSeriesStore s;
  Measurement m;
  m.node = kNode;
  for (std::int64_t t : {300, 100, 200}) {
    m.sampled_at = t;
    CHECK(s.append(m));
  }
  m.sampled_at = 200;
  CHECK_FALSE(s.append(m));
  const auto rows = s.measurements(kNode);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].sampled_at == 100);
  CHECK(rows[2].sampled_at == 300);
  CHECK(s.count(kNode, 100, 300) == 2);
  CHECK(s.contains(kNode, 300));
}

TEST_CASE("csv and line protocol export") {
  TimeSeriesStore empty;
  CHECK(export_measurements(empty, {}, ExportFormat::Csv) == std::string(kCsvHeader) + "\n");
  CHECK(export_measurements(empty, {}, ExportFormat::LineProtocol).empty());

  auto b = make_backend();
  b.ingest(report(kNode, 0, 900, -543));
  const auto store = b.snapshot();
  const auto csv = export_measurements(store, {}, ExportFormat::Csv);
  CHECK(csv == std::string(kCsvHeader) + "\n4096,GN13,GN1,A,SoilTemp,1650413700,-5.43,3600,-90,8193\n");
  CHECK(export_measurements(store, {}, ExportFormat::Csv) == csv);
  CHECK(export_measurements(store, {}, ExportFormat::LineProtocol) ==
        "SoilTemp,node=4096,site=GN13,plot=GN1,transect=A value=-5.43,battery_mv=3600i,rssi_dbm=-90i "
        "1650413700000000000\n");
  CHECK(error_code<Errc>([] { parse_format("xml"); }) == Errc::UnknownFormat);

  Selector none;
  none.nodes = std::vector<NodeId>{};
  CHECK(export_measurements(store, none, ExportFormat::Csv) == std::string(kCsvHeader) + "\n");
  Selector later;
  later.from = kEpoch + 901;
  CHECK(export_measurements(store, later, ExportFormat::Csv) == std::string(kCsvHeader) + "\n");
}

TEST_CASE("export, parse, export is idempotent") {
  const auto rows = fixture_rows(1000);
  for (auto format : {ExportFormat::Csv, ExportFormat::LineProtocol}) {
    const auto once = export_measurements(rows, format);
    const auto parsed = parse_export(once, format);
    REQUIRE(parsed.size() == 1000);
    CHECK(export_measurements(parsed, format) == once);
  }
  CHECK(parse_csv(export_measurements(rows, ExportFormat::Csv)) == rows);
  CHECK(error_code<Errc>([] { parse_csv("nope\n"); }) == Errc::ParseError);
}

TEST_CASE("concurrent ingest keeps per-gateway order and a consistent snapshot") {
  auto b = make_backend();
  auto feed = [&b](NodeId node) {
    for (std::uint16_t c = 0; c < 500; ++c) b.ingest(report(node, c, 900u * c, c));
  };
  std::thread t1(feed, kNode);
  std::thread t2(feed, kOther);
  std::size_t seen = 0;
  while (seen < 1000) {
    const auto snap = b.snapshot();
    REQUIRE(snap.size() >= seen);
    seen = snap.size();
    for (NodeId n : snap.nodes()) {
      const auto& series = snap.series(n);
      for (std::size_t i = 1; i < series.size(); ++i) REQUIRE(series[i - 1].sampled_at < series[i].sampled_at);
    }
    if (seen == 1000) break;
    std::this_thread::yield();
  }
  t1.join();
  t2.join();
  CHECK(b.stored() == 1000);
}

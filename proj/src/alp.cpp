#include "borealis/alp.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

namespace borealis::alp {
namespace {

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[at + i];
  return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[at + i];
  return v;
}

constexpr std::array<std::uint16_t, 256> make_crc_table() {
  std::array<std::uint16_t, 256> table{};
  for (unsigned i = 0; i < 256; ++i) {
    std::uint16_t crc = static_cast<std::uint16_t>(i << 8);
    for (int bit = 0; bit < 8; ++bit)
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021) : static_cast<std::uint16_t>(crc << 1);
    table[i] = crc;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

[[noreturn]] void fail(Errc code, const std::string& detail) {
  throw Error(code, std::string(to_string(code)) + ": " + detail);
}

void check_frame(const AlpFrame& f) {
  if (f.payload.size() > kMaxPayload)
    fail(Errc::PayloadTooLarge, std::to_string(f.payload.size()) + " bytes > " + std::to_string(kMaxPayload));
  if (f.length != f.payload.size())
    fail(Errc::InvariantViolation, "length field " + std::to_string(f.length) + " != payload size " +
                                       std::to_string(f.payload.size()));
  if (f.op == Op::ReadFileRequest && !f.payload.empty())
    fail(Errc::InvariantViolation, "read request carries a payload");
  if (f.version != kVersion) fail(Errc::UnsupportedVersion, "version " + std::to_string(f.version));
}

}  // namespace

std::string_view to_string(Errc e) {
  switch (e) {
    case Errc::PayloadTooLarge: return "PayloadTooLarge";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::TooShort: return "TooShort";
    case Errc::BadCrc: return "BadCrc";
    case Errc::UnknownOp: return "UnknownOp";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidRecord: return "InvalidRecord";
    case Errc::UnknownFile: return "UnknownFile";
    case Errc::UnknownSensorKind: return "UnknownSensorKind";
  }
  return "Unknown";
}

std::string_view to_string(Op op) {
  switch (op) {
    case Op::ReadFileRequest: return "ReadFileRequest";
    case Op::WriteFileRequest: return "WriteFileRequest";
    case Op::ReturnFileData: return "ReturnFileData";
  }
  return "Unknown";
}

bool is_registered(FileId file) { return file == kSensorDataFile || file == kConfigFile; }

FileId registered_file(std::uint8_t raw) {
  const FileId file{raw};
  if (!is_registered(file)) fail(Errc::UnknownFile, "file 0x" + to_hex(std::span(&raw, 1)));
  return file;
}

std::string_view to_string(SensorKind kind) {
  switch (kind) {
    case SensorKind::SoilTemp: return "SoilTemp";
    case SensorKind::WaterContent: return "WaterContent";
    case SensorKind::Weather: return "Weather";
    case SensorKind::AmbientTRH: return "AmbientTRH";
  }
  return "Unknown";
}

std::optional<SensorKind> sensor_kind_from_string(std::string_view name) {
  for (auto k : {SensorKind::SoilTemp, SensorKind::WaterContent, SensorKind::Weather, SensorKind::AmbientTRH})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

std::optional<SensorKind> sensor_kind_from_code(std::uint8_t code) {
  if (code >= 0x01 && code <= 0x04) return static_cast<SensorKind>(code);
  return std::nullopt;
}

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t byte : data)
    crc = static_cast<std::uint16_t>((crc << 8) ^ kCrcTable[((crc >> 8) ^ byte) & 0xFF]);
  return crc;
}

Bytes encode_frame(const AlpFrame& frame) {
  check_frame(frame);
  Bytes out;
  out.reserve(kMinFrameSize + frame.payload.size());
  out.push_back(frame.version);
  put_u64(out, frame.origin.value());
  put_u16(out, frame.counter);
  out.push_back(static_cast<std::uint8_t>(frame.op));
  out.push_back(frame.file.value);
  put_u16(out, frame.offset);
  put_u16(out, frame.length);
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  put_u16(out, crc16_ccitt_false(out));
  return out;
}

AlpFrame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMinFrameSize) fail(Errc::TooShort, std::to_string(bytes.size()) + " bytes");
  if (bytes.size() > kMaxFrameSize) fail(Errc::PayloadTooLarge, std::to_string(bytes.size()) + " bytes");
  const std::size_t body = bytes.size() - kCrcSize;
  const std::uint16_t expected = get_u16(bytes, body);
  const std::uint16_t actual = crc16_ccitt_false(bytes.first(body));
  if (expected != actual) fail(Errc::BadCrc, "crc mismatch");

  AlpFrame f;
  f.version = bytes[0];
  if (f.version != kVersion) fail(Errc::UnsupportedVersion, "version " + std::to_string(f.version));
  f.origin = NodeId(get_u64(bytes, 1));
  f.counter = get_u16(bytes, 9);
  const std::uint8_t op = bytes[11];
  if (op > static_cast<std::uint8_t>(Op::ReturnFileData)) fail(Errc::UnknownOp, "op " + std::to_string(op));
  f.op = static_cast<Op>(op);
  f.file = FileId{bytes[12]};
  f.offset = get_u16(bytes, 13);
  f.length = get_u16(bytes, 15);
  if (f.length != body - kHeaderSize)
    fail(Errc::LengthMismatch,
         "declared " + std::to_string(f.length) + ", carried " + std::to_string(body - kHeaderSize));
  f.payload.assign(bytes.begin() + kHeaderSize, bytes.begin() + static_cast<std::ptrdiff_t>(body));
  if (f.op == Op::ReadFileRequest && !f.payload.empty())
    fail(Errc::InvariantViolation, "read request carries a payload");
  return f;
}

std::int32_t scale_to_centi(double value) {
  if (!std::isfinite(value) || std::fabs(value) >= 2.0e7) fail(Errc::InvalidRecord, "value out of range");
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed);
  std::string_view text(buf.data(), static_cast<std::size_t>(res.ptr - buf.data()));
  const bool negative = !text.empty() && text.front() == '-';
  if (negative) text.remove_prefix(1);
  const auto dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);

  std::int64_t centi = 0;
  for (char c : whole) centi = centi * 10 + (c - '0');
  for (std::size_t i = 0; i < 2; ++i) centi = centi * 10 + (i < frac.size() ? frac[i] - '0' : 0);
  if (frac.size() > 2 && frac[2] >= '5') ++centi;
  return static_cast<std::int32_t>(negative ? -centi : centi);
}

Bytes serialize(const SensorDataRecord& record) {
  if (record.battery_mv > kMaxBatteryMv) fail(Errc::InvalidRecord, "battery_mv above 4000");
  Bytes out;
  out.reserve(kSensorRecordSize);
  put_u32(out, record.timestamp);
  out.push_back(static_cast<std::uint8_t>(record.kind));
  put_u32(out, static_cast<std::uint32_t>(record.value_scaled));
  put_u16(out, record.battery_mv);
  return out;
}

SensorDataRecord parse_sensor_record(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kSensorRecordSize) fail(Errc::InvalidRecord, "record size " + std::to_string(bytes.size()));
  SensorDataRecord r;
  r.timestamp = get_u32(bytes, 0);
  const auto kind = sensor_kind_from_code(bytes[4]);
  if (!kind) fail(Errc::UnknownSensorKind, "kind " + std::to_string(bytes[4]));
  r.kind = *kind;
  r.value_scaled = static_cast<std::int32_t>(get_u32(bytes, 5));
  r.battery_mv = get_u16(bytes, 9);
  if (r.battery_mv > kMaxBatteryMv) fail(Errc::InvalidRecord, "battery_mv above 4000");
  return r;
}

void validate(const NodeConfig& cfg) {
  if (!sensor_kind_from_code(static_cast<std::uint8_t>(cfg.kind)))
    fail(Errc::InvalidConfig, "unknown sensor kind");
  if (cfg.sampling_interval_s < kMinSamplingInterval)
    fail(Errc::InvalidConfig, "sampling interval " + std::to_string(cfg.sampling_interval_s) + " s below 60 s");
  if (cfg.resolution_bits < 9 || cfg.resolution_bits > 12)
    fail(Errc::InvalidConfig, "resolution " + std::to_string(cfg.resolution_bits) + " bits outside 9..12");
}

Bytes serialize(const NodeConfig& cfg) {
  validate(cfg);
  Bytes out;
  out.reserve(kConfigSize);
  out.push_back(static_cast<std::uint8_t>(cfg.kind));
  put_u32(out, cfg.sampling_interval_s);
  out.push_back(cfg.resolution_bits);
  return out;
}

NodeConfig parse_config(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kConfigSize) fail(Errc::InvalidConfig, "config size " + std::to_string(bytes.size()));
  const auto kind = sensor_kind_from_code(bytes[0]);
  if (!kind) fail(Errc::InvalidConfig, "unknown sensor kind " + std::to_string(bytes[0]));
  NodeConfig cfg{*kind, get_u32(bytes, 1), bytes[5]};
  validate(cfg);
  return cfg;
}

AlpFrame make_read_request(NodeId origin, std::uint16_t counter, FileId file, std::uint16_t offset) {
  AlpFrame f;
  f.origin = origin;
  f.counter = counter;
  f.op = Op::ReadFileRequest;
  f.file = file;
  f.offset = offset;
  return f;
}

AlpFrame make_sensor_report(NodeId origin, std::uint16_t counter, const SensorDataRecord& record) {
  return make_return_data(origin, counter, kSensorDataFile, 0, serialize(record));
}

AlpFrame make_config_write(NodeId origin, std::uint16_t counter, const NodeConfig& cfg) {
  AlpFrame f;
  f.origin = origin;
  f.counter = counter;
  f.op = Op::WriteFileRequest;
  f.file = kConfigFile;
  f.payload = serialize(cfg);
  f.length = static_cast<std::uint16_t>(f.payload.size());
  return f;
}

AlpFrame make_return_data(NodeId origin, std::uint16_t counter, FileId file, std::uint16_t offset, Bytes data) {
  AlpFrame f;
  f.origin = origin;
  f.counter = counter;
  f.op = Op::ReturnFileData;
  f.file = file;
  f.offset = offset;
  f.length = static_cast<std::uint16_t>(data.size());
  f.payload = std::move(data);
  return f;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 3);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (i) out.push_back(' ');
    out.push_back(kDigits[bytes[i] >> 4]);
    out.push_back(kDigits[bytes[i] & 0xF]);
  }
  return out;
}

Bytes from_hex(std::string_view text) {
  Bytes out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == ' ' || text[i] == '\t' || text[i] == '\r' || text[i] == '\n') {
      ++i;
      continue;
    }
    if (i + 1 >= text.size()) throw std::invalid_argument("odd hex digit count");
    std::uint8_t v = 0;
    const auto res = std::from_chars(text.data() + i, text.data() + i + 2, v, 16);
    if (res.ec != std::errc{} || res.ptr != text.data() + i + 2)
      throw std::invalid_argument("bad hex byte at " + std::to_string(i));
    out.push_back(v);
    i += 2;
  }
  return out;
}

}  // namespace borealis::alp

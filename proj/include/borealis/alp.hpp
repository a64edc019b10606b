#pragma once

// File-based application layer: frame codec, registered files and the record
// layouts stored in them. Node, gateway bus and backend all share these bytes.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "borealis/types.hpp"

namespace borealis::alp {

inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 17;
inline constexpr std::size_t kCrcSize = 2;
inline constexpr std::size_t kMinFrameSize = kHeaderSize + kCrcSize;
inline constexpr std::size_t kMaxPayload = 239;
inline constexpr std::size_t kMaxFrameSize = kMinFrameSize + kMaxPayload;

enum class Errc {
  PayloadTooLarge,
  InvariantViolation,
  TooShort,
  BadCrc,
  UnknownOp,
  LengthMismatch,
  UnsupportedVersion,
  InvalidConfig,
  InvalidRecord,
  UnknownFile,
  UnknownSensorKind,
};

std::string_view to_string(Errc e);

using Error = CodedError<Errc>;

enum class Op : std::uint8_t {
  ReadFileRequest = 0x00,
  WriteFileRequest = 0x01,
  ReturnFileData = 0x02,
};

std::string_view to_string(Op op);

struct FileId {
  std::uint8_t value = 0;
  friend constexpr auto operator<=>(FileId, FileId) = default;
};

inline constexpr FileId kSensorDataFile{0x40};
inline constexpr FileId kConfigFile{0x41};

/// Only the sensor-data and configuration files exist on a node.
bool is_registered(FileId file);
/// Throws Error{UnknownFile} for anything not registered.
FileId registered_file(std::uint8_t raw);

enum class SensorKind : std::uint8_t {
  SoilTemp = 0x01,
  WaterContent = 0x02,
  Weather = 0x03,
  AmbientTRH = 0x04,
};

std::string_view to_string(SensorKind kind);
std::optional<SensorKind> sensor_kind_from_string(std::string_view name);
std::optional<SensorKind> sensor_kind_from_code(std::uint8_t code);

struct AlpFrame {
  std::uint8_t version = kVersion;
  NodeId origin;
  std::uint16_t counter = 0;
  Op op = Op::ReadFileRequest;
  FileId file;
  std::uint16_t offset = 0;
  std::uint16_t length = 0;
  Bytes payload;

  friend bool operator==(const AlpFrame&, const AlpFrame&) = default;
};

/// CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection, no final xor).
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data);

Bytes encode_frame(const AlpFrame& frame);
AlpFrame decode_frame(std::span<const std::uint8_t> bytes);

/// Scales a physical value to hundredths, rounding half away from zero on the
/// value's shortest decimal representation (so 10.005 -> 1001).
std::int32_t scale_to_centi(double value);

struct SensorDataRecord {
  std::uint32_t timestamp = 0;  // seconds since scenario epoch
  SensorKind kind = SensorKind::SoilTemp;
  std::int32_t value_scaled = 0;
  std::uint16_t battery_mv = 0;

  double value() const { return value_scaled / 100.0; }
  friend bool operator==(const SensorDataRecord&, const SensorDataRecord&) = default;
};

inline constexpr std::size_t kSensorRecordSize = 11;
inline constexpr std::uint16_t kMaxBatteryMv = 4000;

Bytes serialize(const SensorDataRecord& record);
SensorDataRecord parse_sensor_record(std::span<const std::uint8_t> bytes);

struct NodeConfig {
  SensorKind kind = SensorKind::SoilTemp;
  std::uint32_t sampling_interval_s = 900;
  std::uint8_t resolution_bits = 12;

  friend bool operator==(const NodeConfig&, const NodeConfig&) = default;
};

inline constexpr std::size_t kConfigSize = 6;
inline constexpr std::uint32_t kMinSamplingInterval = 60;

/// Throws Error{InvalidConfig} if the config breaks its invariants.
void validate(const NodeConfig& cfg);
Bytes serialize(const NodeConfig& cfg);
/// Parses and validates; throws Error{InvalidConfig}.
NodeConfig parse_config(std::span<const std::uint8_t> bytes);

/// Reads carry no payload (length 0), so a read returns the file from
/// `offset` to its end.
AlpFrame make_read_request(NodeId origin, std::uint16_t counter, FileId file, std::uint16_t offset = 0);
AlpFrame make_sensor_report(NodeId origin, std::uint16_t counter, const SensorDataRecord& record);
AlpFrame make_config_write(NodeId origin, std::uint16_t counter, const NodeConfig& cfg);
AlpFrame make_return_data(NodeId origin, std::uint16_t counter, FileId file, std::uint16_t offset,
                          Bytes data);

std::string to_hex(std::span<const std::uint8_t> bytes);
Bytes from_hex(std::string_view text);

}  // namespace borealis::alp

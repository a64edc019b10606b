#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace borealis {

using Bytes = std::vector<std::uint8_t>;

/// Simulated time in integer milliseconds since the scenario epoch.
using SimTime = std::int64_t;

inline constexpr SimTime kMsPerSecond = 1000;
inline constexpr SimTime kMsPerDay = 86'400'000;
inline constexpr std::int64_t kSecondsPerDay = 86'400;

/// 64-bit device identifier shared by nodes and gateways.
class NodeId {
 public:
  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint64_t v) : value_(v) {}
  constexpr std::uint64_t value() const { return value_; }
  constexpr bool valid() const { return value_ != 0; }
  friend constexpr auto operator<=>(NodeId, NodeId) = default;

 private:
  std::uint64_t value_ = 0;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Position&, const Position&) = default;
};

double distance(Position a, Position b);

/// Error carrying a module-specific code alongside the message.
template <class Code>
class CodedError : public std::runtime_error {
 public:
  CodedError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

}  // namespace borealis

template <>
struct std::hash<borealis::NodeId> {
  std::size_t operator()(borealis::NodeId id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value());
  }
};

#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace p2ps {

// Dense identifiers. Enum classes keep peers, keywords and objects from being
// mixed up while still hashing and ordering like plain integers.
enum class PeerId : std::uint32_t {};
enum class Keyword : std::uint32_t {};
enum class ObjectId : std::uint32_t {};

using Tick = std::uint64_t;
using QueryId = std::uint64_t;
using MessageId = std::uint64_t;

constexpr std::uint32_t raw(PeerId p) { return static_cast<std::uint32_t>(p); }
constexpr std::uint32_t raw(Keyword k) { return static_cast<std::uint32_t>(k); }
constexpr std::uint32_t raw(ObjectId o) { return static_cast<std::uint32_t>(o); }
constexpr std::size_t idx(PeerId p) { return static_cast<std::size_t>(p); }
constexpr PeerId peer(std::size_t i) { return static_cast<PeerId>(i); }

enum class PeerClass : std::uint8_t { Ordinary, Power };

// Round half away from zero; the single rounding rule used by every formula.
inline double round_half_away(double x) { return std::round(x); }

// Invalid configuration or parameters; `field` names the offending setting.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Precondition violated by a caller inside the simulator.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace p2ps

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace camsim {

using Cycle = std::uint64_t;
using Addr = std::uint64_t;
using DataToken = std::uint64_t;

// Invalid user-supplied configuration (bad node count, address overflow, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A coherence controller received an event its transition table has no entry
// for. Carries the offending trace in what().
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Internal simulator invariant broken (response with no outstanding request,
// budget exhausted, ...).
class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace camsim

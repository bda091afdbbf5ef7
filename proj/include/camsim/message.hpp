#pragma once

#include <cstdint>
#include <string_view>

#include "camsim/common.hpp"
#include "camsim/topology.hpp"

namespace camsim {

enum class MessageClass : std::uint8_t { Request = 0, Forward = 1, Response = 2 };

enum class MsgType : std::uint8_t {
  // Request class
  GETS,
  GETX,
  PUTX,
  // Forward class
  Fwd_GETS,
  Fwd_GETX,
  INV,
  // Response class
  Data_Dir,
  Data_Owner,
  InvAck,
  WB_Ack,
  Unblock,
};

inline constexpr int kNumVNets = 6;

MessageClass class_of(MsgType type);
std::string_view to_string(MsgType type);
std::string_view to_string(MessageClass cls);

// Virtual network index: class (0..2), plus 3 for critical traffic.
constexpr int vnet_of(MessageClass cls, bool crit) {
  return static_cast<int>(cls) + (crit ? 3 : 0);
}

constexpr bool is_crit_vnet(int vnet) { return vnet >= 3; }

// Identifies one coherence transaction for audit logging.
struct TxnId {
  std::uint32_t requester = 0;
  Addr addr = 0;
  std::uint64_t seq = 0;
  friend bool operator==(const TxnId&, const TxnId&) = default;
};

struct Message {
  MsgType type = MsgType::GETS;
  // Selects the vnet. May differ from txn_crit for forwards when forwarded
  // messages are configured not to inherit criticality.
  bool crit = false;
  // Criticality of the originating core request.
  bool txn_crit = false;
  std::uint32_t size_bytes = 8;
  NodeId src;
  NodeId dst;
  Addr addr = 0;

  // Payload.
  std::uint32_t requester = 0;
  // Data_*: invalidation acks the requester must collect. Fwd_GETX: acks the
  // owner passes along in its Data_Owner.
  std::int32_t ack_count = 0;
  bool has_data = false;
  DataToken data = 0;
  // Data_Dir for a GETS: the requester may take the block exclusive-clean.
  bool exclusive = false;
  TxnId txn;

  Cycle inject_cycle = 0;
  // Global injection order, assigned by the network.
  std::uint64_t seqno = 0;

  MessageClass msg_class() const { return class_of(type); }
  int vnet() const { return vnet_of(msg_class(), crit); }
};

}  // namespace camsim

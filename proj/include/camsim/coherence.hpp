#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "camsim/common.hpp"
#include "camsim/memhier.hpp"
#include "camsim/message.hpp"

namespace camsim {

// MOESI cache block states. MI/OI/II live in the writeback buffer while a
// PUTX awaits its WB_Ack; II means ownership was already handed to another
// node by a forward that raced the writeback.
enum class CacheState : std::uint8_t { I, S, E, O, M, IS, IM, SM, OM, MI, OI, II };

enum class DirState : std::uint8_t { Invalid, Shared, Owned, Exclusive, Busy };

std::string_view to_string(CacheState s);
std::string_view to_string(DirState s);
bool is_stable(CacheState s);

// State a block effectively holds for access-permission purposes: transient
// requests hold nothing new yet, and writeback-buffer blocks are inaccessible.
CacheState permission_view(CacheState s);

// Block-interleaved home: (addr >> 6) mod n_nodes.
NodeId home_node(Addr addr, std::uint32_t n_nodes);

struct SwmrReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Single-writer / multiple-reader check over one block's per-node stable
// states: at most one M/E holder and then nobody else valid; at most one O.
SwmrReport check_swmr(std::span<const CacheState> states);

struct CoherenceParams {
  std::uint32_t n_nodes = 16;
  std::uint32_t block_bytes = 64;
  std::uint64_t memory_bytes = 512ull << 20;
  std::uint32_t msg_bytes_control = 8;
  std::uint32_t msg_bytes_data = 72;
  Cycle lat_l1 = 1;
  Cycle lat_l2 = 10;
  Cycle lat_mem = 160;
  // Forward-class messages of a critical transaction travel on the critical
  // vnets.
  bool crit_forwards = true;
  CacheGeometry l1 = CacheGeometry::make(256 << 10, 4, 64);
  CacheGeometry l2 = CacheGeometry::make(16 << 20, 4, 64);
};

enum class CoreOp : std::uint8_t { Load, Store, TestAndSet };

struct CoreRequest {
  CoreOp op = CoreOp::Load;
  Addr addr = 0;
  DataToken value = 0;  // Store only
  bool crit = false;
};

struct CoreResponse {
  // Load: value read. TestAndSet: value before the operation.
  DataToken value = 0;
  Cycle ready = 0;
};

struct Outgoing {
  Cycle ready = 0;
  Message msg;
};

// Hooks for checkers, tracing and the core scheduler. All default to no-ops.
class CoherenceObserver {
 public:
  virtual ~CoherenceObserver() = default;
  // A core request took effect on the block (its linearization point).
  virtual void on_perform(NodeId, const CoreRequest&, DataToken /*old*/, Cycle) {}
  // A message or eviction touched this node's copy of the block.
  virtual void on_block_event(NodeId, Addr, Cycle) {}
  // The home directory closed a transaction on the block.
  virtual void on_txn_complete(NodeId /*home*/, Addr, Cycle) {}
  virtual void on_transition(Cycle, NodeId, std::string_view /*event*/, Addr,
                             std::string_view /*old*/, std::string_view /*new*/, bool /*crit*/) {}
};

struct CacheStats {
  std::uint64_t crit_requests = 0;
  std::uint64_t noncrit_requests = 0;
  std::uint64_t l1_hits = 0;
  std::uint64_t l2_hits = 0;
  std::uint64_t writebacks = 0;
};

// Per-node private cache hierarchy. The L2 is the coherence point; the L1 is
// an inclusive filter that only caches access permission. One outstanding
// core request at a time.
class CacheController {
 public:
  CacheController(NodeId self, const CoherenceParams& params, CoherenceObserver* observer);

  NodeId id() const { return self_; }

  // Starts a core request. Hits complete after the L1/L2 latency; misses
  // issue GETS/GETX once the L2 lookup finishes.
  void access(const CoreRequest& req, Cycle now, std::vector<Outgoing>& out);

  // Response for the outstanding request once ready <= now.
  std::optional<CoreResponse> take_response(Cycle now);
  // Cycle at which the pending response becomes available, if one is known.
  std::optional<Cycle> response_ready() const {
    return response_ ? std::optional<Cycle>(response_->ready) : std::nullopt;
  }
  bool busy() const { return outstanding_; }

  void receive(const Message& msg, Cycle now, std::vector<Outgoing>& out);

  // Replaces a stable block: M/E/O write back with PUTX, S drops silently.
  // Returns false when the block is absent or transient.
  bool evict(Addr addr, Cycle now, std::vector<Outgoing>& out);

  CacheState state_of(Addr addr) const;
  DataToken data_of(Addr addr) const;
  bool l1_holds(Addr addr) const;
  const CacheStats& stats() const { return stats_; }

  // Blocks resident in the L1 must be readable in the L2, and writable L1
  // copies need L2 state M. Returns the offending addresses.
  std::vector<Addr> inclusion_violations() const;

  // Canonical text of the complete controller state, for state hashing.
  void describe(std::ostream& os) const;

 private:
  struct Line {
    CacheState state = CacheState::I;
    DataToken data = 0;
  };
  struct L1Line {
    bool writable = false;
  };
  struct Writeback {
    CacheState state = CacheState::MI;
    DataToken data = 0;
  };
  struct Mshr {
    CoreRequest req;
    Addr block = 0;
    bool have_data = false;
    bool exclusive = false;
    DataToken data = 0;
    std::optional<std::int32_t> acks_expected;
    std::int32_t acks_received = 0;
    TxnId txn;
  };

  Addr align(Addr a) const { return block_align(a, params_->block_bytes); }
  void start_miss(const CoreRequest& req, Cycle now, std::vector<Outgoing>& out);
  void finish_miss(Cycle now, std::vector<Outgoing>& out);
  void try_complete(Cycle now, std::vector<Outgoing>& out);
  DataToken perform(Line& line, const CoreRequest& req, Cycle now);
  void make_room(Addr block, Cycle now, std::vector<Outgoing>& out);
  void l1_fill(Addr block, bool writable);
  void set_state(Addr block, Line& line, CacheState next, std::string_view event, bool crit,
                 Cycle now);
  Outgoing& send_msg(std::vector<Outgoing>& out, Cycle ready, MsgType type, NodeId dst,
                     Addr block, bool crit, bool txn_crit, const TxnId& txn, Cycle now);
  [[noreturn]] void fail(const Message& msg, std::string_view state) const;

  NodeId self_;
  const CoherenceParams* params_;
  CoherenceObserver* observer_;
  CacheArray<L1Line> l1_;
  CacheArray<Line> l2_;
  std::unordered_map<Addr, Writeback> writebacks_;
  std::optional<Mshr> mshr_;
  // Core request waiting for its block's writeback to drain.
  std::optional<CoreRequest> stalled_;
  bool outstanding_ = false;
  std::optional<CoreResponse> response_;
  std::uint64_t next_txn_seq_ = 0;
  CacheStats stats_;
};

struct DirEntry {
  struct BusyInfo {
    std::uint32_t requester = 0;
    MsgType type = MsgType::GETS;
    bool crit = false;
    DirState next = DirState::Invalid;
    TxnId txn;
  };

  DirState state = DirState::Invalid;
  std::optional<std::uint32_t> owner;
  std::uint64_t sharers = 0;  // bit i = node i
  std::optional<BusyInfo> busy;
  std::deque<Message> pending;
  DataToken memory = 0;
};

// Blocking directory slice for the blocks homed at this node. A transaction
// holds the block Busy from the request until the requester's Unblock;
// requests arriving meanwhile wait in a per-block FIFO.
class DirectoryController {
 public:
  DirectoryController(NodeId self, const CoherenceParams& params, CoherenceObserver* observer);

  NodeId id() const { return self_; }
  void receive(const Message& msg, Cycle now, std::vector<Outgoing>& out);

  // Entry for a block, or nullptr if never touched.
  const DirEntry* entry(Addr addr) const;
  DataToken memory_of(Addr addr) const;
  bool any_busy() const;
  void describe(std::ostream& os) const;

 private:
  void process(const Message& req, DirEntry& e, Cycle now, std::vector<Outgoing>& out);
  void process_gets(const Message& req, DirEntry& e, Cycle now, std::vector<Outgoing>& out);
  void process_getx(const Message& req, DirEntry& e, Cycle now, std::vector<Outgoing>& out);
  void process_putx(const Message& req, DirEntry& e, Cycle now, std::vector<Outgoing>& out);
  Outgoing& send(std::vector<Outgoing>& out, Cycle ready, MsgType type, std::uint32_t dst,
                 const Message& req, Cycle now);
  void go_busy(DirEntry& e, const Message& req, DirState next, Cycle now);
  [[noreturn]] void fail(const Message& msg, const DirEntry& e) const;

  NodeId self_;
  const CoherenceParams* params_;
  CoherenceObserver* observer_;
  std::unordered_map<Addr, DirEntry> entries_;
};

}  // namespace camsim

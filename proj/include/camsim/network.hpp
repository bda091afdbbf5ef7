#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "camsim/message.hpp"
#include "camsim/topology.hpp"

namespace camsim {

struct NetworkParams {
  // Bytes per 10 cycles per link direction.
  std::uint32_t bandwidth = 125;
  Cycle hop_latency = 1;
};

// ceil(size_bytes * 10 / bandwidth), at least 1.
Cycle serialization_cycles(std::uint32_t size_bytes, std::uint32_t bandwidth);

struct LinkStats {
  Cycle busy_cycles = 0;
  Cycle contention_cycles = 0;
  std::uint64_t transmitted = 0;
  // Cycles messages spent buffered before serialization, by class.
  Cycle crit_wait_cycles = 0;
  Cycle noncrit_wait_cycles = 0;
};

// One unidirectional link: six FIFO input buffers (one per vnet) feeding a
// serializer, followed by a fixed wire latency.
class Link {
 public:
  explicit Link(LinkEnds ends) : ends_(ends) {}

  const LinkEnds& ends() const { return ends_; }
  const LinkStats& stats() const { return stats_; }

  void enqueue(Message msg, Cycle now);

  // True iff critical and non-critical messages are both waiting in the
  // input buffers; counts a contention cycle when so.
  bool sample_contention();

  // Picks the next message to serialize. With CAM, the critical vnets (3-5)
  // go first; within the eligible vnets the earliest-buffered message wins.
  // Returns nullopt when the link is still serializing or all buffers are
  // empty. The chosen message moves onto the wire and reaches the far end at
  // now + serialization + hop_latency.
  std::optional<Message> arbitrate(Cycle now, bool cam_enabled, const NetworkParams& params);

  // Removes and returns wire messages that have reached the far end by `now`.
  void pop_arrivals(Cycle now, std::vector<Message>& out);

  Cycle busy_until() const { return busy_until_; }
  std::size_t buffered(int vnet) const { return buffers_[vnet].size(); }
  std::size_t buffered_total() const { return n_crit_ + n_noncrit_; }
  bool in_contention() const { return n_crit_ > 0 && n_noncrit_ > 0; }
  bool idle() const { return buffered_total() == 0 && wire_.empty(); }
  std::optional<Cycle> next_arrival() const;
  const Message& front(int vnet) const { return buffers_[vnet].front().msg; }

  void add_idle_contention(Cycle cycles);

 private:
  struct Buffered {
    Message msg;
    std::uint64_t ticket;
    Cycle since;
  };
  struct OnWire {
    Cycle arrival;
    Message msg;
  };

  LinkEnds ends_;
  std::array<std::deque<Buffered>, kNumVNets> buffers_;
  std::deque<OnWire> wire_;
  std::uint64_t next_ticket_ = 0;
  std::size_t n_crit_ = 0;
  std::size_t n_noncrit_ = 0;
  Cycle busy_until_ = 0;
  LinkStats stats_;
};

// All links of a topology plus the routing glue between them. Routers are
// perfect: a message reaching a router is immediately buffered at its next
// link. Messages whose source and destination coincide skip the links and
// arrive one cycle after injection.
class Network {
 public:
  Network(const Topology& topo, NetworkParams params);

  const Topology& topology() const { return *topo_; }
  const NetworkParams& params() const { return params_; }

  // Assigns the next global seqno and buffers the message at the first link
  // of its route.
  void inject(Message msg, Cycle now);

  // Moves wire arrivals into their next link buffer or into `deliveries`.
  void advance(Cycle now, std::vector<Message>& deliveries);

  void sample_contention();
  void arbitrate(Cycle now, bool cam_enabled);

  // Earliest cycle after `now` at which advance/arbitrate can change state,
  // or nullopt when the network is empty.
  std::optional<Cycle> next_event(Cycle now) const;
  // Accounts contention for `cycles` skipped cycles with unchanged buffers.
  void skip_cycles(Cycle cycles);

  bool idle() const;
  const std::vector<Link>& links() const { return links_; }
  Link& link(LinkId id) { return links_[id.index]; }
  std::uint64_t injected() const { return next_seqno_; }
  std::uint64_t delivered() const { return delivered_; }

 private:
  void mark_active(std::uint32_t link);
  void route_into(Message msg, NodeId at, Cycle now, std::vector<Message>& deliveries);

  const Topology* topo_;
  NetworkParams params_;
  std::vector<Link> links_;
  std::vector<std::uint32_t> active_;
  std::vector<bool> is_active_;
  bool active_dirty_ = false;
  std::vector<Message> local_;
  std::uint64_t next_seqno_ = 0;
  std::uint64_t delivered_ = 0;
  std::vector<Message> scratch_;
};

}  // namespace camsim

#include "camsim/network.hpp"

#include <algorithm>
#include <limits>

namespace camsim {

Cycle serialization_cycles(std::uint32_t size_bytes, std::uint32_t bandwidth) {
  const Cycle scaled = Cycle(size_bytes) * 10;
  const Cycle cycles = (scaled + bandwidth - 1) / bandwidth;
  return std::max<Cycle>(cycles, 1);
}

void Link::enqueue(Message msg, Cycle now) {
  const int vnet = msg.vnet();
  if (is_crit_vnet(vnet)) {
    ++n_crit_;
  } else {
    ++n_noncrit_;
  }
  buffers_[vnet].push_back(Buffered{std::move(msg), next_ticket_++, now});
}

bool Link::sample_contention() {
  if (!in_contention()) return false;
  ++stats_.contention_cycles;
  return true;
}

void Link::add_idle_contention(Cycle cycles) {
  if (in_contention()) stats_.contention_cycles += cycles;
}

std::optional<Message> Link::arbitrate(Cycle now, bool cam_enabled,
                                       const NetworkParams& params) {
  if (busy_until_ > now || buffered_total() == 0) return std::nullopt;

  const int first = (cam_enabled && n_crit_ > 0) ? 3 : 0;
  int best = -1;
  std::uint64_t best_ticket = std::numeric_limits<std::uint64_t>::max();
  for (int v = first; v < kNumVNets; ++v) {
    if (buffers_[v].empty()) continue;
    if (buffers_[v].front().ticket < best_ticket) {
      best_ticket = buffers_[v].front().ticket;
      best = v;
    }
  }

  Message msg = std::move(buffers_[best].front().msg);
  const Cycle waited = now - buffers_[best].front().since;
  buffers_[best].pop_front();
  if (is_crit_vnet(best)) {
    --n_crit_;
    stats_.crit_wait_cycles += waited;
  } else {
    --n_noncrit_;
    stats_.noncrit_wait_cycles += waited;
  }

  const Cycle ser = serialization_cycles(msg.size_bytes, params.bandwidth);
  busy_until_ = now + ser;
  stats_.busy_cycles += ser;
  ++stats_.transmitted;
  wire_.push_back(OnWire{now + ser + params.hop_latency, msg});
  return msg;
}

void Link::pop_arrivals(Cycle now, std::vector<Message>& out) {
  while (!wire_.empty() && wire_.front().arrival <= now) {
    out.push_back(std::move(wire_.front().msg));
    wire_.pop_front();
  }
}

std::optional<Cycle> Link::next_arrival() const {
  if (wire_.empty()) return std::nullopt;
  return wire_.front().arrival;
}

Network::Network(const Topology& topo, NetworkParams params)
    : topo_(&topo), params_(params), is_active_(topo.links().size(), false) {
  if (params_.bandwidth == 0) throw ConfigError("bandwidth must be positive");
  links_.reserve(topo.links().size());
  for (const auto& ends : topo.links()) links_.emplace_back(ends);
}

void Network::mark_active(std::uint32_t link) {
  if (is_active_[link]) return;
  is_active_[link] = true;
  active_.push_back(link);
  active_dirty_ = true;
}

void Network::inject(Message msg, Cycle now) {
  msg.seqno = next_seqno_++;
  msg.inject_cycle = now;
  if (msg.src == msg.dst) {
    local_.push_back(std::move(msg));
    return;
  }
  const LinkId first = topo_->next_hop(msg.src, msg.dst);
  links_[first.index].enqueue(std::move(msg), now);
  mark_active(first.index);
}

void Network::route_into(Message msg, NodeId at, Cycle now, std::vector<Message>& deliveries) {
  if (at == msg.dst) {
    ++delivered_;
    deliveries.push_back(std::move(msg));
    return;
  }
  const LinkId next = topo_->next_hop(at, msg.dst);
  links_[next.index].enqueue(std::move(msg), now);
  mark_active(next.index);
}

void Network::advance(Cycle now, std::vector<Message>& deliveries) {
  for (auto& msg : local_) {
    ++delivered_;
    deliveries.push_back(std::move(msg));
  }
  local_.clear();

  if (active_dirty_) {
    std::sort(active_.begin(), active_.end());
    active_dirty_ = false;
  }
  // Routing may activate further links; only the links active at entry can
  // have wire arrivals.
  const std::size_t n = active_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t id = active_[i];
    scratch_.clear();
    links_[id].pop_arrivals(now, scratch_);
    const NodeId at = links_[id].ends().dst;
    for (auto& msg : scratch_) route_into(std::move(msg), at, now, deliveries);
  }

  std::erase_if(active_, [this](std::uint32_t id) {
    if (!links_[id].idle()) return false;
    is_active_[id] = false;
    return true;
  });
}

void Network::sample_contention() {
  for (const std::uint32_t id : active_) links_[id].sample_contention();
}

void Network::arbitrate(Cycle now, bool cam_enabled) {
  if (active_dirty_) {
    std::sort(active_.begin(), active_.end());
    active_dirty_ = false;
  }
  for (const std::uint32_t id : active_) links_[id].arbitrate(now, cam_enabled, params_);
}

std::optional<Cycle> Network::next_event(Cycle now) const {
  if (!local_.empty()) return now + 1;
  std::optional<Cycle> best;
  auto consider = [&](Cycle c) {
    c = std::max(c, now + 1);
    if (!best || c < *best) best = c;
  };
  for (const std::uint32_t id : active_) {
    const Link& l = links_[id];
    if (l.buffered_total() > 0) consider(l.busy_until());
    if (auto a = l.next_arrival()) consider(*a);
  }
  return best;
}

void Network::skip_cycles(Cycle cycles) {
  if (cycles == 0) return;
  for (const std::uint32_t id : active_) links_[id].add_idle_contention(cycles);
}

bool Network::idle() const { return local_.empty() && active_.empty(); }

}  // namespace camsim

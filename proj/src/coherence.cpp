#include "camsim/coherence.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <sstream>

namespace camsim {

namespace {

bool readable(CacheState s) {
  return s == CacheState::S || s == CacheState::E || s == CacheState::O || s == CacheState::M;
}

std::string_view op_event(CoreOp op) {
  switch (op) {
    case CoreOp::Load: return "core:Load";
    case CoreOp::Store: return "core:Store";
    case CoreOp::TestAndSet: return "core:TAS";
  }
  return "core:?";
}

std::string event_name(std::string_view prefix, MsgType type) {
  std::string s(prefix);
  s += to_string(type);
  return s;
}

}  // namespace

std::string_view to_string(CacheState s) {
  switch (s) {
    case CacheState::I: return "I";
    case CacheState::S: return "S";
    case CacheState::E: return "E";
    case CacheState::O: return "O";
    case CacheState::M: return "M";
    case CacheState::IS: return "IS";
    case CacheState::IM: return "IM";
    case CacheState::SM: return "SM";
    case CacheState::OM: return "OM";
    case CacheState::MI: return "MI";
    case CacheState::OI: return "OI";
    case CacheState::II: return "II";
  }
  return "?";
}

std::string_view to_string(DirState s) {
  switch (s) {
    case DirState::Invalid: return "Invalid";
    case DirState::Shared: return "Shared";
    case DirState::Owned: return "Owned";
    case DirState::Exclusive: return "Exclusive";
    case DirState::Busy: return "Busy";
  }
  return "?";
}

bool is_stable(CacheState s) { return s <= CacheState::M; }

CacheState permission_view(CacheState s) {
  switch (s) {
    case CacheState::SM: return CacheState::S;
    case CacheState::OM: return CacheState::O;
    case CacheState::IS:
    case CacheState::IM:
    case CacheState::MI:
    case CacheState::OI:
    case CacheState::II:
      return CacheState::I;
    default:
      return s;
  }
}

NodeId home_node(Addr addr, std::uint32_t n_nodes) {
  return endpoint(static_cast<std::uint32_t>((addr >> 6) % n_nodes));
}

SwmrReport check_swmr(std::span<const CacheState> states) {
  SwmrReport report;
  int writers = 0, owners = 0, valid = 0;
  for (CacheState s : states) {
    if (s == CacheState::M || s == CacheState::E) ++writers;
    if (s == CacheState::O) ++owners;
    if (readable(s)) ++valid;
  }
  auto describe = [&] {
    std::string d = "[";
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (i) d += ",";
      d += to_string(states[i]);
    }
    return d + "]";
  };
  if (writers > 1) report.violations.push_back("multiple M/E holders " + describe());
  if (writers == 1 && valid > 1) report.violations.push_back("writer coexists with readers " + describe());
  if (owners > 1) report.violations.push_back("multiple owners " + describe());
  return report;
}

// ---------------------------------------------------------------------------
// CacheController

CacheController::CacheController(NodeId self, const CoherenceParams& params,
                                 CoherenceObserver* observer)
    : self_(self), params_(&params), observer_(observer), l1_(params.l1), l2_(params.l2) {}

Outgoing& CacheController::send_msg(std::vector<Outgoing>& out, Cycle ready, MsgType type,
                                    NodeId dst, Addr block, bool crit, bool txn_crit,
                                    const TxnId& txn, Cycle now) {
  Message m;
  m.type = type;
  m.crit = crit;
  m.txn_crit = txn_crit;
  m.size_bytes = params_->msg_bytes_control;
  m.src = self_;
  m.dst = dst;
  m.addr = block;
  m.requester = self_.index;
  m.txn = txn;
  if (observer_) {
    observer_->on_transition(now, self_, event_name("send:", type), block, "-", "-", crit);
  }
  out.push_back(Outgoing{ready, m});
  return out.back();
}

void CacheController::set_state(Addr block, Line& line, CacheState next, std::string_view event,
                                bool crit, Cycle now) {
  if (observer_) {
    observer_->on_transition(now, self_, event, block, to_string(line.state), to_string(next),
                             crit);
  }
  line.state = next;
}

[[noreturn]] void CacheController::fail(const Message& msg, std::string_view state) const {
  std::ostringstream os;
  os << "cache " << self_.index << ": unexpected " << to_string(msg.type) << " from "
     << msg.src.index << " for block 0x" << std::hex << msg.addr << std::dec << " in state "
     << state << " (requester " << msg.requester << ", acks " << msg.ack_count << ")";
  throw ProtocolError(os.str());
}

DataToken CacheController::perform(Line& line, const CoreRequest& req, Cycle now) {
  const DataToken old = line.data;
  switch (req.op) {
    case CoreOp::Load:
      break;
    case CoreOp::Store:
      line.data = req.value;
      break;
    case CoreOp::TestAndSet:
      if (old == 0) line.data = 1;
      break;
  }
  if (observer_) observer_->on_perform(self_, req, old, now);
  return old;
}

void CacheController::l1_fill(Addr block, bool writable) {
  if (auto* e = l1_.lookup(block)) {
    e->writable = writable;
    return;
  }
  if (auto victim = l1_.select_victim(block)) l1_.erase(victim->addr);
  l1_.install(block, L1Line{writable});
}

void CacheController::access(const CoreRequest& req, Cycle now, std::vector<Outgoing>& out) {
  if (outstanding_) throw SimError("cache " + std::to_string(self_.index) + ": second outstanding request");
  outstanding_ = true;
  response_.reset();

  const Addr block = align(req.addr);
  if (writebacks_.contains(block)) {
    stalled_ = req;
    return;
  }

  const bool write = req.op != CoreOp::Load;
  if (auto* l1 = l1_.lookup(block); l1 && (!write || l1->writable)) {
    Line* line = l2_.peek(block);
    if (!line) throw SimError("inclusion broken: L1 block missing from L2");
    ++stats_.l1_hits;
    response_ = CoreResponse{perform(*line, req, now), now + params_->lat_l1};
    return;
  }

  if (Line* line = l2_.lookup(block)) {
    const bool hit = write ? (line->state == CacheState::M || line->state == CacheState::E)
                           : readable(line->state);
    if (hit) {
      if (line->state == CacheState::E) set_state(block, *line, CacheState::M, op_event(req.op), req.crit, now);
      ++stats_.l2_hits;
      const DataToken value = perform(*line, req, now);
      l1_fill(block, line->state == CacheState::M);
      response_ = CoreResponse{value, now + params_->lat_l2};
      return;
    }
  }
  start_miss(req, now, out);
}

void CacheController::make_room(Addr block, Cycle now, std::vector<Outgoing>& out) {
  auto victim = l2_.select_victim(block);
  if (!victim) return;
  if (!evict(victim->addr, now, out)) {
    throw SimError("cache " + std::to_string(self_.index) + ": LRU victim is transient");
  }
}

void CacheController::start_miss(const CoreRequest& req, Cycle now, std::vector<Outgoing>& out) {
  const Addr block = align(req.addr);
  const bool write = req.op != CoreOp::Load;
  Line* line = l2_.lookup(block);
  if (!line) {
    make_room(block, now, out);
    line = &l2_.install(block, Line{CacheState::I, 0});
  }

  CacheState next;
  switch (line->state) {
    case CacheState::I: next = write ? CacheState::IM : CacheState::IS; break;
    case CacheState::S: next = CacheState::SM; break;
    case CacheState::O: next = CacheState::OM; break;
    default:
      throw SimError("cache " + std::to_string(self_.index) + ": miss in state " +
                     std::string(to_string(line->state)));
  }
  const MsgType type = write ? MsgType::GETX : MsgType::GETS;

  Mshr m;
  m.req = req;
  m.block = block;
  m.txn = TxnId{self_.index, block, next_txn_seq_++};
  mshr_ = m;
  if (req.crit) {
    ++stats_.crit_requests;
  } else {
    ++stats_.noncrit_requests;
  }
  set_state(block, *line, next, op_event(req.op), req.crit, now);
  send_msg(out, now + params_->lat_l2, type, home_node(block, params_->n_nodes), block, req.crit,
           req.crit, m.txn, now);
}

bool CacheController::evict(Addr addr, Cycle now, std::vector<Outgoing>& out) {
  const Addr block = align(addr);
  Line* line = l2_.peek(block);
  if (!line) return false;
  Writeback wb;
  switch (line->state) {
    case CacheState::S:
      set_state(block, *line, CacheState::I, "replace", false, now);
      l2_.erase(block);
      l1_.erase(block);
      if (observer_) observer_->on_block_event(self_, block, now);
      return true;
    case CacheState::M:
    case CacheState::E:
      wb.state = CacheState::MI;
      break;
    case CacheState::O:
      wb.state = CacheState::OI;
      break;
    default:
      return false;
  }
  wb.data = line->data;
  set_state(block, *line, wb.state, "replace", false, now);
  l2_.erase(block);
  l1_.erase(block);
  writebacks_[block] = wb;
  ++stats_.writebacks;

  Outgoing& o = send_msg(out, now + 1, MsgType::PUTX, home_node(block, params_->n_nodes), block,
                         false, false, TxnId{self_.index, block, next_txn_seq_++}, now);
  o.msg.has_data = true;
  o.msg.data = wb.data;
  o.msg.size_bytes = params_->msg_bytes_data;
  if (observer_) observer_->on_block_event(self_, block, now);
  return true;
}

void CacheController::try_complete(Cycle now, std::vector<Outgoing>& out) {
  Mshr& m = *mshr_;
  if (!m.have_data || !m.acks_expected || *m.acks_expected != m.acks_received) return;

  Line* line = l2_.peek(m.block);
  if (!line) throw SimError("completing miss without an L2 frame");
  CacheState final_state = CacheState::M;
  if (line->state == CacheState::IS) final_state = m.exclusive ? CacheState::E : CacheState::S;
  line->data = m.data;
  set_state(m.block, *line, final_state, "complete", m.req.crit, now);
  const DataToken value = perform(*line, m.req, now);
  l1_fill(m.block, final_state == CacheState::M);
  response_ = CoreResponse{value, now};

  send_msg(out, now + 1, MsgType::Unblock, home_node(m.block, params_->n_nodes), m.block,
           m.req.crit, m.req.crit, m.txn, now);
  mshr_.reset();
}

void CacheController::receive(const Message& msg, Cycle now, std::vector<Outgoing>& out) {
  const Addr block = align(msg.addr);
  Line* line = l2_.peek(block);
  auto wb = writebacks_.find(block);
  const bool in_wb = wb != writebacks_.end();
  const CacheState st = line ? line->state : (in_wb ? wb->second.state : CacheState::I);
  const std::string event = event_name("recv:", msg.type);

  auto wb_state = [&](CacheState next) {
    if (observer_) {
      observer_->on_transition(now, self_, event, block, to_string(wb->second.state),
                               to_string(next), msg.crit);
    }
    wb->second.state = next;
  };
  auto note = [&] {
    if (observer_) observer_->on_transition(now, self_, event, block, to_string(st), to_string(st), msg.crit);
  };
  auto reply_data = [&](DataToken data, std::int32_t acks) {
    Outgoing& o = send_msg(out, now + params_->lat_l2, MsgType::Data_Owner, endpoint(msg.requester),
                           block, msg.txn_crit, msg.txn_crit, msg.txn, now);
    o.msg.requester = msg.requester;
    o.msg.has_data = true;
    o.msg.data = data;
    o.msg.ack_count = acks;
    o.msg.size_bytes = params_->msg_bytes_data;
  };

  switch (msg.type) {
    case MsgType::Fwd_GETS: {
      switch (st) {
        case CacheState::M:
        case CacheState::E:
          set_state(block, *line, CacheState::O, event, msg.crit, now);
          if (auto* l1 = l1_.peek(block)) l1->writable = false;
          reply_data(line->data, 0);
          break;
        case CacheState::O:
        case CacheState::OM:
          note();
          reply_data(line->data, 0);
          break;
        case CacheState::MI:
          wb_state(CacheState::OI);
          reply_data(wb->second.data, 0);
          break;
        case CacheState::OI:
          note();
          reply_data(wb->second.data, 0);
          break;
        default:
          fail(msg, to_string(st));
      }
      break;
    }

    case MsgType::Fwd_GETX: {
      switch (st) {
        case CacheState::M:
        case CacheState::E:
        case CacheState::O: {
          const DataToken data = line->data;
          set_state(block, *line, CacheState::I, event, msg.crit, now);
          l2_.erase(block);
          l1_.erase(block);
          reply_data(data, msg.ack_count);
          break;
        }
        case CacheState::OM:
          set_state(block, *line, CacheState::IM, event, msg.crit, now);
          l1_.erase(block);
          reply_data(line->data, msg.ack_count);
          break;
        case CacheState::MI:
        case CacheState::OI:
          wb_state(CacheState::II);
          reply_data(wb->second.data, msg.ack_count);
          break;
        default:
          fail(msg, to_string(st));
      }
      break;
    }

    case MsgType::INV: {
      switch (st) {
        case CacheState::I:
        case CacheState::IS:
        case CacheState::IM:
          note();
          break;
        case CacheState::S:
          set_state(block, *line, CacheState::I, event, msg.crit, now);
          l2_.erase(block);
          l1_.erase(block);
          break;
        case CacheState::SM:
          set_state(block, *line, CacheState::IM, event, msg.crit, now);
          l1_.erase(block);
          break;
        default:
          fail(msg, to_string(st));
      }
      Outgoing& o = send_msg(out, now + 1, MsgType::InvAck, endpoint(msg.requester), block,
                             msg.txn_crit, msg.txn_crit, msg.txn, now);
      o.msg.requester = msg.requester;
      break;
    }

    case MsgType::Data_Dir:
    case MsgType::Data_Owner: {
      if (!mshr_ || mshr_->block != block ||
          !(st == CacheState::IS || st == CacheState::IM || st == CacheState::SM ||
            st == CacheState::OM)) {
        fail(msg, to_string(st));
      }
      note();
      Mshr& m = *mshr_;
      if (m.have_data) fail(msg, "duplicate data");
      // An owner upgrading in OM keeps its own (newer) copy.
      m.data = (msg.has_data && st != CacheState::OM) ? msg.data : line->data;
      m.have_data = true;
      m.exclusive = msg.type == MsgType::Data_Dir && msg.exclusive;
      m.acks_expected = msg.ack_count;
      try_complete(now, out);
      break;
    }

    case MsgType::InvAck: {
      if (!mshr_ || mshr_->block != block ||
          !(st == CacheState::IM || st == CacheState::SM || st == CacheState::OM)) {
        fail(msg, to_string(st));
      }
      note();
      ++mshr_->acks_received;
      try_complete(now, out);
      break;
    }

    case MsgType::WB_Ack: {
      if (!in_wb) fail(msg, to_string(st));
      wb_state(CacheState::I);
      writebacks_.erase(wb);
      if (stalled_ && align(stalled_->addr) == block) {
        const CoreRequest req = *stalled_;
        stalled_.reset();
        outstanding_ = false;
        access(req, now, out);
      }
      break;
    }

    default:
      fail(msg, to_string(st));
  }
  if (observer_) observer_->on_block_event(self_, block, now);
}

std::optional<CoreResponse> CacheController::take_response(Cycle now) {
  if (!response_ || response_->ready > now) return std::nullopt;
  auto r = response_;
  response_.reset();
  outstanding_ = false;
  return r;
}

CacheState CacheController::state_of(Addr addr) const {
  const Addr block = align(addr);
  if (const Line* line = l2_.peek(block)) return line->state;
  if (auto it = writebacks_.find(block); it != writebacks_.end()) return it->second.state;
  return CacheState::I;
}

DataToken CacheController::data_of(Addr addr) const {
  const Addr block = align(addr);
  if (const Line* line = l2_.peek(block)) return line->data;
  if (auto it = writebacks_.find(block); it != writebacks_.end()) return it->second.data;
  return 0;
}

bool CacheController::l1_holds(Addr addr) const { return l1_.peek(align(addr)) != nullptr; }

std::vector<Addr> CacheController::inclusion_violations() const {
  std::vector<Addr> bad;
  l1_.for_each([&](Addr a, const L1Line& l1) {
    const Line* line = l2_.peek(a);
    const CacheState st = line ? permission_view(line->state) : CacheState::I;
    if (!readable(st) || (l1.writable && st != CacheState::M)) bad.push_back(a);
  });
  return bad;
}

void CacheController::describe(std::ostream& os) const {
  os << "C" << self_.index << "{";
  l2_.for_each([&](Addr a, const Line& l) {
    os << a << ":" << to_string(l.state) << "=" << l.data << (l1_.peek(a) ? "+" : "")
       << ((l1_.peek(a) && l1_.peek(a)->writable) ? "w" : "") << ";";
  });
  std::map<Addr, Writeback> wbs(writebacks_.begin(), writebacks_.end());
  for (const auto& [a, wb] : wbs) os << "wb" << a << ":" << to_string(wb.state) << "=" << wb.data << ";";
  if (mshr_) {
    os << "mshr:" << int(mshr_->req.op) << "," << mshr_->req.value << "," << mshr_->req.crit << ","
       << mshr_->have_data << ","
       << mshr_->exclusive << "," << mshr_->data << ","
       << (mshr_->acks_expected ? *mshr_->acks_expected : -1) << "," << mshr_->acks_received << ";";
  }
  if (stalled_) os << "stalled:" << int(stalled_->op) << "," << stalled_->value << "," << stalled_->crit << ";";
  if (response_) os << "resp:" << response_->value << ";";
  os << (outstanding_ ? "busy" : "idle") << "}";
}

// ---------------------------------------------------------------------------
// DirectoryController

DirectoryController::DirectoryController(NodeId self, const CoherenceParams& params,
                                         CoherenceObserver* observer)
    : self_(self), params_(&params), observer_(observer) {}

const DirEntry* DirectoryController::entry(Addr addr) const {
  auto it = entries_.find(block_align(addr, params_->block_bytes));
  return it == entries_.end() ? nullptr : &it->second;
}

DataToken DirectoryController::memory_of(Addr addr) const {
  const DirEntry* e = entry(addr);
  return e ? e->memory : 0;
}

bool DirectoryController::any_busy() const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [](const auto& kv) { return kv.second.busy.has_value() || !kv.second.pending.empty(); });
}

[[noreturn]] void DirectoryController::fail(const Message& msg, const DirEntry& e) const {
  std::ostringstream os;
  os << "directory " << self_.index << ": unexpected " << to_string(msg.type) << " from "
     << msg.src.index << " for block 0x" << std::hex << msg.addr << std::dec << " in state "
     << to_string(e.state) << " (owner " << (e.owner ? int(*e.owner) : -1) << ", sharers 0x"
     << std::hex << e.sharers << std::dec << ")";
  throw ProtocolError(os.str());
}

Outgoing& DirectoryController::send(std::vector<Outgoing>& out, Cycle ready, MsgType type,
                                    std::uint32_t dst, const Message& req, Cycle now) {
  Message m;
  m.type = type;
  m.txn_crit = req.txn_crit;
  m.crit = (class_of(type) == MessageClass::Forward && !params_->crit_forwards) ? false : req.txn_crit;
  m.size_bytes = params_->msg_bytes_control;
  m.src = self_;
  m.dst = endpoint(dst);
  m.addr = req.addr;
  m.requester = req.src.index;
  m.txn = req.txn;
  if (observer_) {
    observer_->on_transition(now, self_, event_name("send:", type), req.addr, "-", "-", m.crit);
  }
  out.push_back(Outgoing{ready, m});
  return out.back();
}

void DirectoryController::go_busy(DirEntry& e, const Message& req, DirState next, Cycle) {
  e.busy = DirEntry::BusyInfo{req.src.index, req.type, req.txn_crit, next, req.txn};
  e.state = DirState::Busy;
}

void DirectoryController::receive(const Message& msg, Cycle now, std::vector<Outgoing>& out) {
  const Addr block = block_align(msg.addr, params_->block_bytes);
  DirEntry& e = entries_[block];
  const std::string event = event_name("recv:", msg.type);
  const DirState before = e.state;

  switch (msg.type) {
    case MsgType::GETS:
    case MsgType::GETX:
    case MsgType::PUTX:
      if (e.busy) {
        e.pending.push_back(msg);
        if (observer_) observer_->on_transition(now, self_, event + "/queued", block, to_string(before), to_string(e.state), msg.crit);
        return;
      }
      process(msg, e, now, out);
      if (observer_) observer_->on_transition(now, self_, event, block, to_string(before), to_string(e.state), msg.crit);
      return;

    case MsgType::Unblock: {
      if (!e.busy || msg.src.index != e.busy->requester) fail(msg, e);
      e.state = e.busy->next;
      e.busy.reset();
      if (observer_) {
        observer_->on_transition(now, self_, event, block, to_string(before), to_string(e.state), msg.crit);
        observer_->on_txn_complete(self_, block, now);
      }
      while (!e.busy && !e.pending.empty()) {
        const Message next = e.pending.front();
        e.pending.pop_front();
        const DirState prior = e.state;
        process(next, e, now, out);
        if (observer_) {
          observer_->on_transition(now, self_, event_name("dequeue:", next.type), block,
                                   to_string(prior), to_string(e.state), next.crit);
        }
      }
      return;
    }

    default:
      fail(msg, e);
  }
}

void DirectoryController::process(const Message& req, DirEntry& e, Cycle now,
                                  std::vector<Outgoing>& out) {
  switch (req.type) {
    case MsgType::GETS: process_gets(req, e, now, out); break;
    case MsgType::GETX: process_getx(req, e, now, out); break;
    case MsgType::PUTX: process_putx(req, e, now, out); break;
    default: fail(req, e);
  }
}

void DirectoryController::process_gets(const Message& req, DirEntry& e, Cycle now,
                                       std::vector<Outgoing>& out) {
  const std::uint32_t r = req.src.index;
  switch (e.state) {
    case DirState::Invalid: {
      Outgoing& o = send(out, now + params_->lat_mem, MsgType::Data_Dir, r, req, now);
      o.msg.has_data = true;
      o.msg.data = e.memory;
      o.msg.exclusive = true;
      o.msg.size_bytes = params_->msg_bytes_data;
      e.owner = r;
      go_busy(e, req, DirState::Exclusive, now);
      break;
    }
    case DirState::Shared: {
      Outgoing& o = send(out, now + params_->lat_mem, MsgType::Data_Dir, r, req, now);
      o.msg.has_data = true;
      o.msg.data = e.memory;
      o.msg.size_bytes = params_->msg_bytes_data;
      e.sharers |= std::uint64_t{1} << r;
      go_busy(e, req, DirState::Shared, now);
      break;
    }
    case DirState::Exclusive:
    case DirState::Owned: {
      if (!e.owner || *e.owner == r) fail(req, e);
      send(out, now + 1, MsgType::Fwd_GETS, *e.owner, req, now);
      e.sharers |= std::uint64_t{1} << r;
      go_busy(e, req, DirState::Owned, now);
      break;
    }
    default:
      fail(req, e);
  }
}

void DirectoryController::process_getx(const Message& req, DirEntry& e, Cycle now,
                                       std::vector<Outgoing>& out) {
  const std::uint32_t r = req.src.index;
  const std::uint64_t others = e.sharers & ~(std::uint64_t{1} << r);
  const auto n_others = static_cast<std::int32_t>(std::popcount(others));
  auto invalidate_others = [&] {
    for (std::uint32_t n = 0; n < 64; ++n) {
      if (others & (std::uint64_t{1} << n)) send(out, now + 1, MsgType::INV, n, req, now);
    }
  };

  switch (e.state) {
    case DirState::Invalid:
    case DirState::Shared: {
      invalidate_others();
      Outgoing& o = send(out, now + params_->lat_mem, MsgType::Data_Dir, r, req, now);
      o.msg.has_data = true;
      o.msg.data = e.memory;
      o.msg.ack_count = n_others;
      o.msg.size_bytes = params_->msg_bytes_data;
      break;
    }
    case DirState::Exclusive:
      if (!e.owner || *e.owner == r) fail(req, e);
      send(out, now + 1, MsgType::Fwd_GETX, *e.owner, req, now).msg.ack_count = 0;
      break;
    case DirState::Owned:
      if (!e.owner) fail(req, e);
      invalidate_others();
      if (*e.owner == r) {
        // Owner upgrade: the requester already holds the newest data.
        send(out, now + 1, MsgType::Data_Dir, r, req, now).msg.ack_count = n_others;
      } else {
        send(out, now + 1, MsgType::Fwd_GETX, *e.owner, req, now).msg.ack_count = n_others;
      }
      break;
    default:
      fail(req, e);
  }
  e.sharers = 0;
  e.owner = r;
  go_busy(e, req, DirState::Exclusive, now);
}

void DirectoryController::process_putx(const Message& req, DirEntry& e, Cycle now,
                                       std::vector<Outgoing>& out) {
  const std::uint32_t p = req.src.index;
  if (e.owner && *e.owner == p &&
      (e.state == DirState::Exclusive || e.state == DirState::Owned)) {
    e.memory = req.data;
    e.owner.reset();
    e.state = (e.state == DirState::Owned && e.sharers != 0) ? DirState::Shared : DirState::Invalid;
  }
  // Otherwise a forward already moved ownership away; the data is stale.
  send(out, now + 1, MsgType::WB_Ack, p, req, now);
}

void DirectoryController::describe(std::ostream& os) const {
  std::map<Addr, const DirEntry*> sorted;
  for (const auto& [a, e] : entries_) sorted.emplace(a, &e);
  os << "D" << self_.index << "{";
  for (const auto& [a, e] : sorted) {
    os << a << ":" << to_string(e->state) << ",o" << (e->owner ? int(*e->owner) : -1) << ",s"
       << e->sharers << ",m" << e->memory;
    if (e->busy) os << ",b" << e->busy->requester << "/" << to_string(e->busy->type) << "/" << to_string(e->busy->next);
    for (const auto& p : e->pending) os << ",q" << to_string(p.type) << p.src.index;
    os << ";";
  }
  os << "}";
}

}  // namespace camsim

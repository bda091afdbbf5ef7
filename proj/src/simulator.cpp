#include <algorithm>
#include <cstdio>
#include <queue>
#include <random>
#include <sstream>
#include <unordered_map>

#include "camsim/harness.hpp"
#include "camsim/workload.hpp"

namespace camsim {

double crit_ratio(std::uint64_t crit, std::uint64_t noncrit) {
  const std::uint64_t total = crit + noncrit;
  return total == 0 ? 0.0 : double(crit) / double(total);
}

double RunStats::ratio() const { return crit_ratio(crit_reqs, noncrit_reqs); }

bool RunStats::counters_correct() const {
  const DataToken expected = DataToken(config.procs) * config.iters;
  return !counter_values.empty() &&
         std::all_of(counter_values.begin(), counter_values.end(),
                     [&](DataToken v) { return v == expected; });
}

std::uint64_t RunStats::total_violations() const {
  return swmr_violations + value_violations + lock_violations + inclusion_violations +
         crit_audit_violations;
}

namespace {

bool is_directory_bound(MsgType t) {
  return t == MsgType::GETS || t == MsgType::GETX || t == MsgType::PUTX || t == MsgType::Unblock;
}

class Simulation final : public CoherenceObserver {
 public:
  Simulation(const Config& cfg, const RunHooks& hooks)
      : cfg_(cfg),
        hooks_(hooks),
        cparams_(cfg.coherence_params()),
        topo_(Topology::build(cfg.topology, cfg.procs)),
        net_(topo_, cfg.network_params()),
        rng_(cfg.seed) {
    program_ = gen_microbenchmark(MicrobenchParams{cfg.procs, cfg.counters, cfg.iters,
                                                   cfg.noncrit_work, cfg.block_bytes,
                                                   std::uint64_t(cfg.mem_mb) << 20});
    lock_block_ = block_align(program_.lock_addr, cfg.block_bytes);
    for (std::uint32_t i = 0; i < cfg.procs; ++i) {
      cores_.emplace_back(i, program_.threads[i], cfg.crit_tagging);
      caches_.emplace_back(endpoint(i), cparams_, this);
      dirs_.emplace_back(endpoint(i), cparams_, this);
    }
    parks_.resize(cfg.procs);
    issued_at_.assign(cfg.procs, 0);
    crit_since_.assign(cfg.procs, 0);
    spin_period_ = std::max<Cycle>(cfg.lat_l1, 1);
  }

  RunStats run();

  void on_perform(NodeId node, const CoreRequest& req, DataToken old, Cycle now) override;
  void on_block_event(NodeId node, Addr addr, Cycle now) override;
  void on_txn_complete(NodeId home, Addr addr, Cycle now) override;
  void on_transition(Cycle now, NodeId node, std::string_view event, Addr addr,
                     std::string_view old_state, std::string_view new_state, bool crit) override;

 private:
  struct Pending {
    Cycle ready;
    std::uint64_t order;
    Message msg;
    bool operator>(const Pending& o) const {
      return ready != o.ready ? ready > o.ready : order > o.order;
    }
  };
  struct Park {
    bool active = false;
    Cycle since = 0;
    DataToken value = 0;
    std::optional<Cycle> wake;
  };

  void step_cores(Cycle now);
  void note_crit(std::uint32_t i, bool entered, Cycle now);
  void issue(std::uint32_t i, const CoreRequest& req, Cycle now);
  void deliver(Cycle now);
  void queue_outgoing();
  void inject_ready(Cycle now);
  std::optional<Cycle> next_event(Cycle now) const;
  void audit(const Message& m);
  void violation(std::uint64_t& counter, std::string what);
  void check_watchdog(Cycle now);
  [[noreturn]] void stuck(Cycle now, const std::string& why) const;
  bool quiescent() const;
  void finalize();

  Config cfg_;
  RunHooks hooks_;
  CoherenceParams cparams_;
  Topology topo_;
  Network net_;
  Program program_;
  Addr lock_block_ = 0;
  std::vector<Core> cores_;
  std::vector<CacheController> caches_;
  std::vector<DirectoryController> dirs_;

  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> pending_;
  std::uint64_t pending_order_ = 0;
  std::mt19937_64 rng_;
  std::vector<Outgoing> out_;
  std::vector<Message> deliveries_;

  std::vector<Park> parks_;
  Cycle spin_period_ = 1;
  std::vector<Cycle> issued_at_;
  std::vector<Cycle> crit_since_;
  std::uint32_t finished_ = 0;

  std::unordered_map<Addr, DataToken> golden_;
  std::optional<std::uint32_t> lock_holder_;
  std::unordered_map<std::uint64_t, bool> txn_crit_;
  RunStats stats_;
};

void Simulation::violation(std::uint64_t& counter, std::string what) {
  ++counter;
  if (stats_.violation_samples.size() < 16) stats_.violation_samples.push_back(std::move(what));
}

void Simulation::on_perform(NodeId node, const CoreRequest& req, DataToken old, Cycle now) {
  const Addr block = block_align(req.addr, cfg_.block_bytes);
  DataToken& golden = golden_[block];
  if (req.op != CoreOp::Store && old != golden) {
    violation(stats_.value_violations, "cycle " + std::to_string(now) + " node " +
                                           std::to_string(node.index) + " read " +
                                           std::to_string(old) + " expected " + std::to_string(golden));
  }
  switch (req.op) {
    case CoreOp::Load:
      break;
    case CoreOp::Store:
      golden = req.value;
      if (block == lock_block_ && req.value == 0) {
        if (lock_holder_ != node.index) {
          violation(stats_.lock_violations, "node " + std::to_string(node.index) + " released a lock it does not hold");
        }
        lock_holder_.reset();
      }
      break;
    case CoreOp::TestAndSet:
      if (old == 0) {
        golden = 1;
        if (lock_holder_) {
          violation(stats_.lock_violations, "node " + std::to_string(node.index) +
                                                " acquired lock held by " + std::to_string(*lock_holder_));
        }
        lock_holder_ = node.index;
      }
      break;
  }
}

void Simulation::on_block_event(NodeId node, Addr addr, Cycle now) {
  Park& p = parks_[node.index];
  if (!p.active || p.wake || addr != lock_block_) return;
  // First spin-load issue slot strictly after `now` sees the new state.
  const Cycle k = (now - p.since) / spin_period_ + 1;
  p.wake = p.since + k * spin_period_;
}

void Simulation::on_txn_complete(NodeId, Addr addr, Cycle now) {
  std::vector<CacheState> states;
  states.reserve(caches_.size());
  for (const auto& c : caches_) states.push_back(permission_view(c.state_of(addr)));
  ++stats_.swmr_checks;
  auto report = check_swmr(states);
  for (auto& v : report.violations) {
    violation(stats_.swmr_violations, "cycle " + std::to_string(now) + " block " + std::to_string(addr) + ": " + v);
  }
}

void Simulation::on_transition(Cycle now, NodeId node, std::string_view event, Addr addr,
                               std::string_view old_state, std::string_view new_state, bool crit) {
  if (!hooks_.trace) return;
  char buf[48];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(addr));
  *hooks_.trace << now << ' ' << node.index << ' ' << event << ' ' << buf << ' ' << old_state
                << ' ' << new_state << ' ' << (crit ? 1 : 0) << '\n';
}

void Simulation::queue_outgoing() {
  for (auto& o : out_) {
    Cycle ready = o.ready;
    if (cfg_.jitter > 0) ready += rng_() % (cfg_.jitter + 1);
    pending_.push(Pending{ready, pending_order_++, std::move(o.msg)});
  }
  out_.clear();
}

void Simulation::issue(std::uint32_t i, const CoreRequest& req, Cycle now) {
  issued_at_[i] = now;
  caches_[i].access(req, now, out_);
  queue_outgoing();
}

void Simulation::step_cores(Cycle now) {
  for (std::uint32_t i = 0; i < cores_.size(); ++i) {
    Core& core = cores_[i];
    if (core.finished()) continue;
    Park& park = parks_[i];
    if (park.active) {
      if (park.wake != now) continue;
      park.active = false;
      park.wake.reset();
      if (auto req = core.step(now, CoreResponse{park.value, now})) issue(i, *req, now);
      continue;
    }

    auto response = caches_[i].take_response(now);
    if (response && cfg_.fast_forward && core.spinning() && response->value != 0 &&
        caches_[i].l1_holds(lock_block_)) {
      // Every further spin load would hit the L1 and return the same value
      // until a message touches the lock block here.
      park = Park{true, now, response->value, std::nullopt};
      continue;
    }
    const bool was_crit = core.crit();
    if (auto req = core.step(now, response)) issue(i, *req, now);
    if (core.crit() != was_crit) note_crit(i, core.crit(), now);
    if (core.finished()) ++finished_;
  }
}

void Simulation::note_crit(std::uint32_t i, bool entered, Cycle now) {
  if (entered) {
    crit_since_[i] = now;
  } else {
    ++stats_.critical_sections;
    stats_.critical_cycles += now - crit_since_[i];
  }
}

void Simulation::deliver(Cycle now) {
  for (const Message& m : deliveries_) {
    const std::uint32_t node = m.dst.index;
    if (is_directory_bound(m.type)) {
      dirs_[node].receive(m, now, out_);
    } else {
      caches_[node].receive(m, now, out_);
    }
    queue_outgoing();
  }
}

void Simulation::audit(const Message& m) {
  if (hooks_.on_inject) hooks_.on_inject(m);
  const std::uint64_t key = (std::uint64_t(m.txn.requester) << 48) | m.txn.seq;
  auto bad = [&](const char* why) {
    violation(stats_.crit_audit_violations,
              std::string(to_string(m.type)) + " txn " + std::to_string(m.txn.requester) + "/" +
                  std::to_string(m.txn.seq) + ": " + why);
  };
  switch (m.type) {
    case MsgType::GETS:
    case MsgType::GETX:
      if (m.crit != m.txn_crit) bad("request crit differs from transaction");
      txn_crit_[key] = m.txn_crit;
      return;
    case MsgType::PUTX:
    case MsgType::WB_Ack:
      if (m.crit || m.txn_crit) bad("writeback tagged critical");
      return;
    default:
      break;
  }
  auto it = txn_crit_.find(key);
  if (it == txn_crit_.end()) {
    bad("message for unknown transaction");
    return;
  }
  if (m.txn_crit != it->second) bad("transaction crit bit changed");
  const bool expect_vnet_crit =
      (m.msg_class() == MessageClass::Forward && !cfg_.crit_forwards) ? false : it->second;
  if (m.crit != expect_vnet_crit) bad("message on wrong vnet set");
  if (m.type == MsgType::Unblock) txn_crit_.erase(it);
}

void Simulation::inject_ready(Cycle now) {
  while (!pending_.empty() && pending_.top().ready <= now) {
    Message m = pending_.top().msg;
    pending_.pop();
    audit(m);
    net_.inject(std::move(m), now);
  }
}

std::optional<Cycle> Simulation::next_event(Cycle now) const {
  std::optional<Cycle> best = net_.next_event(now);
  auto consider = [&](Cycle c) {
    c = std::max(c, now + 1);
    if (!best || c < *best) best = c;
  };
  if (!pending_.empty()) consider(pending_.top().ready);
  for (std::uint32_t i = 0; i < cores_.size(); ++i) {
    const Core& core = cores_[i];
    if (core.finished()) continue;
    const Park& park = parks_[i];
    if (park.active) {
      if (park.wake) consider(*park.wake);
    } else if (core.waiting()) {
      if (auto r = caches_[i].response_ready()) consider(*r);
    } else {
      consider(core.ready_at());
    }
  }
  return best;
}

void Simulation::check_watchdog(Cycle now) {
  for (std::uint32_t i = 0; i < cores_.size(); ++i) {
    if (cores_[i].waiting() && !parks_[i].active && now - issued_at_[i] > cfg_.watchdog) {
      stuck(now, "core " + std::to_string(i) + " blocked for more than " +
                     std::to_string(cfg_.watchdog) + " cycles");
    }
  }
}

[[noreturn]] void Simulation::stuck(Cycle now, const std::string& why) const {
  std::ostringstream os;
  os << why << " at cycle " << now << " (probable deadlock or livelock)";
  for (std::uint32_t i = 0; i < cores_.size(); ++i) {
    const Core& c = cores_[i];
    if (c.finished()) continue;
    os << "\n  core " << i << ": pc " << c.pc() << (c.waiting() ? " waiting" : " ready")
       << (c.crit() ? " crit" : "") << (parks_[i].active ? " parked" : "")
       << " since " << issued_at_[i];
  }
  throw SimError(os.str());
}

bool Simulation::quiescent() const {
  if (!net_.idle() || !pending_.empty()) return false;
  return std::none_of(dirs_.begin(), dirs_.end(), [](const auto& d) { return d.any_busy(); });
}

void Simulation::finalize() {
  const auto cycles = std::max<Cycle>(stats_.total_cycles, 1);
  double util = 0.0, contention = 0.0;
  for (const auto& l : stats_.links) {
    util += double(l.busy_cycles) / double(cycles);
    contention += double(l.contention_cycles);
  }
  if (!stats_.links.empty()) {
    stats_.avg_link_utilization = util / double(stats_.links.size());
    stats_.avg_contention_cycles = contention / double(stats_.links.size());
  }

  for (const auto& c : caches_) {
    stats_.crit_reqs += c.stats().crit_requests;
    stats_.noncrit_reqs += c.stats().noncrit_requests;
    for (Addr a : c.inclusion_violations()) {
      violation(stats_.inclusion_violations,
                "node " + std::to_string(c.id().index) + " L1 block " + std::to_string(a) + " not covered by L2");
    }
  }

  for (const Addr a : program_.counter_addrs) {
    std::optional<DataToken> owned;
    for (const auto& c : caches_) {
      const CacheState s = c.state_of(a);
      if (s == CacheState::M || s == CacheState::O || s == CacheState::E) owned = c.data_of(a);
    }
    const DataToken value = owned ? *owned : dirs_[home_node(a, cfg_.procs).index].memory_of(a);
    for (const auto& c : caches_) {
      if (c.state_of(a) == CacheState::S && c.data_of(a) != value) {
        violation(stats_.value_violations, "stale shared copy of counter " + std::to_string(a));
      }
    }
    stats_.counter_values.push_back(value);
  }
  stats_.messages_injected = net_.injected();
  stats_.messages_delivered = net_.delivered();
}

RunStats Simulation::run() {
  stats_.config = cfg_;
  Cycle now = 0;
  bool done = false;
  for (;;) {
    deliveries_.clear();
    net_.advance(now, deliveries_);
    net_.sample_contention();
    step_cores(now);
    deliver(now);
    inject_ready(now);
    net_.arbitrate(now, cfg_.cam);

    if (!done && finished_ == cores_.size()) {
      done = true;
      stats_.total_cycles = now;
      for (const auto& l : net_.links()) stats_.links.push_back(l.stats());
    }
    if (done && quiescent()) break;
    if (now >= cfg_.cycle_budget) stuck(now, "cycle budget " + std::to_string(cfg_.cycle_budget) + " exhausted");
    if (!done) check_watchdog(now);

    std::optional<Cycle> next = cfg_.fast_forward ? next_event(now) : std::optional<Cycle>(now + 1);
    if (!next) {
      if (done) {
        violation(stats_.swmr_violations, "directory still busy with no messages in flight");
        break;
      }
      stuck(now, "no pending events");
    }
    if (*next > now + 1) net_.skip_cycles(*next - now - 1);
    now = *next;
  }
  finalize();
  return stats_;
}

}  // namespace

RunStats run_simulation(const Config& cfg, const RunHooks& hooks) {
  cfg.validate();
  Simulation sim(cfg, hooks);
  return sim.run();
}

}  // namespace camsim

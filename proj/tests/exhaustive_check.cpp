// Explores every interleaving of core operations and message deliveries for
// two caches sharing one block. Messages travel on per (source, destination,
// vnet) FIFO channels; any non-empty channel may deliver next.

#include <CLI11.hpp>

#include <chrono>
#include <deque>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "camsim/coherence.hpp"

using namespace camsim;

namespace {

constexpr std::uint32_t kNodes = 3;
constexpr std::uint32_t kCaches = 2;
constexpr Addr kBlock = 128;  // homed at node 2

struct State;

struct Checker : CoherenceObserver {
  State* current = nullptr;
  std::vector<std::string> errors;
  void on_perform(NodeId node, const CoreRequest& req, DataToken old, Cycle) override;
};

using ChannelKey = std::tuple<std::uint32_t, std::uint32_t, int>;

struct State {
  std::vector<CacheController> caches;
  std::vector<DirectoryController> dirs;
  std::map<ChannelKey, std::deque<Message>> channels;
  DataToken golden = 0;
  std::uint32_t ops = 0;
  std::vector<std::string> path;

  bool quiescent() const {
    for (const auto& [k, q] : channels) {
      if (!q.empty()) return false;
    }
    for (const auto& c : caches) {
      if (c.busy()) return false;
    }
    return !dirs[home_node(kBlock, kNodes).index].any_busy();
  }

  std::string key() const {
    std::ostringstream os;
    os << golden << "|" << ops << "|";
    for (const auto& c : caches) c.describe(os);
    for (const auto& d : dirs) d.describe(os);
    for (const auto& [k, q] : channels) {
      if (q.empty()) continue;
      os << "[" << std::get<0>(k) << ">" << std::get<1>(k) << "v" << std::get<2>(k) << ":";
      for (const auto& m : q) {
        os << to_string(m.type) << "," << m.requester << "," << m.ack_count << "," << m.has_data << ","
           << m.data << "," << m.exclusive << "," << m.crit << m.txn_crit << ";";
      }
      os << "]";
    }
    return os.str();
  }
};

void Checker::on_perform(NodeId node, const CoreRequest& req, DataToken old, Cycle) {
  if (req.op != CoreOp::Store && old != current->golden) {
    errors.push_back("cache " + std::to_string(node.index) + " read " + std::to_string(old) +
                     ", last write was " + std::to_string(current->golden));
  }
  if (req.op == CoreOp::Store) current->golden = req.value;
}

bool to_directory(MsgType t) {
  return t == MsgType::GETS || t == MsgType::GETX || t == MsgType::PUTX || t == MsgType::Unblock;
}

class Explorer {
 public:
  Explorer(std::uint32_t depth, bool crit_choice) : depth_(depth), crit_choice_(crit_choice) {
    params_.n_nodes = kNodes;
    params_.l1 = CacheGeometry::make(64, 1, 64);
    params_.l2 = CacheGeometry::make(64, 1, 64);
  }

  int run() {
    State init;
    for (std::uint32_t i = 0; i < kNodes; ++i) {
      init.caches.emplace_back(endpoint(i), params_, &checker_);
      init.dirs.emplace_back(endpoint(i), params_, &checker_);
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<State> stack{init};
    seen_.insert(init.key());
    while (!stack.empty() && failures_ < 5) {
      State s = std::move(stack.back());
      stack.pop_back();
      expand(s, stack);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "states " << seen_.size() << ", transitions " << transitions_ << ", quiescent "
              << quiescent_ << ", max ops " << depth_ << ", seconds " << secs << "\n";
    if (failures_ == 0) {
      std::cout << "no violations\n";
      return 0;
    }
    std::cout << failures_ << " violating trace(s)\n";
    return 1;
  }

 private:
  void expand(const State& s, std::vector<State>& stack) {
    bool any = false;
    auto push = [&](State next, std::string label) {
      any = true;
      ++transitions_;
      next.path.push_back(std::move(label));
      settle(next);
      if (!check(next)) return;
      if (seen_.insert(next.key()).second) stack.push_back(std::move(next));
    };

    // Core operations.
    if (s.ops < depth_) {
      for (std::uint32_t c = 0; c < kCaches; ++c) {
        if (s.caches[c].busy()) continue;
        for (bool crit : crit_choice_ ? std::vector<bool>{false, true} : std::vector<bool>{false}) {
          for (CoreOp op : {CoreOp::Load, CoreOp::Store}) {
            State n = s;
            const DataToken v = n.ops + 1;
            ++n.ops;
            std::vector<Outgoing> out;
            with(n, [&] { n.caches[c].access(CoreRequest{op, kBlock, v, crit}, 0, out); });
            absorb(n, out);
            push(std::move(n), "c" + std::to_string(c) + (op == CoreOp::Load ? " load" : " store " + std::to_string(v)) +
                                   (crit ? " crit" : ""));
          }
        }
        const CacheState st = s.caches[c].state_of(kBlock);
        if (is_stable(st) && st != CacheState::I) {
          State n = s;
          ++n.ops;
          std::vector<Outgoing> out;
          with(n, [&] { n.caches[c].evict(kBlock, 0, out); });
          absorb(n, out);
          push(std::move(n), "c" + std::to_string(c) + " replace");
        }
      }
    }

    // Deliveries.
    for (const auto& [k, q] : s.channels) {
      if (q.empty()) continue;
      State n = s;
      auto& chan = n.channels[k];
      const Message m = chan.front();
      chan.pop_front();
      std::vector<Outgoing> out;
      bool ok = with(n, [&] {
        if (to_directory(m.type)) {
          n.dirs[m.dst.index].receive(m, 0, out);
        } else {
          n.caches[m.dst.index].receive(m, 0, out);
        }
      });
      absorb(n, out);
      std::string label = "deliver " + std::string(to_string(m.type)) + " " + std::to_string(m.src.index) + "->" +
                          std::to_string(m.dst.index) + " vnet " + std::to_string(m.vnet());
      if (!ok) {
        n.path.push_back(label);
        report(n, "protocol error");
        continue;
      }
      push(std::move(n), std::move(label));
    }

    if (!any && !s.quiescent()) report(s, "deadlock: no enabled transition");
  }

  template <typename Fn>
  bool with(State& n, Fn&& fn) {
    checker_.current = &n;
    try {
      fn();
    } catch (const std::exception& e) {
      checker_.errors.push_back(e.what());
      checker_.current = nullptr;
      return false;
    }
    checker_.current = nullptr;
    return true;
  }

  static void absorb(State& n, std::vector<Outgoing>& out) {
    for (auto& o : out) n.channels[{o.msg.src.index, o.msg.dst.index, o.msg.vnet()}].push_back(o.msg);
    out.clear();
  }

  // Responses are consumed as soon as they exist; they carry no choice.
  void settle(State& n) {
    for (auto& c : n.caches) c.take_response(Cycle(1) << 62);
  }

  bool check(State& n) {
    if (!checker_.errors.empty()) {
      report(n, "value check");
      return false;
    }
    std::vector<CacheState> view;
    for (const auto& c : n.caches) view.push_back(permission_view(c.state_of(kBlock)));
    const auto swmr = check_swmr(view);
    if (!swmr.ok()) {
      checker_.errors = swmr.violations;
      report(n, "SWMR");
      return false;
    }
    if (n.quiescent()) {
      ++quiescent_;
      if (auto why = quiescent_problem(n)) {
        checker_.errors.push_back(*why);
        report(n, "quiescent state");
        return false;
      }
    }
    return true;
  }

  // At rest the directory must agree with the caches and every valid copy
  // (or memory, when nobody owns the block) must hold the last write.
  std::optional<std::string> quiescent_problem(const State& n) const {
    const auto& dir = n.dirs[home_node(kBlock, kNodes).index];
    const DirEntry* e = dir.entry(kBlock);
    const DirState ds = e ? e->state : DirState::Invalid;
    std::optional<std::uint32_t> owner;
    for (std::uint32_t c = 0; c < kNodes; ++c) {
      const CacheState st = n.caches[c].state_of(kBlock);
      if (!is_stable(st)) return "transient state at rest in cache " + std::to_string(c);
      if (st == CacheState::I) continue;
      if (n.caches[c].data_of(kBlock) != n.golden) return "stale copy in cache " + std::to_string(c);
      if (st == CacheState::S) {
        if (!e || !(e->sharers & (1ull << c))) return "sharer unknown to directory: " + std::to_string(c);
        continue;
      }
      owner = c;
      if (!e || e->owner != c) return "owner unknown to directory: " + std::to_string(c);
      const bool exclusive = st == CacheState::M || st == CacheState::E;
      if (exclusive != (ds == DirState::Exclusive)) return "directory state disagrees with owner";
    }
    if (!owner) {
      if (ds == DirState::Exclusive || ds == DirState::Owned) return "directory names a missing owner";
      if (dir.memory_of(kBlock) != n.golden) return "memory is stale with no owner";
    }
    if (e && !e->pending.empty()) return "queued request at rest";
    return std::nullopt;
  }

  void report(const State& s, const std::string& what) {
    ++failures_;
    std::cout << "VIOLATION (" << what << ")\n";
    for (const auto& e : checker_.errors) std::cout << "  " << e << "\n";
    for (const auto& p : s.path) std::cout << "    " << p << "\n";
    checker_.errors.clear();
  }

  CoherenceParams params_;
  Checker checker_;
  std::uint32_t depth_;
  bool crit_choice_;
  std::unordered_set<std::string> seen_;
  std::uint64_t transitions_ = 0;
  std::uint64_t quiescent_ = 0;
  int failures_ = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exhaustive interleaving check of the coherence protocol on one block"};
  std::uint32_t depth = 6;
  bool crit = true;
  app.add_option("--depth", depth, "maximum core operations (load, store, replacement)");
  app.add_option("--crit", crit, "also explore critical-tagged requests (separate vnets)");
  CLI11_PARSE(app, argc, argv);
  return Explorer(depth, crit).run();
}

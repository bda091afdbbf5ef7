#include "camsim/workload.hpp"

#include <map>
#include <string>

namespace camsim {

Program gen_microbenchmark(const MicrobenchParams& p) {
  if (p.threads < 1 || p.counters < 1 || p.iters < 1) {
    throw ConfigError("microbenchmark needs threads, counters and iters >= 1");
  }
  const std::uint64_t bb = p.block_bytes;
  const std::uint64_t scratch_blocks = std::uint64_t(p.iters) * p.noncrit_work;
  const std::uint64_t total_blocks = 1 + std::uint64_t(p.counters) + scratch_blocks * p.threads;
  if (total_blocks * bb > p.memory_bytes) {
    throw ConfigError("microbenchmark address map needs " + std::to_string(total_blocks * bb) +
                      " bytes but memory is " + std::to_string(p.memory_bytes));
  }

  Program prog;
  prog.lock_addr = 0;
  for (std::uint32_t c = 0; c < p.counters; ++c) prog.counter_addrs.push_back((1 + c) * bb);
  const Addr scratch_base = (1 + std::uint64_t(p.counters)) * bb;
  prog.footprint_bytes = total_blocks * bb;

  prog.threads.resize(p.threads);
  for (std::uint32_t t = 0; t < p.threads; ++t) {
    const Addr base = scratch_base + t * scratch_blocks * bb;
    prog.scratch.emplace_back(base, scratch_blocks * bb);
    auto& code = prog.threads[t];
    code.reserve(std::size_t(p.iters) * (2 * std::size_t(p.noncrit_work) + 2 * p.counters + 4));
    Addr next_scratch = base;
    for (std::uint32_t it = 0; it < p.iters; ++it) {
      for (std::uint32_t w = 0; w < p.noncrit_work; ++w) {
        code.push_back(Instr::load(next_scratch));
        code.push_back(Instr::store_loaded_plus(next_scratch, 1));
        next_scratch += bb;
      }
      code.push_back(Instr::lock(prog.lock_addr));
      code.push_back(Instr::crit_enter());
      for (const Addr c : prog.counter_addrs) {
        code.push_back(Instr::load(c));
        code.push_back(Instr::store_loaded_plus(c, 1));
      }
      code.push_back(Instr::crit_exit());
      code.push_back(Instr::unlock(prog.lock_addr));
    }
  }
  validate_program(prog);
  return prog;
}

void validate_program(const Program& program) {
  for (std::size_t t = 0; t < program.threads.size(); ++t) {
    enum { Free, Locked, InCrit, Exited } phase = Free;
    for (std::size_t i = 0; i < program.threads[t].size(); ++i) {
      const InstrKind k = program.threads[t][i].kind;
      auto bad = [&](const char* why) {
        throw ConfigError("thread " + std::to_string(t) + " instruction " + std::to_string(i) +
                          ": " + why);
      };
      switch (k) {
        case InstrKind::Lock:
          if (phase != Free) bad("LOCK while holding the lock");
          phase = Locked;
          break;
        case InstrKind::CritEnter:
          if (phase != Locked) bad("CRIT_ENTER must directly follow LOCK");
          phase = InCrit;
          break;
        case InstrKind::CritExit:
          if (phase != InCrit) bad("CRIT_EXIT outside a critical section");
          phase = Exited;
          break;
        case InstrKind::Unlock:
          if (phase != Exited) bad("UNLOCK must directly follow CRIT_EXIT");
          phase = Free;
          break;
        default:
          if (phase == Locked || phase == Exited) bad("instruction between lock and crit marker");
          break;
      }
    }
    if (phase != Free) {
      throw ConfigError("thread " + std::to_string(t) + " ends inside a critical section");
    }
  }
}

void dump_program(const Program& program, std::ostream& os) {
  for (std::size_t t = 0; t < program.threads.size(); ++t) {
    os << "thread " << t << "\n";
    for (const Instr& in : program.threads[t]) {
      os << "  ";
      switch (in.kind) {
        case InstrKind::Load: os << "LOAD 0x" << std::hex << in.addr << std::dec; break;
        case InstrKind::Store:
          os << "STORE 0x" << std::hex << in.addr << std::dec << " "
             << (in.from_load ? "loaded+" : "") << in.imm;
          break;
        case InstrKind::Lock: os << "LOCK 0x" << std::hex << in.addr << std::dec; break;
        case InstrKind::Unlock: os << "UNLOCK 0x" << std::hex << in.addr << std::dec; break;
        case InstrKind::CritEnter: os << "CRIT_ENTER"; break;
        case InstrKind::CritExit: os << "CRIT_EXIT"; break;
        case InstrKind::Delay: os << "DELAY " << in.imm; break;
      }
      os << "\n";
    }
  }
}

std::vector<DataToken> reference_counter_values(const Program& program) {
  std::map<Addr, DataToken> mem;
  std::vector<std::size_t> pc(program.threads.size(), 0);
  DataToken last = 0;
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t t = 0; t < program.threads.size(); ++t) {
      const auto& code = program.threads[t];
      // Run this thread up to and including its next UNLOCK.
      while (pc[t] < code.size()) {
        const Instr& in = code[pc[t]++];
        progress = true;
        if (in.kind == InstrKind::Load) last = mem[in.addr];
        if (in.kind == InstrKind::Store) mem[in.addr] = in.from_load ? last + in.imm : in.imm;
        if (in.kind == InstrKind::Unlock) break;
      }
    }
  }
  std::vector<DataToken> out;
  for (const Addr a : program.counter_addrs) out.push_back(mem[a]);
  return out;
}

Core::Core(std::uint32_t id, std::span<const Instr> program, bool crit_tagging)
    : id_(id), program_(program), crit_tagging_(crit_tagging) {}

Addr Core::lock_addr() const {
  return pc_ < program_.size() ? program_[pc_].addr : 0;
}

void Core::apply_crit_marker(InstrKind marker) {
  crit_ = marker == InstrKind::CritEnter;
}

void Core::retire(const CoreResponse& response, Cycle now) {
  if (!waiting_) {
    throw SimError("core " + std::to_string(id_) + ": response with no outstanding request");
  }
  waiting_ = false;
  ready_at_ = now;
  const Instr& in = program_[pc_];
  switch (in.kind) {
    case InstrKind::Load:
      last_load_ = response.value;
      ++pc_;
      break;
    case InstrKind::Store:
    case InstrKind::Unlock:
      ++pc_;
      break;
    case InstrKind::Lock:
      if (lock_phase_ == LockPhase::Spin) {
        if (response.value == 0) lock_phase_ = LockPhase::TestAndSet;
      } else if (response.value == 0) {
        lock_phase_ = LockPhase::None;
        ++pc_;
      } else {
        lock_phase_ = LockPhase::Spin;
      }
      break;
    default:
      throw SimError("core " + std::to_string(id_) + ": response for non-memory instruction");
  }
}

std::optional<CoreRequest> Core::step(Cycle now, std::optional<CoreResponse> response) {
  if (response) retire(*response, now);
  if (waiting_ || pc_ >= program_.size() || now < ready_at_) return std::nullopt;

  const Instr& in = program_[pc_];
  const bool tag = crit_tagging_ && crit_;
  switch (in.kind) {
    case InstrKind::Load:
      waiting_ = true;
      return CoreRequest{CoreOp::Load, in.addr, 0, tag};
    case InstrKind::Store:
      waiting_ = true;
      return CoreRequest{CoreOp::Store, in.addr, in.from_load ? last_load_ + in.imm : in.imm, tag};
    case InstrKind::Lock:
      waiting_ = true;
      if (lock_phase_ == LockPhase::TestAndSet) return CoreRequest{CoreOp::TestAndSet, in.addr, 0, tag};
      lock_phase_ = LockPhase::Spin;
      return CoreRequest{CoreOp::Load, in.addr, 0, tag};
    case InstrKind::Unlock:
      waiting_ = true;
      return CoreRequest{CoreOp::Store, in.addr, 0, tag};
    case InstrKind::CritEnter:
    case InstrKind::CritExit:
      apply_crit_marker(in.kind);
      ++pc_;
      ready_at_ = now + 1;
      return std::nullopt;
    case InstrKind::Delay:
      ++pc_;
      ready_at_ = now + in.imm;
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace camsim

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "camsim/coherence.hpp"
#include "camsim/common.hpp"

namespace camsim {

enum class InstrKind : std::uint8_t { Load, Store, Lock, Unlock, CritEnter, CritExit, Delay };

struct Instr {
  InstrKind kind = InstrKind::Delay;
  Addr addr = 0;
  // Store writes `imm`, or last loaded value + imm when from_load is set.
  // Delay stalls for `imm` cycles.
  bool from_load = false;
  std::uint64_t imm = 0;

  static Instr load(Addr a) { return {InstrKind::Load, a, false, 0}; }
  static Instr store(Addr a, std::uint64_t v) { return {InstrKind::Store, a, false, v}; }
  static Instr store_loaded_plus(Addr a, std::uint64_t k) { return {InstrKind::Store, a, true, k}; }
  static Instr lock(Addr a) { return {InstrKind::Lock, a, false, 0}; }
  static Instr unlock(Addr a) { return {InstrKind::Unlock, a, false, 0}; }
  static Instr crit_enter() { return {InstrKind::CritEnter, 0, false, 0}; }
  static Instr crit_exit() { return {InstrKind::CritExit, 0, false, 0}; }
  static Instr delay(std::uint64_t cycles) { return {InstrKind::Delay, 0, false, cycles}; }
};

struct Program {
  std::vector<std::vector<Instr>> threads;
  Addr lock_addr = 0;
  std::vector<Addr> counter_addrs;
  // Per-thread private scratch region [base, base + bytes).
  std::vector<std::pair<Addr, std::uint64_t>> scratch;
  // Highest address used plus one.
  std::uint64_t footprint_bytes = 0;
};

struct MicrobenchParams {
  std::uint32_t threads = 16;
  std::uint32_t counters = 300;
  std::uint32_t iters = 50;
  std::uint32_t noncrit_work = 100;
  std::uint32_t block_bytes = 64;
  std::uint64_t memory_bytes = 512ull << 20;
};

// Lock-protected shared counter array. Every thread repeats `iters` times:
// noncrit_work LOAD/STORE pairs over fresh blocks of its private scratch
// region, then LOCK; CRIT_ENTER; increment every counter; CRIT_EXIT; UNLOCK.
// Lock and counters each own a block. Throws ConfigError when the address
// map does not fit in memory.
Program gen_microbenchmark(const MicrobenchParams& params);

// Checks LOCK/CRIT_ENTER/CRIT_EXIT/UNLOCK nesting; throws ConfigError.
void validate_program(const Program& program);

// One line per instruction, grouped by thread.
void dump_program(const Program& program, std::ostream& os);

// Sequential reference semantics: runs the threads round-robin one critical
// section at a time without timing and returns final counter values.
std::vector<DataToken> reference_counter_values(const Program& program);

// In-order core with at most one outstanding memory request. The crit flag
// follows CRIT_ENTER/CRIT_EXIT and tags every memory request issued while set.
class Core {
 public:
  Core(std::uint32_t id, std::span<const Instr> program, bool crit_tagging = true);

  // Retires `response` (the completion of the outstanding request, if any),
  // then executes the next instruction when idle. Returns the memory request
  // to issue this cycle.
  std::optional<CoreRequest> step(Cycle now, std::optional<CoreResponse> response);

  bool finished() const { return pc_ >= program_.size() && !waiting_; }
  bool waiting() const { return waiting_; }
  bool crit() const { return crit_; }
  std::size_t pc() const { return pc_; }
  // Cycle at which the core can next execute when neither waiting nor done.
  Cycle ready_at() const { return ready_at_; }
  DataToken last_load() const { return last_load_; }

  // Test-and-test-and-set state: spinning on the lock with plain loads.
  bool spinning() const { return lock_phase_ == LockPhase::Spin; }
  Addr lock_addr() const;

  // CRIT_ENTER sets the crit flag, CRIT_EXIT clears it.
  void apply_crit_marker(InstrKind marker);

 private:
  enum class LockPhase : std::uint8_t { None, Spin, TestAndSet };

  void retire(const CoreResponse& response, Cycle now);

  std::uint32_t id_;
  std::span<const Instr> program_;
  bool crit_tagging_;
  std::size_t pc_ = 0;
  bool crit_ = false;
  bool waiting_ = false;
  Cycle ready_at_ = 0;
  DataToken last_load_ = 0;
  LockPhase lock_phase_ = LockPhase::None;
};

}  // namespace camsim

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "camsim/coherence.hpp"
#include "camsim/network.hpp"
#include "camsim/topology.hpp"

namespace camsim {

struct Config {
  TopologyKind topology = TopologyKind::Crossbar;
  std::uint32_t procs = 16;

  // memhier
  std::uint32_t l1_kb = 256;
  std::uint32_t l1_assoc = 4;
  std::uint32_t l2_kb = 16384;
  std::uint32_t l2_assoc = 4;
  std::uint32_t block_bytes = 64;
  std::uint32_t mem_mb = 512;
  Cycle lat_l1 = 1;
  Cycle lat_l2 = 10;
  Cycle lat_mem = 160;

  // network
  std::uint32_t bandwidth = 125;
  Cycle hop_latency = 1;
  std::uint32_t msg_bytes_control = 8;
  std::uint32_t msg_bytes_data = 72;
  bool crit_forwards = true;
  bool cam = false;
  // When off, cores never tag requests critical.
  bool crit_tagging = true;

  // workload
  std::uint32_t counters = 300;
  std::uint32_t iters = 50;
  std::uint32_t noncrit_work = 100;

  std::uint64_t seed = 1;
  // Extra uniform [0, jitter] cycles on every controller message (stress mode).
  Cycle jitter = 0;
  Cycle cycle_budget = 500'000'000;
  Cycle watchdog = 1'000'000;
  // Skip idle cycles and park spinning cores; results are identical either way.
  bool fast_forward = true;

  // Throws ConfigError naming the violated constraint.
  void validate() const;
  CoherenceParams coherence_params() const;
  NetworkParams network_params() const;

  // Applies one `key = value` setting; throws ConfigError on unknown keys or
  // malformed values.
  void set(std::string_view key, std::string_view value);
  // Line-oriented `key = value` text; '#' starts a comment.
  static Config parse(std::string_view text, Config base);
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path, Config base);
  static Config load(const std::filesystem::path& path);
};

struct RunStats {
  Config config;
  Cycle total_cycles = 0;
  std::uint64_t crit_reqs = 0;
  std::uint64_t noncrit_reqs = 0;
  std::vector<LinkStats> links;
  double avg_link_utilization = 0.0;
  double avg_contention_cycles = 0.0;
  std::vector<DataToken> counter_values;
  // Critical sections executed and the cycles spent between their markers.
  std::uint64_t critical_sections = 0;
  Cycle critical_cycles = 0;

  std::uint64_t messages_injected = 0;
  std::uint64_t messages_delivered = 0;
  std::uint64_t swmr_violations = 0;
  std::uint64_t value_violations = 0;
  std::uint64_t lock_violations = 0;
  std::uint64_t inclusion_violations = 0;
  std::uint64_t crit_audit_violations = 0;
  std::uint64_t swmr_checks = 0;
  std::vector<std::string> violation_samples;

  // crit / (crit + noncrit)
  double ratio() const;
  bool counters_correct() const;
  std::uint64_t total_violations() const;
};

// crit / (crit + noncrit); 0 when both are zero.
double crit_ratio(std::uint64_t crit, std::uint64_t noncrit);

// Optional sinks for a single run.
struct RunHooks {
  // One line per message send/receive and state transition:
  // `cycle node event addr old_state new_state crit`.
  std::ostream* trace = nullptr;
  // Called for every message injected into the network.
  std::function<void(const Message&)> on_inject;
};

// Runs the microbenchmark to completion. Same Config -> identical RunStats.
// Throws SimError when the cycle budget or watchdog trips, ProtocolError on
// a coherence table miss.
RunStats run_simulation(const Config& cfg, const RunHooks& hooks = {});

// base.total_cycles / cam.total_cycles. Throws ConfigError unless the two
// configs differ only in the CAM flag.
double compute_speedup(const RunStats& base, const RunStats& cam);

bool same_except_cam(const Config& a, const Config& b);

struct SweepRow {
  std::string config_id;
  Config config;
  std::optional<RunStats> stats;
  std::optional<double> speedup;
  std::string error;
};

// A sweep point: a Config that is run once with CAM off and once with CAM on.
struct SweepPoint {
  std::string config_id;
  Config config;
};

// Runs both CAM settings of every point, in parallel when `workers` > 1.
// Rows are sorted by config id (stably, so each baseline row directly
// precedes its CAM row); a failed run records its error and the sweep
// continues.
std::vector<SweepRow> run_sweep(const std::vector<SweepPoint>& points, unsigned workers = 0);

// Topologies x {16, 4} procs x counters {300, 100} x bandwidth {125, 250}.
std::vector<SweepPoint> paper_preset(const Config& base);
// Standard id: <topology>.<procs>p.c<counters>.bw<bandwidth>
std::string config_id(const Config& cfg);

inline constexpr std::string_view kCsvHeader =
    "config_id,topology,procs,counters,iters,bandwidth,cam,seed,cycles,crit_reqs,noncrit_reqs,"
    "ratio,avg_link_util,avg_contention_cycles,speedup";

void write_csv(const std::vector<SweepRow>& rows, std::ostream& os);
// Throws std::runtime_error naming the path when it cannot be written.
void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& destination);

}  // namespace camsim

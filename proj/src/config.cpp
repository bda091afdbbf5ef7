#include <charconv>
#include <fstream>
#include <sstream>

#include "camsim/harness.hpp"

namespace camsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_uint(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("bad value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "on" || value == "true" || value == "1" || value == "yes") return true;
  if (value == "off" || value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad value '" + std::string(value) + "' for " + std::string(key) +
                    " (expected on/off)");
}

}  // namespace

void Config::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  auto u32 = [&](std::uint32_t& field) { field = parse_uint<std::uint32_t>(key, value); };
  auto u64 = [&](std::uint64_t& field) { field = parse_uint<std::uint64_t>(key, value); };

  if (key == "topology") topology = parse_topology_kind(value);
  else if (key == "procs") u32(procs);
  else if (key == "threads") u32(procs);
  else if (key == "l1_kb") u32(l1_kb);
  else if (key == "l1_assoc") u32(l1_assoc);
  else if (key == "l2_kb") u32(l2_kb);
  else if (key == "l2_assoc") u32(l2_assoc);
  else if (key == "block_bytes") u32(block_bytes);
  else if (key == "mem_mb") u32(mem_mb);
  else if (key == "lat_l1") u64(lat_l1);
  else if (key == "lat_l2") u64(lat_l2);
  else if (key == "lat_mem") u64(lat_mem);
  else if (key == "bandwidth") u32(bandwidth);
  else if (key == "hop_latency") u64(hop_latency);
  else if (key == "msg_bytes_control") u32(msg_bytes_control);
  else if (key == "msg_bytes_data") u32(msg_bytes_data);
  else if (key == "crit_forwards") crit_forwards = parse_bool(key, value);
  else if (key == "cam") cam = parse_bool(key, value);
  else if (key == "crit_tagging") crit_tagging = parse_bool(key, value);
  else if (key == "counters") u32(counters);
  else if (key == "iters") u32(iters);
  else if (key == "noncrit_work") u32(noncrit_work);
  else if (key == "seed") u64(seed);
  else if (key == "jitter") u64(jitter);
  else if (key == "cycle_budget") u64(cycle_budget);
  else if (key == "watchdog") u64(watchdog);
  else if (key == "fast_forward") fast_forward = parse_bool(key, value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

Config Config::parse(std::string_view text, Config base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    base.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

Config Config::load(const std::filesystem::path& path, Config base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), base);
}

void Config::validate() const {
  if (procs > 64) throw ConfigError("at most 64 processors supported, got " + std::to_string(procs));
  (void)Topology::build(topology, procs);
  if (bandwidth == 0) throw ConfigError("bandwidth must be positive");
  if (msg_bytes_control == 0 || msg_bytes_data == 0) throw ConfigError("message sizes must be positive");
  (void)coherence_params();
  if (counters < 1 || iters < 1) throw ConfigError("counters and iters must be >= 1");
  const std::uint64_t blocks = 1 + std::uint64_t(counters) + std::uint64_t(iters) * noncrit_work * procs;
  if (blocks * block_bytes > (std::uint64_t(mem_mb) << 20)) {
    throw ConfigError("workload footprint exceeds mem_mb");
  }
}

Config Config::parse(std::string_view text) { return parse(text, Config{}); }

Config Config::load(const std::filesystem::path& path) { return load(path, Config{}); }

CoherenceParams Config::coherence_params() const {
  CoherenceParams p;
  p.n_nodes = procs;
  p.block_bytes = block_bytes;
  p.memory_bytes = std::uint64_t(mem_mb) << 20;
  p.msg_bytes_control = msg_bytes_control;
  p.msg_bytes_data = msg_bytes_data;
  p.lat_l1 = lat_l1;
  p.lat_l2 = lat_l2;
  p.lat_mem = lat_mem;
  p.crit_forwards = crit_forwards;
  p.l1 = CacheGeometry::make(std::uint64_t(l1_kb) << 10, l1_assoc, block_bytes);
  p.l2 = CacheGeometry::make(std::uint64_t(l2_kb) << 10, l2_assoc, block_bytes);
  return p;
}

NetworkParams Config::network_params() const { return NetworkParams{bandwidth, hop_latency}; }

}  // namespace camsim

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>
#include <tuple>

#include "camsim/harness.hpp"

namespace camsim {

namespace {

auto fields_except_cam(const Config& c) {
  return std::tie(c.topology, c.procs, c.l1_kb, c.l1_assoc, c.l2_kb, c.l2_assoc, c.block_bytes,
                  c.mem_mb, c.lat_l1, c.lat_l2, c.lat_mem, c.bandwidth, c.hop_latency,
                  c.msg_bytes_control, c.msg_bytes_data, c.crit_forwards, c.crit_tagging,
                  c.counters, c.iters, c.noncrit_work, c.seed, c.jitter, c.cycle_budget,
                  c.watchdog, c.fast_forward);
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

bool same_except_cam(const Config& a, const Config& b) {
  return fields_except_cam(a) == fields_except_cam(b);
}

double compute_speedup(const RunStats& base, const RunStats& cam) {
  if (base.config.cam || !cam.config.cam || !same_except_cam(base.config, cam.config)) {
    throw ConfigError("speedup needs a CAM-off and a CAM-on run of the same configuration");
  }
  if (cam.total_cycles == 0) throw ConfigError("speedup of a zero-cycle run");
  return double(base.total_cycles) / double(cam.total_cycles);
}

std::string config_id(const Config& cfg) {
  return std::string(to_string(cfg.topology)) + "." + std::to_string(cfg.procs) + "p.c" +
         std::to_string(cfg.counters) + ".bw" + std::to_string(cfg.bandwidth);
}

std::vector<SweepPoint> paper_preset(const Config& base) {
  std::vector<SweepPoint> points;
  for (TopologyKind topo : {TopologyKind::Crossbar, TopologyKind::Torus2D, TopologyKind::Hypercube}) {
    for (std::uint32_t procs : {16u, 4u}) {
      for (std::uint32_t counters : {300u, 100u}) {
        for (std::uint32_t bw : {125u, 250u}) {
          Config c = base;
          c.topology = topo;
          c.procs = procs;
          c.counters = counters;
          c.bandwidth = bw;
          c.cam = false;
          points.push_back({config_id(c), c});
        }
      }
    }
  }
  return points;
}

std::vector<SweepRow> run_sweep(const std::vector<SweepPoint>& points, unsigned workers) {
  std::vector<SweepRow> rows(points.size() * 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (int cam = 0; cam < 2; ++cam) {
      SweepRow& r = rows[2 * i + cam];
      r.config_id = points[i].config_id;
      r.config = points[i].config;
      r.config.cam = cam == 1;
    }
  }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < rows.size();) {
      try {
        rows[i].stats = run_simulation(rows[i].config);
      } catch (const std::exception& e) {
        rows[i].error = e.what();
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, unsigned(rows.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    SweepRow& base = rows[2 * i];
    SweepRow& cam = rows[2 * i + 1];
    if (base.stats && cam.stats) cam.speedup = compute_speedup(*base.stats, *cam.stats);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.config_id < b.config_id; });
  return rows;
}

void write_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const SweepRow& r : rows) {
    const Config& c = r.config;
    os << r.config_id << ',' << to_string(c.topology) << ',' << c.procs << ',' << c.counters << ','
       << c.iters << ',' << c.bandwidth << ',' << (c.cam ? "on" : "off") << ',' << c.seed << ',';
    if (r.stats) {
      const RunStats& s = *r.stats;
      os << s.total_cycles << ',' << s.crit_reqs << ',' << s.noncrit_reqs << ',' << fixed6(s.ratio())
         << ',' << fixed6(s.avg_link_utilization) << ',' << fixed6(s.avg_contention_cycles) << ',';
    } else {
      os << ",,,,,,";
    }
    if (r.speedup) os << fixed6(*r.speedup);
    os << '\n';
  }
}

void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& destination) {
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write CSV to " + destination.string());
  write_csv(rows, out);
  out.flush();
  if (!out) throw std::runtime_error("error writing CSV to " + destination.string());
}

}  // namespace camsim

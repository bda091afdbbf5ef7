// Acceptance report: one PASS/FAIL line per criterion. The exit status is
// non-zero only for failures not listed with --known-red.

#include <CLI11.hpp>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "camsim/harness.hpp"
#include "oracles.hpp"

using namespace camsim;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Report {
  std::set<int> known_red;
  int unexpected = 0;

  void line(int id, bool pass, const std::string& title, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << " (" << title << "): " << detail;
    if (!pass && known_red.contains(id)) std::cout << " [known red]";
    std::cout << std::endl;
    if (!pass && !known_red.contains(id)) ++unexpected;
  }
};

std::string csv_of(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  write_csv(rows, os);
  return os.str();
}

// Rows of the preset keyed by (config id, cam).
using RowIndex = std::map<std::pair<std::string, bool>, const SweepRow*>;

const RunStats& stats(const RowIndex& idx, const std::string& id, bool cam) {
  const SweepRow* r = idx.at({id, cam});
  if (!r->stats) throw std::runtime_error(id + " failed: " + r->error);
  return *r->stats;
}

double speedup(const RowIndex& idx, const std::string& id) {
  return compute_speedup(stats(idx, id, false), stats(idx, id, true));
}

std::string id16(TopologyKind t, std::uint32_t counters, std::uint32_t bw) {
  Config c;
  c.topology = t;
  c.procs = 16;
  c.counters = counters;
  c.bandwidth = bw;
  return config_id(c);
}

constexpr TopologyKind kTopos[] = {TopologyKind::Crossbar, TopologyKind::Torus2D, TopologyKind::Hypercube};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria report"};
  std::string exhaustive;
  std::vector<int> known_red;
  unsigned jobs = 0;
  app.add_option("--exhaustive", exhaustive, "path of the exhaustive_check binary")->required();
  app.add_option("--known-red", known_red, "criteria whose failure does not fail the exit status");
  app.add_option("--jobs", jobs, "parallel sweep workers (0 = hardware threads)");
  CLI11_PARSE(app, argc, argv);

  Report rep;
  rep.known_red.insert(known_red.begin(), known_red.end());

  // The preset feeds criteria 1, 2, 5, 6, 7 and 9.
  const auto points = paper_preset(Config{});
  auto t0 = Clock::now();
  const auto rows = run_sweep(points, jobs);
  const double preset_secs = seconds_since(t0);
  RowIndex idx;
  for (const auto& r : rows) idx[{r.config_id, r.config.cam}] = &r;

  // 1. Counters.
  {
    std::size_t ok = 0;
    std::string first_bad;
    for (const auto& r : rows) {
      if (r.stats && r.stats->counters_correct()) {
        ++ok;
      } else if (first_bad.empty()) {
        first_bad = " first bad: " + r.config_id + (r.config.cam ? " cam=on " : " cam=off ") + r.error;
      }
    }
    const bool pass = ok == rows.size() && preset_secs < 600.0;
    rep.line(1, pass, "counters end at threads x iters",
             std::to_string(ok) + "/" + std::to_string(rows.size()) + " preset runs correct in " +
                 fmt(preset_secs, 1) + " s (limit 600 s)" + first_bad);
  }

  // 2. Invariant checkers over the preset and 100 jittered seeds.
  {
    std::uint64_t violations = 0, checks = 0, errors = 0;
    for (const auto& r : rows) {
      if (!r.stats) {
        ++errors;
        continue;
      }
      violations += r.stats->total_violations();
      checks += r.stats->swmr_checks;
    }
    t0 = Clock::now();
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      Config c;
      c.topology = TopologyKind::Crossbar;
      c.procs = 4;
      c.jitter = 20;
      c.seed = seed;
      c.cam = seed % 2 == 0;
      try {
        const RunStats s = run_simulation(c);
        violations += s.total_violations() + (s.counters_correct() ? 0 : 1);
        checks += s.swmr_checks;
      } catch (const std::exception& e) {
        ++errors;
        std::cout << "  jitter seed " << seed << ": " << e.what() << "\n";
      }
    }
    rep.line(2, violations == 0 && errors == 0, "SWMR and data-value invariants",
             std::to_string(violations) + " violations, " + std::to_string(errors) + " run errors, " +
                 std::to_string(checks) + " SWMR checks over 48 preset runs + 100 jitter seeds (" +
                 fmt(seconds_since(t0), 1) + " s for seeds)");
  }

  // 3. Exhaustive small-instance check.
  {
    t0 = Clock::now();
    const std::string cmd = "\"" + exhaustive + "\" --depth 6 > exhaustive_check.log 2>&1";
    const int rc = std::system(cmd.c_str());
    const double secs = seconds_since(t0);
    rep.line(3, rc == 0 && secs < 60.0, "exhaustive 2-cache 1-block depth-6 check",
             std::string(rc == 0 ? "no violations" : "violations or crash (see exhaustive_check.log)") +
                 " in " + fmt(secs, 1) + " s (limit 60 s)");
  }

  // 4. Routing against BFS and Hamming distance.
  {
    std::size_t pairs = 0, bad = 0;
    for (auto kind : kTopos) {
      const auto t = Topology::build(kind, 16);
      const auto dist = oracle::bfs_distances(t);
      for (std::uint32_t s = 0; s < t.n_nodes(); ++s) {
        for (std::uint32_t d = 0; d < t.n_nodes(); ++d) {
          ++pairs;
          const NodeId src = t.node(s), dst = t.node(d);
          bool ok = t.min_hops(src, dst) == dist[s][d];
          if (kind == TopologyKind::Hypercube) ok = ok && dist[s][d] == std::uint32_t(std::popcount(s ^ d));
          NodeId at = src;
          std::uint32_t steps = 0;
          while (ok && at != dst && steps <= t.n_nodes()) {
            const auto& l = t.link(t.next_hop(at, dst));
            ok = l.src == at;
            at = l.dst;
            ++steps;
          }
          ok = ok && at == dst && steps == dist[s][d];
          bad += !ok;
        }
      }
    }
    rep.line(4, bad == 0, "routing oracle",
             std::to_string(pairs - bad) + "/" + std::to_string(pairs) +
                 " node pairs match BFS (crossbar-16, torus 4x4, hypercube-16)");
  }

  // 5. CAM speedup at 16p, counters 300, bw 125.
  {
    bool all_above = true;
    double best = 0;
    std::string detail;
    for (auto t : kTopos) {
      const double s = speedup(idx, id16(t, 300, 125));
      all_above = all_above && s > 1.0;
      best = std::max(best, s);
      detail += std::string(to_string(t)) + " " + fmt(s) + "  ";
    }
    rep.line(5, all_above && best >= 1.03, "speedup > 1.00 everywhere and >= 1.03 somewhere", detail);
  }

  // 6. Counters 300 -> 100.
  {
    bool pass = true;
    std::string detail;
    for (auto t : kTopos) {
      for (std::uint32_t bw : {125u, 250u}) {
        const double r300 = stats(idx, id16(t, 300, bw), false).ratio();
        const double r100 = stats(idx, id16(t, 100, bw), false).ratio();
        const double s300 = speedup(idx, id16(t, 300, bw));
        const double s100 = speedup(idx, id16(t, 100, bw));
        pass = pass && r100 < r300 && s100 <= s300;
        detail += std::string(to_string(t)) + "/bw" + std::to_string(bw) + " ratio " + fmt(r300) + "->" +
                  fmt(r100) + " speedup " + fmt(s300) + "->" + fmt(s100) + "; ";
      }
    }
    rep.line(6, pass, "fewer counters lower the ratio and the speedup", detail);
  }

  // 7. Bandwidth 125 -> 250.
  {
    bool pass = true;
    std::string detail;
    for (auto t : kTopos) {
      for (std::uint32_t counters : {300u, 100u}) {
        const double c125 = stats(idx, id16(t, counters, 125), false).avg_contention_cycles;
        const double c250 = stats(idx, id16(t, counters, 250), false).avg_contention_cycles;
        const double s125 = speedup(idx, id16(t, counters, 125));
        const double s250 = speedup(idx, id16(t, counters, 250));
        pass = pass && c125 >= 3.0 * c250 && s250 < s125;
        detail += std::string(to_string(t)) + "/c" + std::to_string(counters) + " contention " + fmt(c125, 2) +
                  "->" + fmt(c250, 2) + " speedup " + fmt(s125) + "->" + fmt(s250) + "; ";
      }
    }
    rep.line(7, pass, "doubling bandwidth cuts contention >= 3x and lowers speedup", detail);
  }

  // 8. Tagging without CAM changes nothing.
  {
    std::size_t same = 0, total = 0;
    for (auto t : kTopos) {
      for (std::uint32_t procs : {16u, 4u}) {
        Config c;
        c.topology = t;
        c.procs = procs;
        c.counters = 100;
        const std::string id = config_id(c);
        c.crit_tagging = false;
        const RunStats off = run_simulation(c);
        ++total;
        same += off.total_cycles == stats(idx, id, false).total_cycles;
      }
    }
    rep.line(8, same == total, "crit tagging is neutral with CAM off",
             std::to_string(same) + "/" + std::to_string(total) + " configs with identical total_cycles");
  }

  // 9. Byte-identical CSV.
  {
    const std::string first = csv_of(rows);
    const std::string second = csv_of(run_sweep(points, jobs));
    rep.line(9, first == second, "deterministic CSV",
             "two preset sweeps, " + std::to_string(first.size()) + " bytes, " +
                 (first == second ? "identical" : "different"));
  }

  // 10. Ratio definition.
  {
    const double r = crit_ratio(298038, 479900);
    rep.line(10, std::abs(r - 0.383113) <= 5e-7, "ratio cross-check",
             "ratio(298038, 479900) = " + fmt(r, 9) + " (target 0.383113 +- 5e-7)");
  }

  if (!rep.known_red.empty()) {
    std::cout << "known red criteria do not affect the exit status" << std::endl;
  }
  return rep.unexpected == 0 ? 0 : 1;
}

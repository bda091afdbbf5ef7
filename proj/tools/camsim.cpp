// Command-line driver: one run or a preset sweep, CSV to a file or stdout.

#include <CLI11.hpp>

#include <iostream>

#include "camsim/harness.hpp"
#include "camsim/workload.hpp"

namespace {

int report_problems(const std::vector<camsim::SweepRow>& rows) {
  int bad = 0;
  for (const auto& r : rows) {
    const std::string label = r.config_id + (r.config.cam ? " cam=on" : " cam=off");
    if (!r.error.empty()) {
      std::cerr << label << ": error: " << r.error << "\n";
      ++bad;
      continue;
    }
    const auto& s = *r.stats;
    if (s.total_violations() != 0 || !s.counters_correct()) {
      std::cerr << label << ": " << s.total_violations() << " checker violations"
                << (s.counters_correct() ? "" : ", wrong counter values") << "\n";
      for (const auto& v : s.violation_samples) std::cerr << "  " << v << "\n";
      ++bad;
    }
  }
  return bad;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycle-level simulator of a directory-coherent multiprocessor with critical-message priority"};

  std::string config_file, topology, cam, out, sweep;
  std::vector<std::string> settings;
  std::optional<std::uint32_t> procs, counters, iters, noncrit_work, bandwidth;
  std::optional<std::uint64_t> seed;
  bool trace = false, dump = false;
  unsigned jobs = 0;

  app.add_option("--config", config_file, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--topology", topology, "crossbar, torus2d or hypercube");
  app.add_option("--procs", procs, "processor count");
  app.add_option("--counters", counters, "shared counters per critical section");
  app.add_option("--iters", iters, "critical sections per thread");
  app.add_option("--noncrit-work", noncrit_work, "private load/store pairs between critical sections");
  app.add_option("--bandwidth", bandwidth, "link bandwidth (bytes per 10 cycles)");
  app.add_option("--cam", cam, "critical-message priority")->check(CLI::IsMember({"on", "off"}));
  app.add_option("--seed", seed, "seed for jitter");
  app.add_option("--set", settings, "extra key=value setting (repeatable)");
  app.add_option("--out", out, "CSV destination (default stdout)");
  app.add_flag("--trace", trace, "write the event trace to stderr");
  app.add_flag("--dump-program", dump, "print the generated program and exit");
  app.add_option("--sweep", sweep, "run a preset sweep")->check(CLI::IsMember({"paper"}));
  app.add_option("--jobs", jobs, "parallel runs in a sweep (0 = hardware threads)");
  CLI11_PARSE(app, argc, argv);

  try {
    camsim::Config cfg;
    if (!config_file.empty()) cfg = camsim::Config::load(config_file);
    for (const auto& kv : settings) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw camsim::ConfigError("--set expects key=value, got " + kv);
      cfg.set(std::string_view(kv).substr(0, eq), std::string_view(kv).substr(eq + 1));
    }
    if (!topology.empty()) cfg.set("topology", topology);
    if (procs) cfg.procs = *procs;
    if (counters) cfg.counters = *counters;
    if (iters) cfg.iters = *iters;
    if (noncrit_work) cfg.noncrit_work = *noncrit_work;
    if (bandwidth) cfg.bandwidth = *bandwidth;
    if (!cam.empty()) cfg.set("cam", cam);
    if (seed) cfg.seed = *seed;
    cfg.validate();

    if (dump) {
      const auto prog = camsim::gen_microbenchmark(
          {cfg.procs, cfg.counters, cfg.iters, cfg.noncrit_work, cfg.block_bytes, std::uint64_t(cfg.mem_mb) << 20});
      camsim::dump_program(prog, std::cout);
      return 0;
    }

    std::vector<camsim::SweepRow> rows;
    if (!sweep.empty()) {
      rows = camsim::run_sweep(camsim::paper_preset(cfg), jobs);
    } else {
      camsim::RunHooks hooks;
      if (trace) hooks.trace = &std::cerr;
      camsim::SweepRow row{camsim::config_id(cfg), cfg, std::nullopt, std::nullopt, {}};
      try {
        row.stats = camsim::run_simulation(cfg, hooks);
      } catch (const camsim::SimError& e) {
        row.error = e.what();
      } catch (const camsim::ProtocolError& e) {
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }

    if (out.empty()) {
      camsim::write_csv(rows, std::cout);
    } else {
      camsim::emit_csv(rows, out);
    }
    return report_problems(rows) == 0 ? 0 : 2;
  } catch (const camsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

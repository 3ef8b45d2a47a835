// Compares the serial reference path against the OpenMP path on the three
// hot kernels: channel assembly, one full solve, and a small Monte Carlo
// batch. Results must agree bit-for-bit; only the wall time may differ.
#include <chrono>
#include <cstdio>

#include "cfris/sweep.hpp"

using namespace cfris;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

template <typename Fn>
double time_ms(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return ms_since(t0);
}

ScenarioConfig bench_config() {
  ScenarioConfig cfg;
  cfg.num_aps = 4;
  cfg.num_ues = 4;
  cfg.num_ris = 2;
  cfg.elements_per_ris = 32;
  cfg.num_subcarriers = 12;
  cfg.tx_antennas = 2;
  cfg.rx_antennas = 8;
  cfg.iqi_level = IqiLevel::level3;
  cfg.rng_seed = 7;
  cfg.validate();
  return cfg;
}

}  // namespace

int main() {
  const ScenarioConfig cfg = bench_config();
  const AllocationMap alloc = AllocationMap::full(cfg);
  std::printf("threads available: %d\n", hardware_threads());
  std::printf("%-28s %10s %10s %8s %s\n", "kernel", "serial ms", "openmp ms", "speedup",
              "identical");

  auto report = [](const char* name, double ts, double tp, bool same) {
    std::printf("%-28s %10.1f %10.1f %8.2fx %s\n", name, ts, tp, ts / tp,
                same ? "yes" : "NO");
  };

  {
    ChannelSet a, b;
    const double ts = time_ms([&] { a = assemble_channels(cfg, 0, Exec::serial); });
    const double tp = time_ms([&] { b = assemble_channels(cfg, 0, Exec::openmp); });
    bool same = true;
    for (int slot = 0; slot < cfg.num_subcarriers; ++slot) {
      same = same && a.G[slot] == b.G[slot];
      for (int k = 0; k < cfg.num_ues; ++k) {
        same = same && a.H[slot][k] == b.H[slot][k] && a.R[slot][k] == b.R[slot][k];
      }
    }
    report("assemble_channels", ts, tp, same);
  }

  const ChannelSet ch = assemble_channels(cfg, 0, Exec::serial);
  const DistortionMatrices dist = build_distortion(sample_iqi(cfg.iqi_level, cfg, 0), cfg);
  {
    SolverOptions opts;
    opts.max_outer_iters = 30;
    SolverState a, b;
    opts.exec = Exec::serial;
    const double ts = time_ms([&] { a = outer_solve(ch, dist, cfg, alloc, opts, 0); });
    opts.exec = Exec::openmp;
    const double tp = time_ms([&] { b = outer_solve(ch, dist, cfg, alloc, opts, 0); });
    bool same = a.trace.size() == b.trace.size();
    for (std::size_t i = 0; same && i < a.trace.size(); ++i) {
      same = a.trace[i].obj_after_theta == b.trace[i].obj_after_theta &&
             a.trace[i].sum_rate == b.trace[i].sum_rate;
    }
    report("outer_solve (30 iters)", ts, tp, same);
  }

  {
    SweepSpec spec;
    spec.power_dbm = {0.0};
    spec.realizations = 8;
    SolverOptions opts;
    opts.max_outer_iters = 15;
    std::vector<RunResult> a, b;
    const double ts = time_ms([&] { a = run_sweep(spec, cfg, opts, Exec::serial); });
    const double tp = time_ms([&] { b = run_sweep(spec, cfg, opts, Exec::openmp); });
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) {
      same = a[i].sum_rate_per_sc == b[i].sum_rate_per_sc;
    }
    report("monte carlo batch (8 runs)", ts, tp, same);
  }
  return 0;
}

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cfris/baselines.hpp"

namespace cfris {

// One Monte Carlo realization of one grid cell. Rates are per-subcarrier
// averages (total spectral efficiency divided by S), always evaluated under
// the true impairment model. Every grid coordinate is repeated in the row so
// the CSV is self-describing.
struct RunResult {
  Scheme scheme = Scheme::proposed;
  std::uint64_t master_seed = 0;
  std::uint64_t realization = 0;
  IqiLevel iqi = IqiLevel::level3;
  double power_dbm = 0.0;
  int ues = 0, aps = 0, rx_antennas = 0, tx_antennas = 0;
  int ris_count = 0, elements_per_ris = 0, subcarriers = 0;
  double sum_rate_per_sc = 0.0;
  double combiner_rate_per_sc = 0.0;
  int iterations = 0;
  bool converged = false;
  double max_power_violation = 0.0;  // max(0, ||v||^2/p - 1)
  double max_theta_excess = 0.0;     // max(0, max |theta| - 1)
  double max_slackness = 0.0;
  double median_theta_mag = 0.0;
  bool failed = false;
  std::string error;
  std::vector<std::array<double, 3>> trace;  // (objective, sum rate per sc, max violation)
};

struct SweepSpec {
  std::vector<double> power_dbm{-15.0, -10.0, -5.0, 0.0, 5.0, 10.0};
  std::vector<IqiLevel> levels;  // empty: the base config level
  std::vector<int> ue_counts;    // empty: the base config value
  std::vector<int> rx_counts;    // empty: the base config value
  std::vector<Scheme> schemes{Scheme::proposed};
  int realizations = 20;
  bool keep_traces = false;
};

RunResult run_single(Scheme scheme, const ScenarioConfig& cfg, const SolverOptions& opts,
                     std::uint64_t realization, bool keep_trace);

// Executes every (scheme x level x power x ues x rx x realization) cell.
// Realizations run concurrently under `sweep_exec`; per-cell failures are
// recorded in their row and the sweep continues. Output order and content
// depend only on (spec, base config, options), not on the thread count.
std::vector<RunResult> run_sweep(const SweepSpec& spec, const ScenarioConfig& base,
                                 const SolverOptions& opts, Exec sweep_exec);

void write_results_csv(const std::vector<RunResult>& results, std::ostream& out);
void write_summary_csv(const std::vector<RunResult>& results, std::ostream& out);
void write_trace_csv(const RunResult& result, std::ostream& out);

// Writes results.csv, summary.csv, and trace files for every result that
// carries a trace (see docs/formats.md for schemas and naming).
void emit_results(const std::vector<RunResult>& results, const std::string& out_dir);

}  // namespace cfris

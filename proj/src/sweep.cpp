#include "cfris/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <tuple>

namespace cfris {
namespace {

// Locale-independent shortest round-trip formatting.
std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt(std::uint64_t v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt(int v) {
  char buf[16];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string sanitize(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return text;
}

}  // namespace

RunResult run_single(Scheme scheme, const ScenarioConfig& cfg, const SolverOptions& opts,
                     std::uint64_t realization, bool keep_trace) {
  RunResult row;
  row.scheme = scheme;
  row.master_seed = cfg.rng_seed;
  row.realization = realization;
  row.iqi = cfg.iqi_level;
  row.power_dbm = cfg.power_dbm;
  row.ues = cfg.num_ues;
  row.aps = cfg.num_aps;
  row.rx_antennas = cfg.rx_antennas;
  row.tx_antennas = cfg.tx_antennas;
  row.ris_count = cfg.num_ris;
  row.elements_per_ris = cfg.elements_per_ris;
  row.subcarriers = cfg.num_subcarriers;
  try {
    cfg.validate();
    const AllocationMap alloc = AllocationMap::from_config(cfg);
    const ChannelSet ch = assemble_channels(cfg, realization, opts.exec);
    const IqiParams iqi = sample_iqi(cfg.iqi_level, cfg, realization);
    const DistortionMatrices dist = build_distortion(iqi, cfg);
    const SchemeResult res = run_scheme(scheme, ch, dist, cfg, alloc, opts, realization);
    const double s = static_cast<double>(cfg.num_subcarriers);
    row.sum_rate_per_sc = res.sum_rate / s;
    row.combiner_rate_per_sc = res.combiner_sum_rate / s;
    row.iterations = res.state.iterations;
    row.converged = res.state.converged;
    for (const IterationTrace& t : res.state.trace) {
      row.max_power_violation = std::max(row.max_power_violation, t.max_power_ratio - 1.0);
      row.max_theta_excess = std::max(row.max_theta_excess, t.max_theta_modulus - 1.0);
      row.max_slackness = std::max(row.max_slackness, t.max_slackness);
    }
    row.max_power_violation = std::max(row.max_power_violation, 0.0);
    row.max_theta_excess = std::max(row.max_theta_excess, 0.0);
    row.median_theta_mag = res.state.ris.median_modulus();
    if (keep_trace) {
      for (const IterationTrace& t : res.state.trace) {
        const double violation = std::max({t.max_power_ratio - 1.0,
                                           t.max_theta_modulus - 1.0, 0.0});
        row.trace.push_back({t.obj_after_theta, t.sum_rate / s, violation});
      }
    }
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
  }
  return row;
}

std::vector<RunResult> run_sweep(const SweepSpec& spec, const ScenarioConfig& base,
                                 const SolverOptions& opts, Exec sweep_exec) {
  if (spec.power_dbm.empty() || spec.schemes.empty() || spec.realizations < 1) {
    throw ConfigError("sweep: power grid, scheme list, and realizations must be nonempty");
  }
  const std::vector<IqiLevel> levels =
      spec.levels.empty() ? std::vector<IqiLevel>{base.iqi_level} : spec.levels;
  const std::vector<int> ue_counts =
      spec.ue_counts.empty() ? std::vector<int>{base.num_ues} : spec.ue_counts;
  const std::vector<int> rx_counts =
      spec.rx_counts.empty() ? std::vector<int>{base.rx_antennas} : spec.rx_counts;

  struct Cell {
    Scheme scheme;
    IqiLevel level;
    double power;
    int ues, rx;
    std::uint64_t realization;
  };
  std::vector<Cell> cells;
  for (Scheme scheme : spec.schemes) {
    for (IqiLevel level : levels) {
      for (double power : spec.power_dbm) {
        for (int ues : ue_counts) {
          for (int rx : rx_counts) {
            for (int r = 0; r < spec.realizations; ++r) {
              cells.push_back({scheme, level, power, ues, rx, static_cast<std::uint64_t>(r)});
            }
          }
        }
      }
    }
  }

  // When realizations run in parallel, each solver runs serially; nesting
  // OpenMP regions would oversubscribe without changing any result.
  SolverOptions run_opts = opts;
  if (sweep_exec == Exec::openmp) run_opts.exec = Exec::serial;

  std::vector<RunResult> results(cells.size());
  parallel_for(sweep_exec, static_cast<std::int64_t>(cells.size()), [&](std::int64_t i) {
    const Cell& cell = cells[i];
    ScenarioConfig cfg = base;
    cfg.iqi_level = cell.level;
    cfg.power_dbm = cell.power;
    cfg.num_ues = cell.ues;
    cfg.rx_antennas = cell.rx;
    if (cell.ues != base.num_ues) cfg.ue_subcarriers.clear();
    results[i] = run_single(cell.scheme, cfg, run_opts, cell.realization, spec.keep_traces);
  });
  return results;
}

void write_results_csv(const std::vector<RunResult>& results, std::ostream& out) {
  out << "scheme,master_seed,realization,iqi_level,power_dbm,ues,aps,rx_antennas,"
         "tx_antennas,ris,elements_per_ris,subcarriers,sum_rate_per_sc,"
         "combiner_rate_per_sc,iterations,converged,max_power_violation,"
         "max_theta_excess,max_slackness,median_theta_mag,failed,error\n";
  for (const RunResult& r : results) {
    out << to_string(r.scheme) << ',' << fmt(r.master_seed) << ',' << fmt(r.realization) << ','
        << to_string(r.iqi) << ',' << fmt(r.power_dbm) << ',' << fmt(r.ues) << ','
        << fmt(r.aps) << ',' << fmt(r.rx_antennas) << ',' << fmt(r.tx_antennas) << ','
        << fmt(r.ris_count) << ',' << fmt(r.elements_per_ris) << ',' << fmt(r.subcarriers)
        << ',' << fmt(r.sum_rate_per_sc) << ',' << fmt(r.combiner_rate_per_sc) << ','
        << fmt(r.iterations) << ',' << (r.converged ? 1 : 0) << ','
        << fmt(r.max_power_violation) << ',' << fmt(r.max_theta_excess) << ','
        << fmt(r.max_slackness) << ',' << fmt(r.median_theta_mag) << ','
        << (r.failed ? 1 : 0) << ',' << sanitize(r.error) << '\n';
  }
}

void write_summary_csv(const std::vector<RunResult>& results, std::ostream& out) {
  using Key = std::tuple<int, int, double, int, int>;  // scheme, iqi, power, ues, rx
  struct Acc {
    int n = 0, failures = 0;
    double sum = 0.0, sumsq = 0.0;
  };
  std::map<Key, Acc> cells;
  for (const RunResult& r : results) {
    Acc& acc = cells[{static_cast<int>(r.scheme), static_cast<int>(r.iqi), r.power_dbm,
                      r.ues, r.rx_antennas}];
    if (r.failed) {
      ++acc.failures;
      continue;
    }
    ++acc.n;
    acc.sum += r.sum_rate_per_sc;
    acc.sumsq += r.sum_rate_per_sc * r.sum_rate_per_sc;
  }
  out << "scheme,iqi_level,power_dbm,ues,rx_antennas,realizations,failures,"
         "mean_sum_rate_per_sc,stderr_sum_rate_per_sc\n";
  for (const auto& [key, acc] : cells) {
    const auto& [scheme, iqi, power, ues, rx] = key;
    const double mean = acc.n > 0 ? acc.sum / acc.n : 0.0;
    double stderr_v = 0.0;
    if (acc.n > 1) {
      const double var = std::max(0.0, (acc.sumsq - acc.n * mean * mean) / (acc.n - 1));
      stderr_v = std::sqrt(var / acc.n);
    }
    out << to_string(static_cast<Scheme>(scheme)) << ','
        << to_string(static_cast<IqiLevel>(iqi)) << ',' << fmt(power) << ',' << fmt(ues)
        << ',' << fmt(rx) << ',' << fmt(acc.n) << ',' << fmt(acc.failures) << ','
        << fmt(mean) << ',' << fmt(stderr_v) << '\n';
  }
}

void write_trace_csv(const RunResult& result, std::ostream& out) {
  out << "iteration,objective,sum_rate_per_sc,max_violation\n";
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    out << fmt(static_cast<int>(i + 1)) << ',' << fmt(result.trace[i][0]) << ','
        << fmt(result.trace[i][1]) << ',' << fmt(result.trace[i][2]) << '\n';
  }
}

void emit_results(const std::vector<RunResult>& results, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + out_dir + "'");

  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(out_dir) / name);
    if (!f) throw std::runtime_error("cannot write '" + (fs::path(out_dir) / name).string() + "'");
    return f;
  };
  {
    auto f = open("results.csv");
    write_results_csv(results, f);
  }
  {
    auto f = open("summary.csv");
    write_summary_csv(results, f);
  }
  for (const RunResult& r : results) {
    if (r.trace.empty()) continue;
    std::string name = "trace_" + std::to_string(r.realization) + ".csv";
    // Disambiguate when several grid cells kept traces for the same seed.
    const std::string cell = std::string(to_string(r.scheme)) + "_" + to_string(r.iqi) + "_p" +
                             fmt(r.power_dbm) + "_k" + fmt(r.ues) + "_n" + fmt(r.rx_antennas);
    if (std::count_if(results.begin(), results.end(), [&](const RunResult& o) {
          return !o.trace.empty() && o.realization == r.realization;
        }) > 1) {
      name = "trace_" + cell + "_" + std::to_string(r.realization) + ".csv";
    }
    auto f = open(name);
    write_trace_csv(r, f);
  }
}

}  // namespace cfris

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cfris/channel_io.hpp"
#include "cfris/sweep.hpp"
#include "cfris/validate.hpp"

namespace {

using namespace cfris;

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<double> power_dbm;
  std::optional<std::string> iqi_level;
  std::optional<int> ues;
  std::optional<int> rx_antennas;
  bool parallel = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "scenario config file (docs/config.md)");
  cmd->add_option("--set", flags.overrides, "override a config key, e.g. --set system.ues=8")
      ->expected(-1);
  cmd->add_option("--seed", flags.seed, "master seed");
  cmd->add_option("--power-dbm", flags.power_dbm, "per-UE per-subcarrier budget");
  cmd->add_option("--iqi-level", flags.iqi_level, "ideal|1|2|3");
  cmd->add_option("--ues", flags.ues, "number of UEs");
  cmd->add_option("--rx-antennas", flags.rx_antennas, "receive antennas per AP");
  cmd->add_flag("--parallel", flags.parallel, "use OpenMP");
}

ScenarioConfig resolve_config(const CommonFlags& flags) {
  ScenarioConfig cfg;
  if (!flags.config_path.empty()) cfg = load_config(flags.config_path);
  for (const std::string& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value");
    apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (flags.seed) cfg.rng_seed = *flags.seed;
  if (flags.power_dbm) cfg.power_dbm = *flags.power_dbm;
  if (flags.iqi_level) cfg.iqi_level = iqi_level_from_string(*flags.iqi_level);
  if (flags.ues) cfg.num_ues = *flags.ues;
  if (flags.rx_antennas) cfg.rx_antennas = *flags.rx_antennas;
  cfg.validate();
  return cfg;
}

std::vector<double> parse_doubles(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items) out.push_back(std::stod(s));
  return out;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"uplink RIS-assisted cell-free MIMO-OFDM simulator"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // run
  CommonFlags run_flags;
  SolverOptions run_opts;
  std::uint64_t run_realization = 0;
  std::string run_out = "out";
  std::string run_scheme = "proposed";
  bool run_trace = false;
  CLI::App* run_cmd = app.add_subcommand("run", "solve one realization");
  add_common(run_cmd, run_flags);
  run_cmd->add_option("--scheme", run_scheme, "proposed|mmse|random|blind");
  run_cmd->add_option("--realization", run_realization, "realization index");
  run_cmd->add_option("--max-iters", run_opts.max_outer_iters, "outer iteration cap");
  run_cmd->add_option("--tol", run_opts.outer_tol, "relative objective tolerance");
  run_cmd->add_option("--out", run_out, "output directory");
  run_cmd->add_flag("--trace", run_trace, "emit per-iteration trace csv");

  // sweep
  CommonFlags sweep_flags;
  SolverOptions sweep_opts;
  SweepSpec spec;
  std::string sweep_out = "out";
  std::vector<std::string> powers, levels, schemes;
  std::vector<int> ue_counts, rx_counts;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo grid sweep");
  add_common(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--powers", powers, "power grid in dBm (default -15..10 step 5)");
  sweep_cmd->add_option("--iqi-levels", levels, "IQI level grid");
  sweep_cmd->add_option("--ue-counts", ue_counts, "UE count grid");
  sweep_cmd->add_option("--rx-counts", rx_counts, "rx antenna grid");
  sweep_cmd->add_option("--schemes", schemes, "scheme grid");
  sweep_cmd->add_option("--realizations", spec.realizations, "realizations per cell");
  sweep_cmd->add_option("--max-iters", sweep_opts.max_outer_iters, "outer iteration cap");
  sweep_cmd->add_option("--tol", sweep_opts.outer_tol, "relative objective tolerance");
  sweep_cmd->add_option("--out", sweep_out, "output directory");
  sweep_cmd->add_flag("--traces", spec.keep_traces, "keep per-iteration traces");

  // validate
  bool validate_parallel = false;
  CLI::App* validate_cmd = app.add_subcommand("validate", "run the invariant/oracle battery");
  validate_cmd->add_flag("--parallel", validate_parallel, "use OpenMP");

  // dump-channels
  CommonFlags dump_flags;
  std::uint64_t dump_realization = 0;
  std::string dump_out = "channels.bin";
  CLI::App* dump_cmd = app.add_subcommand("dump-channels", "export a channel fixture");
  add_common(dump_cmd, dump_flags);
  dump_cmd->add_option("--realization", dump_realization, "realization index");
  dump_cmd->add_option("--out", dump_out, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run_cmd->parsed()) {
      const ScenarioConfig cfg = resolve_config(run_flags);
      run_opts.exec = run_flags.parallel ? Exec::openmp : Exec::serial;
      const Scheme scheme = scheme_from_string(run_scheme);
      const RunResult row = run_single(scheme, cfg, run_opts, run_realization, run_trace);
      if (row.failed) throw std::runtime_error(row.error);
      emit_results({row}, run_out);
      std::cout << "scheme=" << to_string(row.scheme) << " seed=" << row.master_seed
                << " realization=" << row.realization
                << " sum_rate_per_sc=" << row.sum_rate_per_sc
                << " iterations=" << row.iterations
                << " converged=" << (row.converged ? "yes" : "no")
                << " median|theta|=" << row.median_theta_mag << "\n"
                << "results in " << run_out << "\n";
      return 0;
    }
    if (sweep_cmd->parsed()) {
      const ScenarioConfig cfg = resolve_config(sweep_flags);
      sweep_opts.exec = Exec::serial;
      if (!powers.empty()) spec.power_dbm = parse_doubles(powers);
      for (const auto& l : levels) spec.levels.push_back(iqi_level_from_string(l));
      spec.ue_counts = ue_counts;
      spec.rx_counts = rx_counts;
      if (!schemes.empty()) {
        spec.schemes.clear();
        for (const auto& s : schemes) spec.schemes.push_back(scheme_from_string(s));
      }
      const Exec exec = sweep_flags.parallel ? Exec::openmp : Exec::serial;
      const std::vector<RunResult> results = run_sweep(spec, cfg, sweep_opts, exec);
      emit_results(results, sweep_out);
      int failures = 0;
      for (const auto& r : results) failures += r.failed ? 1 : 0;
      std::cout << results.size() << " runs, " << failures << " failures; results in "
                << sweep_out << "\n";
      return failures == 0 ? 0 : 2;
    }
    if (validate_cmd->parsed()) {
      return run_validation(std::cout, validate_parallel ? Exec::openmp : Exec::serial) ? 0 : 2;
    }
    if (dump_cmd->parsed()) {
      const ScenarioConfig cfg = resolve_config(dump_flags);
      const Exec exec = dump_flags.parallel ? Exec::openmp : Exec::serial;
      dump_channels(assemble_channels(cfg, dump_realization, exec), dump_out);
      std::cout << "wrote " << dump_out << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
